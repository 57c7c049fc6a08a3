#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/nn/blocks.hpp"
#include "holo/vq/codebook.hpp"

namespace holo::ar {

inline constexpr int kContextTokens = 22;  // 88 frames / 4

struct ArConfig {
  int body_codes = 256;
  int hand_codes = 256;
  int audio_dim = 64;     // MFCC coefficients
  int audio_hidden = 64;  // audio encoder working channels
  int channels = 64;      // trunk width
  int layers = 15;        // gated layers
  int head_hidden = 64;
  int num_speakers = 4;
  bool cross_conditional = true;
  bool zero_heads = true;  // zero output layers: uniform logits before training
  uint64_t seed = 1;
};

struct IndexPairSequence {
  std::vector<int> body;
  std::vector<int> hand;

  int steps() const { return static_cast<int>(body.size()); }
};

void validate(const IndexPairSequence& s, int body_codes, int hand_codes);

// How a trunk input channel may be read by the first layer at step t.
enum class Visibility { kHidden, kPast, kPastAndCurrent };

// Stack of causal gated convolutions (kernel 3, taps t-2..t):
//   u = conv(h) + speaker_bias[I];  y = tanh(u_f) * sigmoid(u_g);  h' = h + W y
// The first layer has no residual and a per-channel input mask.
class GatedTrunk {
 public:
  struct Layer {
    nn::Conv1d::Cache conv;
    Mat filter;  // tanh output
    Mat gate;    // sigmoid output
    nn::Linear::Cache out;
  };
  struct Cache {
    std::vector<Layer> layers;
    std::vector<int> speakers;
  };

  GatedTrunk() = default;
  GatedTrunk(const std::string& name, const std::vector<Visibility>& inputs, int channels, int layers,
             int num_speakers, Rng& rng);

  SeqBatch forward(const SeqBatch& x, const std::vector<int>& speakers) const;
  SeqBatch forward(const SeqBatch& x, const std::vector<int>& speakers, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dh, const Cache& cache);
  void collect(nn::ParamList& out);

 private:
  SeqBatch run(const SeqBatch& x, const std::vector<int>& speakers, Cache* cache) const;

  std::vector<nn::Conv1d> convs_;
  std::vector<nn::Linear> outs_;
  std::vector<nn::Param> speaker_bias_;  // per layer, num_speakers x 2C
  int channels_ = 0;
};

// Two-layer head: linear -> leaky ReLU -> linear.
class Head {
 public:
  struct Cache {
    nn::Linear::Cache hidden;
    nn::ActCache act;
    nn::Linear::Cache out;
  };

  Head() = default;
  Head(const std::string& name, int in, int hidden, int out, bool zero_output, Rng& rng);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dy, const Cache& cache);
  void collect(nn::ParamList& out);

 private:
  nn::Linear hidden_;
  nn::Linear out_;
};

struct ArLogits {
  Mat body;  // steps x body_codes
  Mat hand;  // steps x hand_codes
};

// Each part has its own trunk over codes before t and audio up to t. With
// cross-conditioning both trunks see both parts' past codes and the hand
// head also reads the current body code. The ablation keeps the same
// layers but each trunk sees only its own part, and there is no skip.
class ArModel {
 public:
  struct Batch {
    SeqBatch mfcc;  // B x frames x audio_dim
    SeqBatch body_codes;
    SeqBatch hand_codes;
    std::vector<int> body;  // B * steps, row-major like the codes
    std::vector<int> hand;
    std::vector<int> speakers;
  };
  struct StepResult {
    double loss = 0.0;  // -mean over sequences of the joint log-probability
    double tokens = 0.0;
  };

  ArModel() = default;
  explicit ArModel(const ArConfig& cfg);

  // MFCC frames (T x audio_dim, T a multiple of 4) -> T/4 x 64 audio tokens.
  Mat encode_audio(const Mat& mfcc) const;
  ArLogits logits(const Mat& body_codes, const Mat& hand_codes, const Mat& audio_tokens, int speaker) const;

  StepResult train_step(const Batch& batch);

  nn::ParamList params();
  nn::ParamList buffers();
  // Code inputs are standardized per channel with statistics of the
  // codebooks (identity until set). Raw VQ entries are small next to the
  // audio tokens, which leaves the trunk blind to past codes for many epochs.
  void set_code_statistics(const Mat& body_entries, const Mat& hand_entries);
  // Audio-encoder batch norms use running statistics while training.
  void set_frozen_stats(bool frozen) { audio_.set_frozen_stats(frozen); }
  const ArConfig& config() const { return cfg_; }

  // Single-step logits over a window of concatenated (zb, zh, audio) tokens,
  // used by sampling. hand_step takes the freshly drawn body code as zb_t
  // (ignored without cross-conditioning).
  RowVec body_step(const Mat& window_input, int pos, int speaker) const;
  RowVec hand_step(const Mat& window_input, int pos, int speaker, const RowVec& current_body_code) const;

 private:
  struct Forward {
    SeqBatch body_logits;
    SeqBatch hand_logits;
  };
  struct Cache {
    nn::TemporalEncoder::Cache audio;
    GatedTrunk::Cache trunk_body;
    GatedTrunk::Cache trunk_hand;
    Head::Cache body_head;
    Head::Cache hand_head;
    int audio_steps = 0;
  };
  // Trunk and heads only; the audio is already encoded.
  Forward forward_tokens(const SeqBatch& audio, const SeqBatch& zb, const SeqBatch& zh,
                         const std::vector<int>& speakers, Cache* cache) const;
  void check_speakers(const std::vector<int>& speakers) const;
  // which: 0 body, 1 hand.
  Mat normalize_codes(const Mat& codes, int which) const;
  Mat normalize_window(const Mat& window_input) const;

  ArConfig cfg_;
  nn::TemporalEncoder audio_;
  GatedTrunk trunk_body_;
  GatedTrunk trunk_hand_;
  Head body_head_;
  Head hand_head_;
  nn::Param code_norm_;  // rows: body mean, body 1/std, hand mean, hand 1/std
};

Mat log_softmax_rows(const Mat& logits);
Mat softmax_rows(const Mat& logits);

// Sum over steps of log p(body_t) + log p(hand_t), teacher-forced with the
// codebook entries of `idx`.
double joint_log_prob(const ArModel& model, const IndexPairSequence& idx, const Mat& audio_tokens, int speaker,
                      const Mat& body_entries, const Mat& hand_entries);

struct ArExample {
  std::string id;
  Mat mfcc;  // frames x audio_dim, frames = 4 * steps
  IndexPairSequence tokens;
  int speaker = 0;
};

struct ArTrainHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 128;
  int epochs = 100;
  uint64_t seed = 1;
};

struct ArEpochLog {
  int epoch = 0;
  double train_perplexity = 0.0;  // per token, from the training loss
  double val_perplexity = 0.0;    // per token, evaluation mode
};

struct ArTrainResult {
  ArModel model;  // parameters of the epoch with the lowest validation perplexity
  std::vector<ArEpochLog> log;
  int best_epoch = 0;
};

// Per-token perplexity exp(-sum log p / (2 * steps)) over a set.
double perplexity(const ArModel& model, const std::vector<ArExample>& set, const Mat& body_entries,
                  const Mat& hand_entries);

ArTrainResult ar_train(ArModel model, const std::vector<ArExample>& train, const std::vector<ArExample>& val,
                       const Mat& body_entries, const Mat& hand_entries, const ArTrainHyper& hyper);

struct SampleOptions {
  double temperature = 1.0;
  bool greedy = false;  // argmax instead of sampling
  uint64_t seed = 1;
};

// Autoregressive sampling over MFCC frames (a multiple of 4). Each step
// runs the model on a window of at most 22 tokens that ends no earlier than
// the current step, matching the training window.
IndexPairSequence ar_sample(const ArModel& model, const Mat& mfcc, int speaker, const Mat& body_entries,
                            const Mat& hand_entries, const SampleOptions& opt);

}  // namespace holo::ar
