#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/motion/corpus.hpp"
#include "holo/nn/blocks.hpp"
#include "holo/vq/codebook.hpp"

namespace holo::vq {

inline constexpr int kWindowFactor = nn::TemporalEncoder::kDownsample;

struct VqVaeConfig {
  motion::Part part = motion::Part::kBody;
  int hidden = 64;
  int codebook_size = 256;
  uint64_t seed = 1;
  bool zero_final_layer = false;
};

// Loss terms of one batch and the gradients they route.
struct VqLoss {
  double total = 0.0;
  double recon = 0.0;       // mean squared motion error
  double codebook = 0.0;    // mean ||sg[E] - Z||^2 per element
  double commitment = 0.0;  // beta * mean ||E - sg[Z]||^2 per element
  Mat d_recon;              // dL/d m_hat
  Mat d_codes;              // dL/dZ from the codebook term only
  Mat d_latents;            // dL/dE from the commitment term only
};

// m/m_hat: frames x D, latents/codes: steps x 64. The straight-through copy of
// the decoder-input gradient onto E is done by the caller.
VqLoss vq_loss(const Mat& m, const Mat& m_hat, const Mat& latents, const Mat& codes, double beta = 0.25);

// Encoder, codebook and decoder for one part (body, hand, or the joint
// 153-dim baseline).
class VqVae {
 public:
  struct StepResult {
    VqLoss loss;
    std::vector<int> indices;
  };

  VqVae() = default;
  explicit VqVae(const VqVaeConfig& cfg);

  Mat encode(const Mat& motion) const;  // T x D -> T/4 x 64
  QuantizedSequence quantize(const Mat& latents) const;
  Mat decode(const QuantizedSequence& q) const;  // tau x 64 -> 4 tau x D
  Mat reconstruct(const Mat& motion) const;
  std::vector<int> tokenize(const Mat& motion) const;

  // Training-mode forward and backward over a batch of equal-length
  // windows. Accumulates gradients; the optimizer step is separate.
  StepResult train_step(const SeqBatch& motion, double beta);

  Codebook codebook() const;
  const Mat& codebook_entries() const { return codebook_.value; }
  nn::ParamList params();
  nn::ParamList buffers();
  nn::TemporalEncoder& encoder() { return encoder_; }
  nn::TemporalDecoder& decoder() { return decoder_; }
  const VqVaeConfig& config() const { return cfg_; }
  int io_dim() const;

 private:
  VqVaeConfig cfg_;
  nn::TemporalEncoder encoder_;
  nn::TemporalDecoder decoder_;
  nn::Param codebook_;
};

struct VqTrainHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double beta = 0.25;  // commitment weight
  int batch_size = 128;
  int epochs = 100;
  uint64_t seed = 1;
};

struct VqEpochLog {
  int epoch = 0;
  double loss = 0.0;       // mean training objective
  double train_re = 0.0;   // running reconstruction error while training
  double re = 0.0;         // evaluation-mode RE on the monitor set
  double top_usage = 0.0;  // share of training tokens on the most used entry
  int used_entries = 0;
  bool collapse = false;   // top_usage > 0.9
};

struct VqTrainResult {
  VqVae model;
  std::vector<VqEpochLog> log;
  std::vector<std::string> warnings;
};

// Windows are length x D motion slices with length divisible by 4. RE is
// monitored on `monitor` (the training windows when empty).
VqTrainResult train_vqvae(VqVae model, const std::vector<Mat>& windows, const VqTrainHyper& hyper,
                          const std::vector<Mat>& monitor = {});

// Mean per-frame, per-dim squared error.
double reconstruction_error(const std::vector<Mat>& pred, const std::vector<Mat>& gt);
double reconstruction_error(const VqVae& model, const std::vector<Mat>& windows);
// Pooled RE of separate body and hand models over the 153 joint dims.
double compositional_reconstruction_error(const VqVae& body, const VqVae& hand, const std::vector<Mat>& body_windows,
                                          const std::vector<Mat>& hand_windows);

// The part slice of a window (joint = body ++ hand).
Mat window_part(const motion::Window& w, motion::Part part);
std::vector<Mat> window_parts(const std::vector<motion::Window>& ws, motion::Part part);

}  // namespace holo::vq
