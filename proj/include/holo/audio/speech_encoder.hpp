#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>

#include "holo/audio/features.hpp"
#include "holo/nn/layers.hpp"

namespace holo::audio {

// Source of 256-dim speech embeddings.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual AudioFeatureSeq embed(const Waveform& w) const = 0;
};

struct SpeechEncoderConfig {
  uint64_t seed = 0x5eedULL;
  std::array<int, 4> channels{16, 32, 64, 128};
  std::array<int, 4> strides{5, 4, 4, 4};
  int backbone_dim = 768;
  int embed_dim = 256;
};

// Bundled convolutional stand-in for a pretrained speech model: four
// strided convolutions (kernel = 2 * stride) and two channel-mixing layers
// produce 768-dim frames at sample_rate / 320 Hz; a linear map reduces
// them to 256. Weights are a deterministic function of the seed.
class FallbackSpeechEncoder : public EmbeddingProvider {
 public:
  struct Cache {
    std::array<nn::Conv1d::Cache, 4> convs;
    std::array<nn::ActCache, 4> conv_acts;
    nn::Conv1d::Cache mix0;
    nn::ActCache mix0_act;
    nn::Linear::Cache mix1;
    nn::ActCache mix1_act;
  };

  explicit FallbackSpeechEncoder(const SpeechEncoderConfig& cfg = {});

  std::string name() const override { return "fallback"; }
  AudioFeatureSeq embed(const Waveform& w) const override;

  // 768-dim backbone frames at the native rate.
  AudioFeatureSeq backbone(const Waveform& w) const;
  SeqBatch backbone_forward(const SeqBatch& samples, Cache& cache);
  // Accumulates backbone gradients; the waveform gradient is discarded.
  void backbone_backward(const SeqBatch& dy, const Cache& cache);

  double native_rate(int sample_rate) const;
  int total_stride() const;
  // Inclusive sample range that backbone frame `frame` depends on (may extend
  // outside the signal, where zero padding is read).
  std::pair<long, long> receptive_field(int frame) const;

  const SpeechEncoderConfig& config() const { return cfg_; }
  nn::Linear& projection() { return projection_; }
  void collect_backbone(nn::ParamList& out);

 private:
  SpeechEncoderConfig cfg_;
  std::array<nn::Conv1d, 4> convs_;
  nn::Conv1d mix0_;
  nn::Linear mix1_;
  nn::Linear projection_;
};

// Reads precomputed embeddings (a container file with part tag "audio")
// in place of a pretrained model that cannot be bundled. Fails loudly when
// the dump is missing; it never substitutes the fallback on its own.
class ExternalEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit ExternalEmbeddingProvider(std::filesystem::path dump) : dump_(std::move(dump)) {}
  std::string name() const override { return "external"; }
  AudioFeatureSeq embed(const Waveform& w) const override;

 private:
  std::filesystem::path dump_;
};

AudioFeatureSeq speech_embedding(const Waveform& w, const EmbeddingProvider& backend);

}  // namespace holo::audio
