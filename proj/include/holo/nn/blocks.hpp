#pragma once

#include <array>
#include <string>

#include "holo/nn/layers.hpp"

namespace holo::nn {

// conv(k3, s1, p1) -> batch norm -> leaky ReLU, with an identity skip
// around three such units.
class ResidualBlock {
 public:
  struct Unit {
    Conv1d::Cache conv;
    BatchNorm1d::Cache norm;
    ActCache act;
  };
  struct Cache {
    std::array<Unit, 3> units;
  };

  ResidualBlock() = default;
  ResidualBlock(const std::string& name, int channels, Rng& rng);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache);
  SeqBatch backward(const SeqBatch& dy, const Cache& cache);
  void collect(ParamList& out);
  void collect_buffers(ParamList& out);
  void set_frozen_stats(bool frozen);

 private:
  std::array<Conv1d, 3> convs_;
  std::array<BatchNorm1d, 3> norms_;
};

struct TemporalCodecConfig {
  int io_dim = 63;      // motion/audio channels on the outside
  int hidden = 64;      // working channels
  int latent_dim = 64;  // code dimension
};

// Three residual blocks with a stride-2 convolution (k4, s2, p1) after the
// first two: T input frames become T/4 latent steps.
class TemporalEncoder {
 public:
  static constexpr int kDownsample = 4;

  struct Cache {
    Conv1d::Cache stem;
    ActCache stem_act;
    std::array<ResidualBlock::Cache, 3> res;
    std::array<Conv1d::Cache, 2> down;
    std::array<ActCache, 2> down_act;
    Linear::Cache proj;
  };

  TemporalEncoder() = default;
  TemporalEncoder(const std::string& name, const TemporalCodecConfig& cfg, Rng& rng);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache);
  // Returns the input gradient only when need_input_grad is set.
  SeqBatch backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad = false);
  void collect(ParamList& out);
  void collect_buffers(ParamList& out);
  // Batch norms use running statistics in the training forward as well.
  void set_frozen_stats(bool frozen);
  const TemporalCodecConfig& config() const { return cfg_; }

 private:
  TemporalCodecConfig cfg_;
  Conv1d stem_;
  std::array<ResidualBlock, 3> res_;
  std::array<Conv1d, 2> down_;
  Linear proj_;
};

// Mirror of TemporalEncoder: latent steps are upsampled x4 by two
// transposed convolutions (k4, s2, p1).
class TemporalDecoder {
 public:
  struct Cache {
    Linear::Cache proj;
    ActCache proj_act;
    std::array<ResidualBlock::Cache, 3> res;
    std::array<ConvTranspose1d::Cache, 2> up;
    std::array<ActCache, 2> up_act;
    Conv1d::Cache out;
  };

  TemporalDecoder() = default;
  TemporalDecoder(const std::string& name, const TemporalCodecConfig& cfg, Rng& rng);

  SeqBatch forward(const SeqBatch& z) const;
  SeqBatch forward(const SeqBatch& z, Cache& cache);
  SeqBatch backward(const SeqBatch& dy, const Cache& cache);
  void collect(ParamList& out);
  void collect_buffers(ParamList& out);
  void zero_output_layer();

 private:
  TemporalCodecConfig cfg_;
  Linear proj_;
  std::array<ResidualBlock, 3> res_;
  std::array<ConvTranspose1d, 2> up_;
  Conv1d out_;
};

}  // namespace holo::nn
