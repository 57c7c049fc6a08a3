#pragma once

#include <string>

#include "holo/nn/param.hpp"
#include "holo/random.hpp"
#include "holo/tensor.hpp"

// Layer primitives with hand-written backward passes.
//
// Each layer offers
//   forward(x) const            inference; no state touched
//   forward(x, cache)           training; records what backward needs
//   backward(dy, cache)         accumulates parameter gradients, returns dx
// Layers are not thread-safe while training; const inference is.
namespace holo::nn {

inline constexpr double kLeakySlope = 0.2;

// Pointwise affine map over channels: y = x W^T + b, W is out x in.
class Linear {
 public:
  struct Cache {
    Mat input;
  };

  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng, bool bias = true);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad = true);

  void collect(ParamList& out);
  int in_features() const { return static_cast<int>(weight.value.cols()); }
  int out_features() const { return static_cast<int>(weight.value.rows()); }

  Param weight;
  Param bias;
  bool has_bias = true;
};

// 1-D convolution over time. Weight is out x (kernel * in) with column
// index tap * in + channel; tap j of output step t reads input step
// t * stride + j - pad_left (zero outside [0, steps)).
class Conv1d {
 public:
  struct Options {
    int in = 1;
    int out = 1;
    int kernel = 3;
    int stride = 1;
    int pad_left = 1;
    int pad_right = 1;
    bool bias = true;
  };
  struct Cache {
    Mat cols;
    int batch = 0;
    int in_steps = 0;
  };

  Conv1d() = default;
  Conv1d(const std::string& name, const Options& opt, Rng& rng);

  int output_steps(int in_steps) const;
  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad = true);

  // mask has the weight's shape; zero entries are removed structurally.
  void set_mask(const Mat& mask);
  void collect(ParamList& out);
  const Options& options() const { return opt_; }

  Param weight;
  Param bias;

 private:
  Mat im2col(const SeqBatch& x, int out_steps) const;
  Options opt_;
};

// Transposed 1-D convolution (the adjoint of Conv1d's input map). Output
// length is (steps - 1) * stride - 2 * pad + kernel. Weight is in x (kernel * out).
class ConvTranspose1d {
 public:
  struct Options {
    int in = 1;
    int out = 1;
    int kernel = 4;
    int stride = 2;
    int pad = 1;
  };
  struct Cache {
    Mat input;
    int batch = 0;
    int in_steps = 0;
  };

  ConvTranspose1d() = default;
  ConvTranspose1d(const std::string& name, const Options& opt, Rng& rng);

  int output_steps(int in_steps) const;
  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dy, const Cache& cache, bool need_input_grad = true);
  void collect(ParamList& out);

  Param weight;
  Param bias;

 private:
  Options opt_;
};

// Normalizes each frame over its channels.
class LayerNorm {
 public:
  struct Cache {
    Mat normalized;
    Vec inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int channels, double eps = 1e-5);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache) const;
  SeqBatch backward(const SeqBatch& dy, const Cache& cache);
  void collect(ParamList& out);

  Param gain;
  Param bias;

 private:
  double eps_ = 1e-5;
};

// Normalizes each channel over all frames of the batch while training;
// inference uses running statistics.
class BatchNorm1d {
 public:
  struct Cache {
    Mat normalized;
    RowVec inv_std;
    bool frozen = false;
  };

  BatchNorm1d() = default;
  BatchNorm1d(const std::string& name, int channels, double momentum = 0.1, double eps = 1e-5);

  SeqBatch forward(const SeqBatch& x) const;
  SeqBatch forward(const SeqBatch& x, Cache& cache);
  SeqBatch backward(const SeqBatch& dy, const Cache& cache);
  void collect(ParamList& out);
  // Running statistics are serialized with the parameters but never trained.
  void collect_buffers(ParamList& out);

  Param gain;
  Param bias;
  Param running_mean;
  Param running_var;
  // When set, the training forward normalizes with the running statistics
  // (treated as constants) and leaves them untouched.
  bool frozen_stats = false;

 private:
  double momentum_ = 0.1;
  double eps_ = 1e-5;
};

struct ActCache {
  Mat input;
};

SeqBatch leaky_relu(const SeqBatch& x, double slope = kLeakySlope);
SeqBatch leaky_relu(const SeqBatch& x, ActCache& cache, double slope = kLeakySlope);
SeqBatch leaky_relu_backward(const SeqBatch& dy, const ActCache& cache, double slope = kLeakySlope);

}  // namespace holo::nn
