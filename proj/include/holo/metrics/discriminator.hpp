#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/nn/layers.hpp"

namespace holo::metrics {

struct DiscriminatorConfig {
  int in_dim = 153;  // body + hand
  int hidden = 32;
  uint64_t seed = 1;
};

// Two temporal convolutions (k3) with leaky ReLU, mean pooling over time and
// a linear read-out; the output is P(real) = sigmoid(logit).
class Discriminator {
 public:
  struct Cache {
    nn::Conv1d::Cache conv0, conv1;
    nn::ActCache act0, act1;
    nn::Linear::Cache out;
    int steps = 0;
  };

  Discriminator() = default;
  explicit Discriminator(const DiscriminatorConfig& cfg);

  double logit(const Mat& seq) const;
  double prob_real(const Mat& seq) const;
  double logit(const Mat& seq, Cache& cache) const;
  void backward(double d_logit, const Cache& cache);

  void zero_weights();
  nn::ParamList params();
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  nn::Conv1d conv0_, conv1_;
  nn::Linear out_;
};

struct DiscTrainHyper {
  double lr = 1e-3;
  int epochs = 20;
  int batch_size = 8;
  double test_fraction = 0.3;
  uint64_t seed = 1;
};

struct DiscTrainResult {
  Discriminator model;
  double heldout_accuracy = 0.0;
  std::vector<size_t> train_real, train_fake, test_real, test_fake;  // indices into the inputs
  std::vector<std::string> warnings;
};

// Binary cross-entropy with Adam; each class is split train/test by the
// seeded shuffle (70/30 by default). Sequences may differ in length.
DiscTrainResult train_discriminator(const std::vector<Mat>& real, const std::vector<Mat>& fake,
                                    const DiscTrainHyper& hyper, const DiscriminatorConfig& cfg = {});

// Mean P(real) over the generated sequences.
double realism_score(const std::vector<Mat>& generated, const Discriminator& d);

}  // namespace holo::metrics
