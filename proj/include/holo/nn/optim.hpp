#pragma once

#include <vector>

#include "holo/nn/param.hpp"

namespace holo::nn {

// Re-zero masked weight entries (after loading or an update).
void apply_masks(const ParamList& params);

// SGD with classical momentum: v <- mu v + g; w <- w - lr v.
class SgdMomentum {
 public:
  SgdMomentum(ParamList params, double lr, double momentum);
  void step();
  void zero_grad() { zero_grads(params_); }
  const ParamList& params() const { return params_; }

 private:
  ParamList params_;
  double lr_;
  double momentum_;
  std::vector<Mat> velocity_;
};

class Adam {
 public:
  struct Options {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(ParamList params, Options opt);
  void step();
  void zero_grad() { zero_grads(params_); }
  const ParamList& params() const { return params_; }

 private:
  ParamList params_;
  Options opt_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  long step_count_ = 0;
};

}  // namespace holo::nn
