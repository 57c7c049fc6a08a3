#include "holo/nn/optim.hpp"

#include <cmath>

namespace holo::nn {

void apply_masks(const ParamList& params) {
  for (Param* p : params) {
    if (p->mask.size() > 0) p->value = p->value.cwiseProduct(p->mask);
  }
}

SgdMomentum::SgdMomentum(ParamList params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
  for (const Param* p : params_) velocity_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
}

void SgdMomentum::step() {
  if (lr_ == 0.0) return;
  for (size_t i = 0; i < params_.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + params_[i]->grad;
    params_[i]->value -= lr_ * velocity_[i];
  }
  apply_masks(params_);
}

Adam::Adam(ParamList params, Options opt) : params_(std::move(params)), opt_(opt) {
  for (const Param* p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++step_count_;
  if (opt_.lr == 0.0) return;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_count_));
  for (size_t i = 0; i < params_.size(); ++i) {
    const Mat& g = params_[i]->grad;
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseAbs2();
    params_[i]->value.array() -=
        opt_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + opt_.eps);
  }
  apply_masks(params_);
}

}  // namespace holo::nn
