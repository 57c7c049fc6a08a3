#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "holo/nn/param.hpp"
#include "holo/random.hpp"

namespace holo::testing {

inline constexpr double kGradFloor = 1e-5;

struct GradCheck {
  std::string worst_param;
  double worst_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  int checked = 0;
};

// Compares the gradients already stored in `params` against central
// differences of `loss`. The gradients are copied first, so `loss` may
// itself accumulate into them. At most `per_param` entries of each tensor
// are probed; masked entries are skipped.
inline GradCheck check_gradients(const nn::ParamList& params, const std::function<double()>& loss, int per_param = 12,
                                 double h = 1e-5, uint64_t seed = 7) {
  Rng rng(seed);
  GradCheck out;
  std::vector<Mat> analytic_grads;
  for (nn::Param* p : params) analytic_grads.push_back(p->grad);
  const double floor = kGradFloor * std::max(1.0, std::abs(loss()));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    nn::Param* p = params[pi];
    const Eigen::Index n = p->size();
    if (n == 0) continue;
    std::vector<Eigen::Index> probe;
    if (n <= per_param) {
      for (Eigen::Index i = 0; i < n; ++i) probe.push_back(i);
    } else {
      for (int k = 0; k < per_param; ++k) probe.push_back(rng.index(static_cast<int>(n)));
    }
    double diff = 0.0, an = 0.0, nu = 0.0;
    for (Eigen::Index i : probe) {
      if (p->mask.size() > 0 && p->mask.data()[i] == 0.0) continue;
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = analytic_grads[pi].data()[i];
      diff += (analytic - numeric) * (analytic - numeric);
      an += analytic * analytic;
      nu += numeric * numeric;
      ++out.checked;
    }
    // Floor the scale: gradients that vanish by construction (a bias ahead
    // of batch norm) leave only rounding noise, which grows with the loss.
    const double err = std::sqrt(diff) / std::max({std::sqrt(an), std::sqrt(nu), floor});
    if (err > out.worst_error) {
      out.worst_error = err;
      out.worst_param = p->name;
    }
  }
  return out;
}

// Central differences of `loss` with respect to entries of a plain matrix.
inline double check_input_gradient(Mat& x, const Mat& analytic, const std::function<double()>& loss, double h = 1e-5) {
  double diff = 0.0, an = 0.0, nu = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double& v = x.data()[i];
    const double saved = v;
    v = saved + h;
    const double up = loss();
    v = saved - h;
    const double down = loss();
    v = saved;
    const double numeric = (up - down) / (2.0 * h);
    diff += (analytic.data()[i] - numeric) * (analytic.data()[i] - numeric);
    an += analytic.data()[i] * analytic.data()[i];
    nu += numeric * numeric;
  }
  const double scale = std::max(std::sqrt(an), std::sqrt(nu));
  return scale < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

inline Mat random_mat(int rows, int cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

}  // namespace holo::testing
