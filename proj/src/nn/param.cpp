#include "holo/nn/param.hpp"

#include <cmath>

namespace holo::nn {

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

Eigen::Index parameter_count(const ParamList& params) {
  Eigen::Index n = 0;
  for (const Param* p : params) n += p->size();
  return n;
}

double grad_norm(const ParamList& params) {
  double s = 0.0;
  for (const Param* p : params) s += p->grad.squaredNorm();
  return std::sqrt(s);
}

std::vector<double> flatten_values(const ParamList& params) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(parameter_count(params)));
  for (const Param* p : params) flat.insert(flat.end(), p->value.data(), p->value.data() + p->value.size());
  return flat;
}

void assign_values(const ParamList& params, const std::vector<double>& flat) {
  require(static_cast<Eigen::Index>(flat.size()) == parameter_count(params),
          "assign_values: expected " + std::to_string(parameter_count(params)) + " values, got " +
              std::to_string(flat.size()));
  size_t offset = 0;
  for (Param* p : params) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + p->value.size()), p->value.data());
    offset += static_cast<size_t>(p->value.size());
  }
}

}  // namespace holo::nn
