#pragma once

#include <string>
#include <vector>

#include "holo/tensor.hpp"

namespace holo::nn {

struct Param {
  std::string name;
  Mat value;
  Mat grad;
  // Structural mask; when non-empty, entries with mask 0 are held at zero
  // and never receive gradient.
  Mat mask;

  Param() = default;
  Param(std::string n, Mat v) : name(std::move(n)), value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())) {}

  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(); }
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);
Eigen::Index parameter_count(const ParamList& params);
double grad_norm(const ParamList& params);

// Flat copy of all values in collection order; used for snapshots and
// checkpoint payloads.
std::vector<double> flatten_values(const ParamList& params);
void assign_values(const ParamList& params, const std::vector<double>& flat);

}  // namespace holo::nn
