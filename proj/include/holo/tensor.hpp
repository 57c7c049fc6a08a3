#pragma once

#include <Eigen/Dense>

#include "holo/error.hpp"

namespace holo {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A batch of equal-length sequences stored as a (batch * steps) x channels
// matrix; frame t of sequence b lives in row b * steps + t.
struct SeqBatch {
  Mat data;
  int batch = 0;
  int steps = 0;

  SeqBatch() = default;
  SeqBatch(int b, int t, int c) : data(Mat::Zero(static_cast<Eigen::Index>(b) * t, c)), batch(b), steps(t) {}
  SeqBatch(Mat m, int b, int t) : data(std::move(m)), batch(b), steps(t) {
    require(data.rows() == static_cast<Eigen::Index>(b) * t, "SeqBatch: row count must equal batch * steps");
  }

  static SeqBatch single(Mat m) {
    const int t = static_cast<int>(m.rows());
    return SeqBatch(std::move(m), 1, t);
  }

  int channels() const { return static_cast<int>(data.cols()); }
  Eigen::Index row(int b, int t) const { return static_cast<Eigen::Index>(b) * steps + t; }

  // Rows of sequence b as a view.
  auto sequence(int b) { return data.middleRows(static_cast<Eigen::Index>(b) * steps, steps); }
  auto sequence(int b) const { return data.middleRows(static_cast<Eigen::Index>(b) * steps, steps); }
};

// Concatenate along channels; all inputs must share batch and steps.
SeqBatch concat_channels(std::initializer_list<const SeqBatch*> parts);

bool all_finite(const Mat& m);

}  // namespace holo
