#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holo/face/face_generator.hpp"
#include "holo/tensor.hpp"

namespace holo::metrics {

// Landmark-proxy streams (T x 23). Per frame the distance is the Euclidean
// norm over the proxy vector.
double l2_landmark_stream(const Mat& pred, const Mat& gt);
double lvd_stream(const Mat& pred, const Mat& gt);

// Face streams (T x 103), mapped through the landmark proxy first.
double l2_landmark(const Mat& pred_face, const Mat& gt_face,
                   const face::LandmarkProxy& proxy = face::default_landmark_proxy());
double lvd(const Mat& pred_face, const Mat& gt_face, const face::LandmarkProxy& proxy = face::default_landmark_proxy());

// Temporal population variance per dimension, averaged over dimensions and
// then over sequences.
double variation(const std::vector<Mat>& motions);
// Variance across samples (e.g. sampling seeds) per frame and dimension,
// averaged; samples must share shape. Zero iff all samples are identical.
double cross_sample_variation(const std::vector<Mat>& samples);

struct MetricReport {
  std::optional<double> l2;
  std::optional<double> lvd;
  std::optional<double> rs;
  std::optional<double> variation;
  std::optional<double> re;
  int n_samples = 0;
  std::string config_hash;
  std::string sample_set;  // which samples were evaluated

  // key: value lines; absent values are omitted.
  std::string to_text() const;
  static std::string csv_header();
  std::string csv_row() const;
};

void validate(const MetricReport& r);
MetricReport parse_metric_report(const std::string& text);

}  // namespace holo::metrics
