#include "holo/metrics/metrics.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace holo::metrics {

namespace {

void check_pair(const Mat& pred, const Mat& gt, const char* what) {
  require(pred.rows() == gt.rows(), std::string(what) + ": length mismatch (" + std::to_string(pred.rows()) +
                                        " vs " + std::to_string(gt.rows()) + " frames)");
  require(pred.cols() == gt.cols(), std::string(what) + ": dimension mismatch");
  require(pred.rows() > 0, std::string(what) + ": empty sequence");
}

}  // namespace

double l2_landmark_stream(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt, "l2_landmark");
  return (pred - gt).rowwise().norm().mean();
}

double lvd_stream(const Mat& pred, const Mat& gt) {
  check_pair(pred, gt, "lvd");
  require(pred.rows() >= 2, "lvd: at least 2 frames are required");
  const Eigen::Index n = pred.rows() - 1;
  const Mat vp = pred.bottomRows(n) - pred.topRows(n);
  const Mat vg = gt.bottomRows(n) - gt.topRows(n);
  return (vp - vg).rowwise().norm().mean();
}

double l2_landmark(const Mat& pred_face, const Mat& gt_face, const face::LandmarkProxy& proxy) {
  check_pair(pred_face, gt_face, "l2_landmark");
  return l2_landmark_stream(proxy.apply(pred_face), proxy.apply(gt_face));
}

double lvd(const Mat& pred_face, const Mat& gt_face, const face::LandmarkProxy& proxy) {
  check_pair(pred_face, gt_face, "lvd");
  return lvd_stream(proxy.apply(pred_face), proxy.apply(gt_face));
}

double variation(const std::vector<Mat>& motions) {
  require(!motions.empty(), "variation: empty list");
  double total = 0.0;
  for (const Mat& m : motions) {
    require(m.rows() > 0 && m.cols() > 0, "variation: empty sequence");
    const Mat centered = m.rowwise() - m.colwise().mean();
    total += centered.colwise().squaredNorm().mean() / static_cast<double>(m.rows());
  }
  return total / static_cast<double>(motions.size());
}

double cross_sample_variation(const std::vector<Mat>& samples) {
  require(!samples.empty(), "cross_sample_variation: empty list");
  // Deviations from the first sample keep identical inputs at exactly zero.
  const Mat& ref = samples.front();
  Mat mean = Mat::Zero(ref.rows(), ref.cols());
  for (const Mat& s : samples) {
    require(s.rows() == mean.rows() && s.cols() == mean.cols(), "cross_sample_variation: samples differ in shape");
    mean += s - ref;
  }
  mean /= static_cast<double>(samples.size());
  double total = 0.0;
  for (const Mat& s : samples) total += (s - ref - mean).squaredNorm();
  return total / (static_cast<double>(samples.size()) * static_cast<double>(mean.size()));
}

std::string MetricReport::to_text() const {
  std::string out;
  auto put = [&out](const char* key, const std::optional<double>& v) {
    if (v) out += fmt::format("{}: {:.9g}\n", key, *v);
  };
  put("l2", l2);
  put("lvd", lvd);
  put("rs", rs);
  put("variation", variation);
  put("re", re);
  out += fmt::format("n_samples: {}\n", n_samples);
  if (!config_hash.empty()) out += "config_hash: " + config_hash + "\n";
  if (!sample_set.empty()) out += "sample_set: " + sample_set + "\n";
  return out;
}

std::string MetricReport::csv_header() { return "l2,lvd,rs,variation,re,n_samples,config_hash,sample_set"; }

std::string MetricReport::csv_row() const {
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.9g}", *v) : std::string(); };
  return fmt::format("{},{},{},{},{},{},{},{}", cell(l2), cell(lvd), cell(rs), cell(variation), cell(re), n_samples,
                     config_hash, sample_set);
}

void validate(const MetricReport& r) {
  for (const auto& [name, v] : {std::pair{"l2", r.l2}, std::pair{"lvd", r.lvd}, std::pair{"rs", r.rs},
                                std::pair{"variation", r.variation}, std::pair{"re", r.re}}) {
    if (v) require(std::isfinite(*v) && *v >= 0.0, std::string("metric report: ") + name + " must be finite and >= 0");
  }
  require(r.n_samples >= 0, "metric report: negative sample count");
}

MetricReport parse_metric_report(const std::string& text) {
  MetricReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 2);
    if (key == "l2") r.l2 = std::stod(value);
    else if (key == "lvd") r.lvd = std::stod(value);
    else if (key == "rs") r.rs = std::stod(value);
    else if (key == "variation") r.variation = std::stod(value);
    else if (key == "re") r.re = std::stod(value);
    else if (key == "n_samples") r.n_samples = std::stoi(value);
    else if (key == "config_hash") r.config_hash = value;
    else if (key == "sample_set") r.sample_set = value;
  }
  return r;
}

}  // namespace holo::metrics
