#include <cmath>
#include <cstdio>
#include <sstream>

#include "holo/error.hpp"
#include "holo/face/face_generator.hpp"
#include "holo/motion/motion.hpp"
#include "holo/random.hpp"

namespace holo::face {

namespace detail {
extern const char* const kLandmarkProxyCsv;
}

Mat LandmarkProxy::apply(const Mat& face) const {
  require(face.cols() == map.cols(), "landmark proxy expects " + std::to_string(map.cols()) + "-dim faces, got " +
                                         std::to_string(face.cols()));
  return face * map.transpose();
}

LandmarkProxy generate_landmark_proxy(uint64_t seed) {
  LandmarkProxy p;
  p.map = Mat::Zero(kLandmarkCount, motion::kFaceDim);
  for (int j = 0; j < motion::kJawDim; ++j) p.map(j, j) = 1.0;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(motion::kExpressionDim));
  for (int r = motion::kJawDim; r < kLandmarkCount; ++r) {
    for (int c = motion::kJawDim; c < motion::kFaceDim; ++c) p.map(r, c) = scale * rng.normal();
  }
  return p;
}

std::string format_landmark_proxy(const LandmarkProxy& p) {
  std::string out;
  char buf[40];
  for (Eigen::Index r = 0; r < p.map.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.map.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.map(r, c));
      if (c > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

LandmarkProxy parse_landmark_proxy(const std::string& csv) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    rows.push_back(std::move(row));
  }
  if (rows.size() != static_cast<size_t>(kLandmarkCount)) {
    throw FormatError("landmark proxy CSV must have 23 rows, found " + std::to_string(rows.size()));
  }
  LandmarkProxy p;
  p.map.resize(kLandmarkCount, motion::kFaceDim);
  for (int r = 0; r < kLandmarkCount; ++r) {
    if (rows[static_cast<size_t>(r)].size() != static_cast<size_t>(motion::kFaceDim)) {
      throw FormatError("landmark proxy CSV row " + std::to_string(r) + " must have 103 values");
    }
    for (int c = 0; c < motion::kFaceDim; ++c) p.map(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return p;
}

const LandmarkProxy& default_landmark_proxy() {
  static const LandmarkProxy proxy = parse_landmark_proxy(detail::kLandmarkProxyCsv);
  return proxy;
}

Mat landmark_proxy(const Mat& face) { return default_landmark_proxy().apply(face); }

}  // namespace holo::face
