#include "holo/motion/motion.hpp"

#include <cmath>

#include "holo/error.hpp"
#include "holo/motion/container.hpp"

namespace holo::motion {

std::string to_string(Part p) {
  switch (p) {
    case Part::kBody:
      return "body";
    case Part::kHand:
      return "hand";
    case Part::kJoint:
      return "joint";
  }
  return "?";
}

Part part_from_string(const std::string& s) {
  if (s == "body") return Part::kBody;
  if (s == "hand") return Part::kHand;
  if (s == "joint") return Part::kJoint;
  throw ValidationError("unknown part '" + s + "' (expected body, hand or joint)");
}

int part_dim(Part p) {
  switch (p) {
    case Part::kBody:
      return kBodyDim;
    case Part::kHand:
      return kHandDim;
    case Part::kJoint:
      return kBodyHandDim;
  }
  return 0;
}

MotionSequence MotionSequence::zeros(int steps) {
  MotionSequence m;
  m.face = MatF::Zero(steps, kFaceDim);
  m.body = MatF::Zero(steps, kBodyDim);
  m.hand = MatF::Zero(steps, kHandDim);
  return m;
}

Mat MotionSequence::body_hand() const {
  Mat out(steps(), kBodyHandDim);
  out.leftCols(kBodyDim) = body.cast<double>();
  out.rightCols(kHandDim) = hand.cast<double>();
  return out;
}

void validate(const MotionSequence& m) {
  require(m.face.cols() == kFaceDim, "face stream must have 103 columns");
  require(m.body.cols() == kBodyDim, "body stream must have 63 columns");
  require(m.hand.cols() == kHandDim, "hand stream must have 90 columns");
  require(m.face.rows() == m.body.rows() && m.body.rows() == m.hand.rows(),
          "face, body and hand streams must share the frame count");
  require(m.fps > 0, "motion fps must be positive");
  require(m.face.allFinite() && m.body.allFinite() && m.hand.allFinite(), "motion contains non-finite values");
}

Vec SpeakerId::one_hot() const {
  validate(*this);
  Vec v = Vec::Zero(count);
  v(index) = 1.0;
  return v;
}

void validate(const SpeakerId& s) {
  require(s.count >= 1, "speaker count must be at least 1");
  require(s.index >= 0 && s.index < s.count, "speaker index " + std::to_string(s.index) + " out of range [0, " +
                                                 std::to_string(s.count) + ")");
}

void write_motion(const MotionSequence& m, const std::filesystem::path& path, std::optional<int> speaker) {
  validate(m);
  Mat values(m.steps(), kFaceDim + kBodyDim + kHandDim);
  values.leftCols(kFaceDim) = m.face.cast<double>();
  values.middleCols(kFaceDim, kBodyDim) = m.body.cast<double>();
  values.rightCols(kHandDim) = m.hand.cast<double>();
  nlohmann::json extra = {{"fps", m.fps}};
  extra["speaker"] = speaker ? nlohmann::json(*speaker) : nlohmann::json(nullptr);
  write_container(path, {{"face", kFaceDim}, {"body", kBodyDim}, {"hand", kHandDim}}, values, Dtype::kFloat32, extra);
}

MotionSequence read_motion(const std::filesystem::path& path, std::optional<int>* speaker) {
  const Container c = read_container(path);
  if (c.dtype != Dtype::kFloat32) throw FormatError(path.string() + ": motion payload must be float32");
  MotionSequence m;
  m.face = c.part("face").cast<float>();
  m.body = c.part("body").cast<float>();
  m.hand = c.part("hand").cast<float>();
  m.fps = c.header.value("fps", kFps);
  if (speaker != nullptr) {
    const auto it = c.header.find("speaker");
    *speaker = (it != c.header.end() && it->is_number_integer()) ? std::optional<int>(it->get<int>()) : std::nullopt;
  }
  validate(m);
  return m;
}

void equalize_lengths(Sample& s) {
  const auto hop = static_cast<long>(std::lround(s.waveform.sample_rate / s.motion.fps));
  const long audio_frames = static_cast<long>(s.waveform.samples.size()) / hop;
  const long frames = std::min<long>(audio_frames, s.motion.steps());
  if (s.motion.steps() > frames) {
    s.motion.face.conservativeResize(frames, Eigen::NoChange);
    s.motion.body.conservativeResize(frames, Eigen::NoChange);
    s.motion.hand.conservativeResize(frames, Eigen::NoChange);
    if (s.envelope.size() > frames) s.envelope.conservativeResize(frames);
  }
  s.waveform.samples.resize(static_cast<size_t>(frames * hop));
}

}  // namespace holo::motion
