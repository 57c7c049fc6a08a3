#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "holo/audio/waveform.hpp"
#include "holo/tensor.hpp"

namespace holo::motion {

inline constexpr int kJawDim = 3;
inline constexpr int kExpressionDim = 100;
inline constexpr int kFaceDim = kJawDim + kExpressionDim;  // 103
inline constexpr int kBodyDim = 63;
inline constexpr int kHandDim = 90;
inline constexpr int kBodyHandDim = kBodyDim + kHandDim;  // 153
inline constexpr double kFps = 30.0;

enum class Part { kBody, kHand, kJoint };
std::string to_string(Part p);
Part part_from_string(const std::string& s);
int part_dim(Part p);

// Per-frame holistic motion: face (jaw + expression), body pose, hand pose.
struct MotionSequence {
  MatF face;  // T x 103
  MatF body;  // T x 63
  MatF hand;  // T x 90
  double fps = kFps;

  int steps() const { return static_cast<int>(face.rows()); }
  static MotionSequence zeros(int steps);
  // Body and hand columns side by side (T x 153), in double precision.
  Mat body_hand() const;
};

void validate(const MotionSequence& m);

struct SpeakerId {
  int index = 0;
  int count = 1;

  Vec one_hot() const;
};

void validate(const SpeakerId& s);

struct Sample {
  audio::Waveform waveform;
  MotionSequence motion;
  SpeakerId speaker;
  std::string id;
  // Ground-truth per-frame amplitude envelope of the normalized waveform
  // (synthetic corpora only).
  Vec envelope;
};

// HMOTION1 with parts face/body/hand, float32.
void write_motion(const MotionSequence& m, const std::filesystem::path& path, std::optional<int> speaker = std::nullopt);
MotionSequence read_motion(const std::filesystem::path& path, std::optional<int>* speaker = nullptr);

// Truncates waveform and motion to a common frame count.
void equalize_lengths(Sample& s);

}  // namespace holo::motion
