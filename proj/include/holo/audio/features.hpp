#pragma once

#include <string>
#include <vector>

#include "holo/audio/waveform.hpp"
#include "holo/tensor.hpp"

namespace holo::audio {

inline constexpr double kMotionFrameRate = 30.0;

enum class FeatureKind {
  kMfcc64,     // 64 cepstral coefficients per motion frame
  kSpeech256,  // projected speech embedding
  kSpeech768,  // speech backbone output before projection
};

int feature_dim(FeatureKind kind);
std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct AudioFeatureSeq {
  Mat frames;  // steps x dim
  double frame_rate = kMotionFrameRate;
  FeatureKind kind = FeatureKind::kMfcc64;
  // Set by align_to_frames when a single input frame had to be repeated.
  bool replicated = false;

  int steps() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

void validate(const AudioFeatureSeq& f);

struct MfccConfig {
  int num_coeffs = 64;
  int num_filters = 64;
  double window_seconds = 0.025;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist
  double log_floor = 1e-10;
};

// One 64-dim cepstral vector per motion frame: hop = sample_rate / frame_rate,
// a Hamming window of 25 ms centred in each hop, a 64-band mel filterbank and
// an orthonormal DCT-II. Produces floor(duration * frame_rate) frames.
AudioFeatureSeq mfcc(const Waveform& w, double frame_rate = kMotionFrameRate, const MfccConfig& cfg = {});

// Two-tap linear interpolation weights mapping `from` steps onto `to` steps
// with the end points aligned.
struct InterpTap {
  int lo = 0;
  int hi = 0;
  double w_hi = 0.0;
};
std::vector<InterpTap> interpolation_taps(int from, int to);

// Linear time interpolation to exactly `target_steps` frames.
AudioFeatureSeq align_to_frames(const AudioFeatureSeq& f, int target_steps);
// Adjoint of the interpolation, for backpropagating through alignment.
Mat align_backward(const Mat& grad_out, int source_steps);

}  // namespace holo::audio
