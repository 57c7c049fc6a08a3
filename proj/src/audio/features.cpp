#include "holo/audio/features.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "holo/error.hpp"

namespace holo::audio {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Mat mel_filterbank(int num_filters, int fft_size, int sample_rate, double low_hz, double high_hz) {
  const int bins = fft_size / 2 + 1;
  Mat fb = Mat::Zero(num_filters, bins);
  const double mel_lo = hz_to_mel(low_hz);
  const double mel_hi = hz_to_mel(high_hz);
  std::vector<double> edges(static_cast<size_t>(num_filters) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (num_filters + 1));
  }
  for (int m = 0; m < num_filters; ++m) {
    const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      const double w = std::min((f - l) / (c - l), (r - f) / (r - c));
      if (w > 0) fb(m, k) = w;
    }
  }
  return fb;
}

Mat dct_matrix(int num_coeffs, int num_filters) {
  Mat d(num_coeffs, num_filters);
  for (int k = 0; k < num_coeffs; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / num_filters);
    for (int m = 0; m < num_filters; ++m) {
      d(k, m) = scale * std::cos(std::numbers::pi * k * (m + 0.5) / num_filters);
    }
  }
  return d;
}

}  // namespace

int feature_dim(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc64:
      return 64;
    case FeatureKind::kSpeech256:
      return 256;
    case FeatureKind::kSpeech768:
      return 768;
  }
  return 0;
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMfcc64:
      return "mfcc64";
    case FeatureKind::kSpeech256:
      return "speech256";
    case FeatureKind::kSpeech768:
      return "speech768";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "mfcc64" || s == "mfcc") return FeatureKind::kMfcc64;
  if (s == "speech256" || s == "speech") return FeatureKind::kSpeech256;
  if (s == "speech768") return FeatureKind::kSpeech768;
  throw ValidationError("unknown feature kind '" + s + "' (expected mfcc64, speech256 or speech768)");
}

void validate(const AudioFeatureSeq& f) {
  require(f.dim() == feature_dim(f.kind), "feature dimension " + std::to_string(f.dim()) + " does not match kind " +
                                              to_string(f.kind));
  require(f.frames.allFinite(), "audio features contain non-finite values");
  require(f.frame_rate > 0, "feature frame rate must be positive");
}

AudioFeatureSeq mfcc(const Waveform& w, double frame_rate, const MfccConfig& cfg) {
  validate(w);
  require(frame_rate > 0, "mfcc: frame rate must be positive");
  const double hop_exact = w.sample_rate / frame_rate;
  const auto hop = static_cast<long>(std::lround(hop_exact));
  require(std::abs(hop_exact - static_cast<double>(hop)) < 1e-9,
          "mfcc: frame rate " + std::to_string(frame_rate) + " does not divide sample rate " +
              std::to_string(w.sample_rate) + " into an integer hop");
  const auto win = static_cast<long>(std::lround(cfg.window_seconds * w.sample_rate));
  const auto n = static_cast<long>(w.samples.size());
  require(n >= win, "mfcc: audio of " + std::to_string(n) + " samples is shorter than one analysis window (" +
                        std::to_string(win) + " samples)");

  int fft_size = 1;
  while (fft_size < win) fft_size *= 2;
  const int bins = fft_size / 2 + 1;
  const double high = cfg.high_hz > 0 ? cfg.high_hz : w.sample_rate / 2.0;
  const Mat fb = mel_filterbank(cfg.num_filters, fft_size, w.sample_rate, cfg.low_hz, high);
  const Mat dct = dct_matrix(cfg.num_coeffs, cfg.num_filters);
  std::vector<double> window(static_cast<size_t>(win));
  for (long i = 0; i < win; ++i) {
    window[static_cast<size_t>(i)] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (win - 1));
  }

  const long steps = n / hop;
  AudioFeatureSeq out;
  out.kind = FeatureKind::kMfcc64;
  out.frame_rate = frame_rate;
  out.frames.resize(steps, cfg.num_coeffs);

  double* buf = fftw_alloc_real(static_cast<size_t>(fft_size));
  fftw_complex* spec = fftw_alloc_complex(static_cast<size_t>(bins));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(fft_size, buf, spec, FFTW_ESTIMATE);
  }
  Vec power(bins);
  for (long t = 0; t < steps; ++t) {
    const long start = t * hop + hop / 2 - win / 2;
    std::fill(buf, buf + fft_size, 0.0);
    for (long i = 0; i < win; ++i) {
      const long src = start + i;
      if (src >= 0 && src < n) buf[i] = w.samples[static_cast<size_t>(src)] * window[static_cast<size_t>(i)];
    }
    fftw_execute(plan);
    for (int k = 0; k < bins; ++k) power(k) = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    const Vec energies = fb * power;
    const Vec logmel = (energies.array() + cfg.log_floor).log().matrix();
    out.frames.row(t) = (dct * logmel).transpose();
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  fftw_free(spec);
  return out;
}

std::vector<InterpTap> interpolation_taps(int from, int to) {
  require(from >= 1 && to >= 1, "interpolation needs at least one source and one target step");
  std::vector<InterpTap> taps(static_cast<size_t>(to));
  for (int i = 0; i < to; ++i) {
    if (from == 1 || to == 1) {
      taps[static_cast<size_t>(i)] = {0, 0, 0.0};
      continue;
    }
    const double src = static_cast<double>(i) * (from - 1) / (to - 1);
    int lo = static_cast<int>(std::floor(src));
    if (lo >= from - 1) lo = from - 1;
    const double frac = src - lo;
    const int hi = lo + 1 < from ? lo + 1 : lo;
    taps[static_cast<size_t>(i)] = {lo, hi, hi == lo ? 0.0 : frac};
  }
  return taps;
}

AudioFeatureSeq align_to_frames(const AudioFeatureSeq& f, int target_steps) {
  require(f.steps() >= 1, "align_to_frames: input has no frames");
  require(target_steps >= 1, "align_to_frames: target length must be at least 1");
  AudioFeatureSeq out;
  out.kind = f.kind;
  out.frame_rate = f.frame_rate * (f.steps() > 1 && target_steps > 1
                                       ? static_cast<double>(target_steps - 1) / (f.steps() - 1)
                                       : static_cast<double>(target_steps) / f.steps());
  if (target_steps == f.steps()) {
    out.frames = f.frames;
    out.frame_rate = f.frame_rate;
    return out;
  }
  out.replicated = f.steps() == 1 && target_steps > 1;
  out.frames.resize(target_steps, f.dim());
  const auto taps = interpolation_taps(f.steps(), target_steps);
  for (int i = 0; i < target_steps; ++i) {
    const InterpTap& tap = taps[static_cast<size_t>(i)];
    if (tap.w_hi == 0.0) {
      out.frames.row(i) = f.frames.row(tap.lo);
    } else {
      out.frames.row(i) = (1.0 - tap.w_hi) * f.frames.row(tap.lo) + tap.w_hi * f.frames.row(tap.hi);
    }
  }
  return out;
}

Mat align_backward(const Mat& grad_out, int source_steps) {
  const int target = static_cast<int>(grad_out.rows());
  Mat g = Mat::Zero(source_steps, grad_out.cols());
  if (target == source_steps) return grad_out;
  const auto taps = interpolation_taps(source_steps, target);
  for (int i = 0; i < target; ++i) {
    const InterpTap& tap = taps[static_cast<size_t>(i)];
    g.row(tap.lo) += (1.0 - tap.w_hi) * grad_out.row(i);
    if (tap.w_hi != 0.0) g.row(tap.hi) += tap.w_hi * grad_out.row(i);
  }
  return g;
}

}  // namespace holo::audio
