#pragma once

#include <filesystem>
#include <vector>

namespace holo::audio {

inline constexpr int kDefaultSampleRate = 22050;

// Mono PCM audio as doubles.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  double duration() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

// Raw PCM16 WAV read; stereo is downmixed by averaging. No resampling.
Waveform read_wav(const std::filesystem::path& path);
// PCM16 mono; samples are clipped to [-1, 1] before quantization.
void write_wav(const std::filesystem::path& path, const Waveform& w);

// Linear-interpolation resampling; output has round(n * target / source) samples.
Waveform resample(const Waveform& w, int target_rate);

// Zero mean, unit variance. Variance below 1e-12 skips the scaling step.
Waveform normalize(Waveform w);

// read_wav -> resample to 22050 Hz -> normalize.
Waveform load_waveform(const std::filesystem::path& path);

void validate(const Waveform& w);

}  // namespace holo::audio
