#include "holo/audio/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "holo/error.hpp"

namespace holo::audio {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) | (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<unsigned char>& out, uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

}  // namespace

void validate(const Waveform& w) {
  require(w.sample_rate > 0, "waveform sample rate must be positive");
  for (double s : w.samples) require(std::isfinite(s), "waveform contains non-finite samples");
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path.string() + ": not a RIFF/WAVE file");
  }
  int channels = 0;
  int rate = 0;
  int bits = 0;
  const unsigned char* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const size_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) {
      throw FormatError(path.string() + ": chunk extends past end of file");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path.string() + ": short fmt chunk");
      const int format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = static_cast<int>(read_u32(bytes.data() + body + 4));
      bits = read_u16(bytes.data() + body + 14);
      if (format != 1 || bits != 16) throw FormatError(path.string() + ": only PCM 16-bit WAV is supported");
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (channels <= 0 || rate <= 0 || data == nullptr) throw FormatError(path.string() + ": missing fmt or data chunk");

  const size_t frames = data_size / (2 * static_cast<size_t>(channels));
  if (frames == 0) throw ValidationError(path.string() + ": zero-length audio");
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = data + 2 * (i * static_cast<size_t>(channels) + static_cast<size_t>(c));
      acc += static_cast<int16_t>(read_u16(p)) / 32768.0;
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  validate(w);
  std::vector<unsigned char> out;
  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32767.0))));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write WAV file " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing WAV file " + path.string());
}

Waveform resample(const Waveform& w, int target_rate) {
  validate(w);
  require(target_rate > 0, "resample: target rate must be positive");
  if (w.sample_rate == target_rate) return w;
  const size_t n = w.samples.size();
  const auto out_n = static_cast<size_t>(std::llround(static_cast<double>(n) * target_rate / w.sample_rate));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_n);
  const double step = static_cast<double>(w.sample_rate) / target_rate;
  for (size_t i = 0; i < out_n; ++i) {
    const double src = static_cast<double>(i) * step;
    const auto i0 = static_cast<size_t>(src);
    if (i0 + 1 >= n) {
      out.samples[i] = w.samples[n - 1];
      continue;
    }
    const double frac = src - static_cast<double>(i0);
    out.samples[i] = (1.0 - frac) * w.samples[i0] + frac * w.samples[i0 + 1];
  }
  return out;
}

Waveform normalize(Waveform w) {
  validate(w);
  require(!w.samples.empty(), "normalize: zero-length audio");
  double mean = 0.0;
  for (double s : w.samples) mean += s;
  mean /= static_cast<double>(w.samples.size());
  double var = 0.0;
  for (double& s : w.samples) {
    s -= mean;
    var += s * s;
  }
  var /= static_cast<double>(w.samples.size());
  if (var < 1e-12) return w;
  const double inv = 1.0 / std::sqrt(var);
  for (double& s : w.samples) s *= inv;
  return w;
}

Waveform load_waveform(const std::filesystem::path& path) {
  Waveform raw = read_wav(path);
  require(!raw.samples.empty(), path.string() + ": zero-length audio");
  return normalize(resample(raw, kDefaultSampleRate));
}

}  // namespace holo::audio
