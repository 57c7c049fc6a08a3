#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "holo/audio/features.hpp"
#include "holo/audio/speech_encoder.hpp"
#include "holo/audio/waveform.hpp"
#include "holo/error.hpp"
#include "holo/random.hpp"
#include "support/tempdir.hpp"

using namespace holo;
using namespace holo::audio;

namespace {

Waveform sine(double hz, double seconds, int rate = kDefaultSampleRate, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<size_t>(std::lround(seconds * rate));
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  return w;
}

Waveform noise(double seconds, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(static_cast<size_t>(seconds * kDefaultSampleRate));
  for (double& v : w.samples) v = rng.normal();
  return w;
}

}  // namespace

TEST_CASE("load_waveform resamples to 22050 Hz and normalizes") {
  testing::TempDir dir("audio");
  SUBCASE("silence keeps zeros") {
    Waveform w;
    w.samples.assign(kDefaultSampleRate, 0.0);
    write_wav(dir / "zero.wav", w);
    const Waveform out = load_waveform(dir / "zero.wav");
    CHECK(out.samples.size() == 22050);
    for (double v : out.samples) REQUIRE(v == 0.0);
  }
  SUBCASE("44.1 kHz input halves its sample count") {
    write_wav(dir / "hi.wav", sine(440.0, 2.0, 44100));
    const Waveform out = load_waveform(dir / "hi.wav");
    CHECK(out.sample_rate == 22050);
    CHECK(out.samples.size() == 44100);
  }
  SUBCASE("moments of a normalized sine") {
    write_wav(dir / "sine.wav", sine(440.0, 1.0));
    const Waveform out = load_waveform(dir / "sine.wav");
    double mean = 0.0;
    for (double v : out.samples) mean += v;
    mean /= static_cast<double>(out.samples.size());
    double var = 0.0;
    for (double v : out.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(out.samples.size());
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-3);
  }
  SUBCASE("missing file is an I/O error") { CHECK_THROWS_AS(load_waveform(dir / "absent.wav"), IoError); }
  SUBCASE("garbage is a format error") {
    std::ofstream(dir / "bad.wav") << "not audio at all";
    CHECK_THROWS_AS(load_waveform(dir / "bad.wav"), FormatError);
  }
  SUBCASE("zero-length audio is rejected") {
    write_wav(dir / "empty.wav", Waveform{});
    CHECK_THROWS_AS(load_waveform(dir / "empty.wav"), ValidationError);
  }
}

TEST_CASE("stereo input is downmixed by averaging") {
  testing::TempDir dir("stereo");
  // Hand-built 2-channel PCM16 file with L = 1000, R = 3000 for 4 frames.
  std::ofstream f(dir / "st.wav", std::ios::binary);
  auto u32 = [&](uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f.write("RIFF", 4);
  u32(36 + 16);
  f.write("WAVEfmt ", 8);
  u32(16);
  u16(1);
  u16(2);
  u32(8000);
  u32(8000 * 4);
  u16(4);
  u16(16);
  f.write("data", 4);
  u32(16);
  for (int i = 0; i < 4; ++i) {
    u16(1000);
    u16(3000);
  }
  f.close();
  const Waveform w = read_wav(dir / "st.wav");
  REQUIRE(w.samples.size() == 4);
  CHECK(w.samples[0] == doctest::Approx(2000.0 / 32768.0));
}

TEST_CASE("mfcc frame count and shape") {
  const AudioFeatureSeq one = mfcc(sine(220.0, 1.0));
  CHECK(one.steps() == 30);
  CHECK(one.dim() == 64);
  CHECK(one.kind == FeatureKind::kMfcc64);
  for (double seconds : {0.5, 1.37, 2.0, 3.01, 7.9}) {
    const Waveform w = noise(seconds, 3);
    CHECK(mfcc(w).steps() == static_cast<int>(std::floor(w.duration() * 30.0)));
  }
}

TEST_CASE("mfcc of silence is time invariant") {
  Waveform w;
  w.samples.assign(22050, 0.0);
  const Mat f = mfcc(w).frames;
  for (Eigen::Index t = 1; t < f.rows(); ++t) REQUIRE((f.row(t).array() == f.row(0).array()).all());
}

TEST_CASE("mfcc of white noise is finite with varying coefficients") {
  const Mat f = mfcc(noise(2.0, 11)).frames;
  CHECK(f.allFinite());
  const RowVec mean = f.colwise().mean();
  const RowVec var = (f.rowwise() - mean).array().square().colwise().mean();
  CHECK((var.array() > 0.0).all());
}

TEST_CASE("mfcc is pure") {
  const Waveform w = noise(1.5, 5);
  const Mat a = mfcc(w).frames;
  const Mat b = mfcc(w).frames;
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("mfcc rejects audio shorter than one window") {
  Waveform w;
  w.samples.assign(100, 0.1);
  CHECK_THROWS_AS(mfcc(w), ValidationError);
}

TEST_CASE("fallback speech embedding") {
  const FallbackSpeechEncoder enc;
  const Waveform w = noise(1.0, 9);
  const AudioFeatureSeq a = enc.embed(w);
  CHECK(a.dim() == 256);
  CHECK(a.kind == FeatureKind::kSpeech256);
  CHECK(a.frame_rate == doctest::Approx(22050.0 / 320.0));
  const AudioFeatureSeq b = FallbackSpeechEncoder().embed(w);
  CHECK((a.frames.array() == b.frames.array()).all());
}

TEST_CASE("speech embedding frames ignore samples past their receptive field") {
  const FallbackSpeechEncoder enc;
  const Waveform w = noise(1.0, 21);
  const long cut = 11000;
  Waveform v = w;
  Rng rng(4);
  for (size_t i = static_cast<size_t>(cut); i < v.samples.size(); ++i) v.samples[i] += rng.normal();
  const Mat a = enc.backbone(w).frames;
  const Mat b = enc.backbone(v).frames;
  int unchanged = 0;
  bool changed_after = false;
  for (int t = 0; t < a.rows(); ++t) {
    const bool same = (a.row(t).array() == b.row(t).array()).all();
    if (enc.receptive_field(t).second < cut) {
      REQUIRE(same);
      ++unchanged;
    } else if (enc.receptive_field(t).first >= cut) {
      changed_after = changed_after || !same;
    }
  }
  CHECK(unchanged > 10);
  CHECK(changed_after);
}

TEST_CASE("external embeddings fail loudly when unavailable") {
  const ExternalEmbeddingProvider ext("/nonexistent/dump.hmotion");
  CHECK_THROWS_AS(ext.embed(noise(0.5, 1)), UnavailableError);
}

TEST_CASE("align_to_frames") {
  SUBCASE("identity at equal length") {
    AudioFeatureSeq f;
    Rng rng(2);
    f.frames = Mat::Random(10, 64);
    const AudioFeatureSeq g = align_to_frames(f, 10);
    CHECK((g.frames.array() == f.frames.array()).all());
  }
  SUBCASE("ramp midpoints are exact averages") {
    AudioFeatureSeq f;
    f.frames.resize(4, 64);
    for (int t = 0; t < 4; ++t) f.frames.row(t).setConstant(3.0 * t + 1.0);
    const Mat g = align_to_frames(f, 7).frames;
    REQUIRE(g.rows() == 7);
    for (int t = 0; t < 4; ++t) CHECK(g(2 * t, 0) == doctest::Approx(f.frames(t, 0)).epsilon(1e-15));
    for (int t = 0; t < 3; ++t) CHECK(g(2 * t + 1, 5) == doctest::Approx(0.5 * (f.frames(t, 5) + f.frames(t + 1, 5))));
  }
  SUBCASE("30 frames stretch to a training window") {
    AudioFeatureSeq f;
    f.frames = Mat::Random(30, 64);
    const AudioFeatureSeq g = align_to_frames(f, 88);
    CHECK(g.steps() == 88);
    CHECK(g.dim() == 64);
  }
  SUBCASE("a single frame is replicated and flagged") {
    AudioFeatureSeq f;
    f.frames = Mat::Constant(1, 64, 0.25);
    const AudioFeatureSeq g = align_to_frames(f, 5);
    CHECK(g.replicated);
    CHECK((g.frames.array() == 0.25).all());
  }
}

TEST_CASE("align_to_frames stays inside each dimension's range") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    AudioFeatureSeq f;
    const int from = 2 + rng.index(40);
    const int to = 1 + rng.index(120);
    f.frames.resize(from, 64);
    for (Eigen::Index i = 0; i < f.frames.size(); ++i) f.frames.data()[i] = rng.normal();
    const Mat g = align_to_frames(f, to).frames;
    const RowVec lo = f.frames.colwise().minCoeff();
    const RowVec hi = f.frames.colwise().maxCoeff();
    for (Eigen::Index t = 0; t < g.rows(); ++t) {
      REQUIRE((g.row(t).array() >= lo.array() - 1e-12).all());
      REQUIRE((g.row(t).array() <= hi.array() + 1e-12).all());
    }
  }
}

TEST_CASE("align_backward is the adjoint of alignment") {
  Rng rng(23);
  AudioFeatureSeq f;
  f.frames.resize(9, 64);
  for (Eigen::Index i = 0; i < f.frames.size(); ++i) f.frames.data()[i] = rng.normal();
  Mat y(20, 64);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  const double lhs = (align_to_frames(f, 20).frames.array() * y.array()).sum();
  const double rhs = (f.frames.array() * align_backward(y, 9).array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
