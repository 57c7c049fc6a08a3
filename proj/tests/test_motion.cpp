#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "holo/audio/features.hpp"
#include "holo/error.hpp"
#include "holo/motion/container.hpp"
#include "holo/motion/corpus.hpp"
#include "holo/motion/motion.hpp"
#include "holo/random.hpp"
#include "support/tempdir.hpp"

using namespace holo;
using namespace holo::motion;

namespace {

CorpusConfig small_config(int n = 20) {
  CorpusConfig c;
  c.n_samples = n;
  c.min_seconds = 3.0;
  c.max_seconds = 4.0;
  return c;
}

MotionSequence random_motion(int steps, uint64_t seed) {
  Rng rng(seed);
  MotionSequence m = MotionSequence::zeros(steps);
  for (MatF* part : {&m.face, &m.body, &m.hand}) {
    for (Eigen::Index i = 0; i < part->size(); ++i) part->data()[i] = static_cast<float>(rng.normal());
  }
  return m;
}

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

audio::AudioFeatureSeq dummy_audio(int steps) {
  audio::AudioFeatureSeq a;
  a.frames = Mat::Zero(steps, 64);
  for (int t = 0; t < steps; ++t) a.frames(t, 0) = t;
  return a;
}

}  // namespace

TEST_CASE("speaker one-hot has exactly one set entry") {
  for (int i = 0; i < 4; ++i) {
    const Vec v = SpeakerId{i, 4}.one_hot();
    CHECK(v.sum() == 1.0);
    CHECK(v(i) == 1.0);
  }
  CHECK_THROWS_AS(validate(SpeakerId{4, 4}), ValidationError);
}

TEST_CASE("synth_corpus is deterministic per seed") {
  const Corpus a = synth_corpus(small_config(), 0);
  const Corpus b = synth_corpus(small_config(), 0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].waveform.samples == b.samples[i].waveform.samples);
    CHECK((a.samples[i].motion.body.array() == b.samples[i].motion.body.array()).all());
    CHECK((a.samples[i].motion.face.array() == b.samples[i].motion.face.array()).all());
  }
  const Corpus c = synth_corpus(small_config(), 1);
  CHECK(c.samples[0].waveform.samples != a.samples[0].waveform.samples);
}

TEST_CASE("silent envelopes leave the face at the bias") {
  CorpusConfig cfg = small_config(10);
  cfg.silence_prob = 1.0;
  const Corpus c = synth_corpus(cfg, 3);
  for (const Sample& s : c.samples) {
    for (int t = 0; t < s.motion.steps(); ++t) {
      REQUIRE((s.motion.face.row(t).cast<double>().transpose() - c.truth.face_bias).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("synthetic face is the stored affine map of the envelope") {
  const Corpus c = synth_corpus(small_config(), 5);
  for (const Sample& s : c.samples) {
    for (int t = 0; t < s.motion.steps(); ++t) {
      const Vec expect = c.truth.face_weight * s.envelope(t) + c.truth.face_bias;
      REQUIRE((s.motion.face.row(t).transpose() - expect.cast<float>()).cwiseAbs().maxCoeff() == 0.0f);
    }
  }
}

TEST_CASE("synthetic envelope tracks the RMS of the normalized audio") {
  const Corpus c = synth_corpus(small_config(), 8);
  const int hop = audio::kDefaultSampleRate / 30;
  int checked = 0;
  for (const Sample& s : c.samples) {
    for (int t = 1; t + 1 < s.motion.steps(); ++t) {
      // Only frames deep inside a constant segment.
      if (s.envelope(t - 1) != s.envelope(t) || s.envelope(t + 1) != s.envelope(t) || s.envelope(t) == 0.0) continue;
      double sq = 0.0;
      for (int j = t * hop; j < (t + 1) * hop; ++j) sq += s.waveform.samples[static_cast<size_t>(j)] * s.waveform.samples[static_cast<size_t>(j)];
      const double rms = std::sqrt(sq / hop);
      CHECK(rms == doctest::Approx(s.envelope(t)).epsilon(0.1));
      ++checked;
      break;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("default corpus satisfies the frame-count invariant") {
  const Corpus c = synth_corpus(CorpusConfig{}, 1);
  REQUIRE(c.samples.size() == 200);
  std::set<int> speakers;
  for (const Sample& s : c.samples) {
    const int expect = static_cast<int>(std::floor(s.waveform.duration() * kFps));
    CHECK(std::abs(expect - s.motion.steps()) <= 1);
    CHECK(s.waveform.duration() >= 3.0 - 1.0 / kFps);
    CHECK(s.waveform.duration() <= 10.0);
    speakers.insert(s.speaker.index);
  }
  CHECK(speakers.size() == 4);
}

TEST_CASE("body and hand frames stay inside the speaker's prototype box") {
  const Corpus c = synth_corpus(small_config(), 9);
  for (const Sample& s : c.samples) {
    const int spk = s.speaker.index;
    const RowVec blo = c.truth.body_prototypes[spk].colwise().minCoeff();
    const RowVec bhi = c.truth.body_prototypes[spk].colwise().maxCoeff();
    const RowVec hlo = c.truth.hand_prototypes[spk].colwise().minCoeff();
    const RowVec hhi = c.truth.hand_prototypes[spk].colwise().maxCoeff();
    const Mat body = s.motion.body.cast<double>();
    const Mat hand = s.motion.hand.cast<double>();
    for (int t = 0; t < s.motion.steps(); ++t) {
      REQUIRE((body.row(t).array() >= blo.array() - 1e-5).all());
      REQUIRE((body.row(t).array() <= bhi.array() + 1e-5).all());
      REQUIRE((hand.row(t).array() >= hlo.array() - 1e-5).all());
      REQUIRE((hand.row(t).array() <= hhi.array() + 1e-5).all());
    }
  }
}

TEST_CASE("synth_corpus rejects corpora too small to split") {
  CHECK_THROWS_AS(synth_corpus(small_config(9), 1), ValidationError);
}

TEST_CASE("corpus config round-trips through JSON and rejects unknown keys") {
  CorpusConfig c = small_config(33);
  c.hand_coupling = 0.125;
  const CorpusConfig d = corpus_config_from_json(to_json(c));
  CHECK(d.n_samples == 33);
  CHECK(d.hand_coupling == 0.125);
  nlohmann::json j = to_json(c);
  j["n_sample"] = 3;
  CHECK_THROWS_AS(corpus_config_from_json(j), ConfigError);
}

TEST_CASE("split_dataset sizes and determinism") {
  auto ids = [](int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("id" + std::to_string(i));
    return v;
  };
  const DatasetSplit ten = split_dataset(ids(10), 1);
  CHECK(ten.train.size() == 8);
  CHECK(ten.val.size() == 1);
  CHECK(ten.test.size() == 1);
  const DatasetSplit a = split_dataset(ids(200), 1);
  CHECK(a.train.size() == 160);
  CHECK(a.val.size() == 20);
  CHECK(a.test.size() == 20);
  const DatasetSplit again = split_dataset(ids(200), 1);
  CHECK(a.train == again.train);
  const DatasetSplit b = split_dataset(ids(200), 2);
  CHECK(b.train.size() == 160);
  CHECK(std::set(a.train.begin(), a.train.end()) != std::set(b.train.begin(), b.train.end()));

  std::set<std::string> all;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& id : *part) CHECK(all.insert(id).second);
  }
  CHECK(all.size() == 200);

  auto dup = ids(12);
  dup[3] = dup[4];
  CHECK_THROWS_AS(split_dataset(dup, 1), ValidationError);
  CHECK_THROWS_AS(split_dataset(ids(9), 1), ValidationError);
}

TEST_CASE("split membership property over many sizes and seeds") {
  for (int n = 10; n <= 60; n += 7) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    for (uint64_t seed : {1u, 2u, 99u}) {
      const DatasetSplit s = split_dataset(v, seed);
      CHECK(s.train.size() == static_cast<size_t>(std::floor(0.8 * n)));
      CHECK(s.val.size() == static_cast<size_t>(std::floor(0.1 * n)));
      std::set<std::string> all(s.train.begin(), s.train.end());
      all.insert(s.val.begin(), s.val.end());
      all.insert(s.test.begin(), s.test.end());
      CHECK(all.size() == static_cast<size_t>(n));
      CHECK(s.train.size() + s.val.size() + s.test.size() == static_cast<size_t>(n));
    }
  }
}

TEST_CASE("segment windows") {
  SUBCASE("exact fit") { CHECK(segment(MotionSequence::zeros(88), dummy_audio(88)).windows.size() == 1); }
  SUBCASE("trailing frames dropped") { CHECK(segment(MotionSequence::zeros(90), dummy_audio(90)).windows.size() == 1); }
  SUBCASE("three windows") {
    const MotionSequence m = random_motion(264, 4);
    const Segmentation s = segment(m, dummy_audio(264), 88, 88);
    REQUIRE(s.windows.size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(s.windows[k].start == 88 * k);
      CHECK(s.windows[k].audio(0, 0) == 88.0 * k);
      CHECK(s.windows[k].body(5, 7) == static_cast<double>(m.body(88 * k + 5, 7)));
    }
  }
  SUBCASE("too short") {
    const Segmentation s = segment(MotionSequence::zeros(50), dummy_audio(50));
    CHECK(s.windows.empty());
    CHECK(s.too_short);
  }
  SUBCASE("audio must be aligned") {
    CHECK_THROWS_AS(segment(MotionSequence::zeros(100), dummy_audio(99)), ValidationError);
  }
}

TEST_CASE("motion files round-trip bit-exactly") {
  testing::TempDir dir("motion");
  const MotionSequence m = random_motion(88, 12);
  write_motion(m, dir / "m.hmotion", 2);
  std::optional<int> speaker;
  const MotionSequence r = read_motion(dir / "m.hmotion", &speaker);
  CHECK(speaker == 2);
  CHECK(std::memcmp(m.face.data(), r.face.data(), sizeof(float) * m.face.size()) == 0);
  CHECK(std::memcmp(m.body.data(), r.body.data(), sizeof(float) * m.body.size()) == 0);
  CHECK(std::memcmp(m.hand.data(), r.hand.data(), sizeof(float) * m.hand.size()) == 0);

  const auto bytes = slurp(dir / "m.hmotion");
  CHECK(std::memcmp(bytes.data(), "HMOTION1", 8) == 0);
  // magic, byte-order mark, header length, header, payload: nothing else.
  uint32_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 12, 4);
  const size_t payload = 88 * (103 + 63 + 90) * 4;
  CHECK(bytes.size() == 16 + header_len + payload);
}

TEST_CASE("round trip holds for random lengths") {
  testing::TempDir dir("motion_prop");
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int steps = rng.index(200);
    const MotionSequence m = random_motion(steps, 100 + trial);
    write_motion(m, dir / "p.hmotion");
    const MotionSequence r = read_motion(dir / "p.hmotion");
    REQUIRE(r.steps() == steps);
    CHECK((m.body.array() == r.body.array()).all());
  }
}

TEST_CASE("corrupted motion files are format errors") {
  testing::TempDir dir("corrupt");
  write_motion(random_motion(10, 1), dir / "ok.hmotion");
  auto bytes = slurp(dir / "ok.hmotion");

  SUBCASE("truncated payload names both byte counts") {
    auto cut = bytes;
    cut.resize(cut.size() - 7);
    spill(dir / "cut.hmotion", cut);
    try {
      read_motion(dir / "cut.hmotion");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("expected") != std::string::npos);
      CHECK(msg.find(std::to_string(10 * 256 * 4)) != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    auto cut = bytes;
    cut.resize(20);
    spill(dir / "h.hmotion", cut);
    CHECK_THROWS_AS(read_motion(dir / "h.hmotion"), FormatError);
  }
  SUBCASE("big-endian producer") {
    auto swapped = bytes;
    std::reverse(swapped.begin() + 8, swapped.begin() + 12);
    spill(dir / "be.hmotion", swapped);
    CHECK_THROWS_WITH_AS(read_motion(dir / "be.hmotion"), doctest::Contains("big-endian"), FormatError);
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    spill(dir / "m.hmotion", bad);
    CHECK_THROWS_AS(read_motion(dir / "m.hmotion"), FormatError);
  }
}

TEST_CASE("generic containers keep float64 payloads exact") {
  Rng rng(2);
  Mat v(3, 5);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal() * 1e-7 + 1.0 / 3.0;
  const auto bytes = encode_container({{"a", 2}, {"b", 3}}, v, Dtype::kFloat64, {{"note", "x"}});
  const Container c = decode_container(bytes);
  CHECK(c.rows == 3);
  CHECK(c.header.at("note") == "x");
  CHECK((c.values.array() == v.array()).all());
  CHECK((c.part("b").array() == v.rightCols(3).array()).all());
  CHECK_THROWS_AS(c.part("zz"), FormatError);
}

TEST_CASE("equalize_lengths truncates to the shorter stream") {
  Sample s;
  s.waveform.samples.assign(static_cast<size_t>(audio::kDefaultSampleRate * 2), 0.0);
  s.motion = MotionSequence::zeros(70);
  equalize_lengths(s);
  CHECK(s.motion.steps() == 60);
  Sample t;
  t.waveform.samples.assign(static_cast<size_t>(audio::kDefaultSampleRate * 3), 0.0);
  t.motion = MotionSequence::zeros(50);
  equalize_lengths(t);
  CHECK(t.motion.steps() == 50);
  CHECK(static_cast<int>(std::floor(t.waveform.duration() * kFps)) == 50);
}
