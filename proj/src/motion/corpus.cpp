#include "holo/motion/corpus.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "holo/error.hpp"
#include "holo/random.hpp"

namespace holo::motion {

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
  }
  return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void validate(const CorpusConfig& c) {
  require(c.n_samples >= 10, "corpus needs at least 10 samples to split, got " + std::to_string(c.n_samples));
  require(c.num_speakers >= 1, "corpus needs at least one speaker");
  require(c.min_seconds > 0 && c.max_seconds >= c.min_seconds, "invalid clip duration range");
  require(c.body_modes >= 1 && c.hand_modes >= 1, "prototype counts must be positive");
  require(c.transition_rate > 0 && c.transition_rate <= 1, "transition_rate must be in (0, 1]");
  require(c.hand_coupling >= 0 && c.hand_coupling <= 1, "hand_coupling must be in [0, 1]");
  require(c.segment_min_seconds > 0 && c.segment_max_seconds >= c.segment_min_seconds, "invalid segment range");
  require(c.silence_prob >= 0 && c.silence_prob <= 1, "silence_prob must be in [0, 1]");
}

CorpusTruth make_truth(const CorpusConfig& cfg, uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  auto normal_mat = [&rng](Eigen::Index r, Eigen::Index c, double scale) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
  };
  CorpusTruth t;
  t.face_weight = normal_mat(kFaceDim, 1, cfg.face_weight_scale).col(0);
  t.face_bias = normal_mat(kFaceDim, 1, 0.1).col(0);
  const Mat base_body = normal_mat(cfg.body_modes, kBodyDim, cfg.prototype_scale);
  const Mat base_hand = normal_mat(cfg.hand_modes, kHandDim, cfg.prototype_scale);
  for (int s = 0; s < cfg.num_speakers; ++s) {
    const Mat shift_body = normal_mat(1, kBodyDim, cfg.speaker_shift);
    const Mat shift_hand = normal_mat(1, kHandDim, cfg.speaker_shift);
    t.body_prototypes.push_back(base_body.rowwise() + shift_body.row(0));
    t.hand_prototypes.push_back(base_hand.rowwise() + shift_hand.row(0));
    Vec pref(cfg.body_modes);
    for (int k = 0; k < cfg.body_modes; ++k) pref(k) = std::exp(0.8 * rng.normal());
    t.mode_preference.push_back(pref / pref.sum());
  }
  return t;
}

struct EnvelopeSegment {
  long begin = 0;
  long end = 0;
  double level = 0.0;
};

Sample make_sample(const CorpusConfig& cfg, const CorpusTruth& truth, uint64_t seed, int i) {
  Rng rng(derive_seed(seed, static_cast<uint64_t>(i) + 1));
  const int sr = audio::kDefaultSampleRate;
  const long hop = std::lround(sr / kFps);
  Sample s;
  char id[32];
  std::snprintf(id, sizeof(id), "s%04d", i);
  s.id = id;
  s.speaker = SpeakerId{rng.index(cfg.num_speakers), cfg.num_speakers};

  const double seconds = rng.uniform(cfg.min_seconds, cfg.max_seconds);
  const auto frames = static_cast<long>(std::floor(seconds * kFps));
  const long n = frames * hop;

  const std::array<std::pair<double, double>, 3> bands{{{120, 300}, {400, 1200}, {1500, 3500}}};
  std::array<double, 3> freq{}, amp{}, phase{};
  for (size_t k = 0; k < 3; ++k) {
    freq[k] = rng.uniform(bands[k].first, bands[k].second);
    amp[k] = rng.uniform(0.5, 1.0);
    phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  std::vector<EnvelopeSegment> segments;
  for (long pos = 0; pos < n;) {
    const long len = std::max<long>(1, std::lround(rng.uniform(cfg.segment_min_seconds, cfg.segment_max_seconds) * sr));
    const double level = rng.uniform() < cfg.silence_prob ? 0.0 : rng.uniform(0.3, 1.0);
    segments.push_back({pos, std::min(n, pos + len), level});
    pos += len;
  }

  std::vector<double> raw(static_cast<size_t>(n));
  size_t seg = 0;
  for (long j = 0; j < n; ++j) {
    while (j >= segments[seg].end) ++seg;
    double v = 0.0;
    const double time = static_cast<double>(j) / sr;
    for (size_t k = 0; k < 3; ++k) v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * time + phase[k]);
    raw[static_cast<size_t>(j)] = segments[seg].level * v;
  }
  double mean = 0.0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : raw) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double scale = var < 1e-12 ? 1.0 : 1.0 / std::sqrt(var);
  s.waveform.sample_rate = sr;
  s.waveform.samples.resize(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) s.waveform.samples[static_cast<size_t>(j)] = (raw[static_cast<size_t>(j)] - mean) * scale;

  // RMS of the unit-level sinusoid mix (the partials have distinct
  // frequencies, so cross terms average out).
  double mix_rms = 0.0;
  for (double v : amp) mix_rms += 0.5 * v * v;
  mix_rms = std::sqrt(mix_rms);

  // Envelope and segment index at each frame centre.
  std::vector<size_t> frame_segment(static_cast<size_t>(frames));
  s.envelope.resize(frames);
  seg = 0;
  for (long t = 0; t < frames; ++t) {
    const long centre = t * hop + hop / 2;
    while (centre >= segments[seg].end) ++seg;
    frame_segment[static_cast<size_t>(t)] = seg;
    s.envelope(t) = segments[seg].level * scale * mix_rms;
  }

  const int spk = s.speaker.index;
  const Mat& body_protos = truth.body_prototypes[static_cast<size_t>(spk)];
  const Mat& hand_protos = truth.hand_prototypes[static_cast<size_t>(spk)];
  const Vec& pref = truth.mode_preference[static_cast<size_t>(spk)];
  auto pick_body = [&]() { return rng.categorical(std::span<const double>(pref.data(), static_cast<size_t>(pref.size()))); };
  auto pick_hand = [&](int body_mode) {
    if (rng.uniform() < cfg.hand_coupling) return (body_mode + spk) % cfg.hand_modes;
    return rng.index(cfg.hand_modes);
  };

  s.motion = MotionSequence::zeros(static_cast<int>(frames));
  int body_mode = pick_body();
  int hand_mode = pick_hand(body_mode);
  RowVec body = body_protos.row(body_mode);
  RowVec hand = hand_protos.row(hand_mode);
  const double a = cfg.transition_rate;
  for (long t = 0; t < frames; ++t) {
    const size_t sg = frame_segment[static_cast<size_t>(t)];
    const bool onset = t > 0 && sg != frame_segment[static_cast<size_t>(t - 1)] && segments[sg].level > 0.0;
    if (onset) {
      body_mode = pick_body();
      hand_mode = pick_hand(body_mode);
    }
    body = (1.0 - a) * body + a * body_protos.row(body_mode);
    hand = (1.0 - a) * hand + a * hand_protos.row(hand_mode);
    s.motion.body.row(t) = body.cast<float>();
    s.motion.hand.row(t) = hand.cast<float>();
    const Vec face = truth.face_weight * s.envelope(t) + truth.face_bias;
    s.motion.face.row(t) = face.transpose().cast<float>();
  }
  return s;
}

}  // namespace

nlohmann::json to_json(const CorpusConfig& c) {
  return {{"n_samples", c.n_samples},
          {"num_speakers", c.num_speakers},
          {"min_seconds", c.min_seconds},
          {"max_seconds", c.max_seconds},
          {"body_modes", c.body_modes},
          {"hand_modes", c.hand_modes},
          {"prototype_scale", c.prototype_scale},
          {"speaker_shift", c.speaker_shift},
          {"transition_rate", c.transition_rate},
          {"hand_coupling", c.hand_coupling},
          {"segment_min_seconds", c.segment_min_seconds},
          {"segment_max_seconds", c.segment_max_seconds},
          {"silence_prob", c.silence_prob},
          {"face_weight_scale", c.face_weight_scale}};
}

CorpusConfig corpus_config_from_json(const nlohmann::json& j) {
  CorpusConfig c;
  const std::set<std::string> known{"n_samples",       "num_speakers",        "min_seconds",
                                    "max_seconds",     "body_modes",          "hand_modes",
                                    "prototype_scale", "speaker_shift",       "transition_rate",
                                    "hand_coupling",   "segment_min_seconds", "segment_max_seconds",
                                    "silence_prob",    "face_weight_scale"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("corpus config: unknown key '" + key + "'");
  }
  try {
    c.n_samples = j.value("n_samples", c.n_samples);
    c.num_speakers = j.value("num_speakers", c.num_speakers);
    c.min_seconds = j.value("min_seconds", c.min_seconds);
    c.max_seconds = j.value("max_seconds", c.max_seconds);
    c.body_modes = j.value("body_modes", c.body_modes);
    c.hand_modes = j.value("hand_modes", c.hand_modes);
    c.prototype_scale = j.value("prototype_scale", c.prototype_scale);
    c.speaker_shift = j.value("speaker_shift", c.speaker_shift);
    c.transition_rate = j.value("transition_rate", c.transition_rate);
    c.hand_coupling = j.value("hand_coupling", c.hand_coupling);
    c.segment_min_seconds = j.value("segment_min_seconds", c.segment_min_seconds);
    c.segment_max_seconds = j.value("segment_max_seconds", c.segment_max_seconds);
    c.silence_prob = j.value("silence_prob", c.silence_prob);
    c.face_weight_scale = j.value("face_weight_scale", c.face_weight_scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus config: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const CorpusTruth& t) {
  nlohmann::json j;
  j["face_weight"] = vec_to_json(t.face_weight);
  j["face_bias"] = vec_to_json(t.face_bias);
  j["body_prototypes"] = nlohmann::json::array();
  j["hand_prototypes"] = nlohmann::json::array();
  j["mode_preference"] = nlohmann::json::array();
  for (const auto& m : t.body_prototypes) j["body_prototypes"].push_back(mat_to_json(m));
  for (const auto& m : t.hand_prototypes) j["hand_prototypes"].push_back(mat_to_json(m));
  for (const auto& v : t.mode_preference) j["mode_preference"].push_back(vec_to_json(v));
  return j;
}

CorpusTruth corpus_truth_from_json(const nlohmann::json& j) {
  CorpusTruth t;
  t.face_weight = vec_from_json(j.at("face_weight"));
  t.face_bias = vec_from_json(j.at("face_bias"));
  for (const auto& m : j.at("body_prototypes")) t.body_prototypes.push_back(mat_from_json(m));
  for (const auto& m : j.at("hand_prototypes")) t.hand_prototypes.push_back(mat_from_json(m));
  for (const auto& v : j.at("mode_preference")) t.mode_preference.push_back(vec_from_json(v));
  return t;
}

Corpus synth_corpus(const CorpusConfig& cfg, uint64_t seed) {
  validate(cfg);
  Corpus c;
  c.config = cfg;
  c.seed = seed;
  c.truth = make_truth(cfg, seed);
  c.samples.reserve(static_cast<size_t>(cfg.n_samples));
  for (int i = 0; i < cfg.n_samples; ++i) c.samples.push_back(make_sample(cfg, c.truth, seed, i));
  return c;
}

nlohmann::json to_json(const DatasetSplit& s) { return {{"train", s.train}, {"val", s.val}, {"test", s.test}}; }

DatasetSplit dataset_split_from_json(const nlohmann::json& j) {
  DatasetSplit s;
  s.train = j.at("train").get<std::vector<std::string>>();
  s.val = j.at("val").get<std::vector<std::string>>();
  s.test = j.at("test").get<std::vector<std::string>>();
  return s;
}

DatasetSplit split_dataset(const std::vector<std::string>& ids, uint64_t seed) {
  require(ids.size() >= 10, "split_dataset needs at least 10 samples, got " + std::to_string(ids.size()));
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw ValidationError("split_dataset: duplicate sample id '" + id + "'");
  }
  std::vector<std::string> order = ids;
  Rng rng(derive_seed(seed, 0x5917));
  rng.shuffle(order);
  const size_t n = order.size();
  const size_t n_train = n * 8 / 10;
  const size_t n_val = n / 10;
  DatasetSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

DatasetSplit split_dataset(const std::vector<Sample>& samples, uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) ids.push_back(s.id);
  return split_dataset(ids, seed);
}

Segmentation segment(const MotionSequence& m, const audio::AudioFeatureSeq& a, int length, int stride) {
  validate(m);
  require(length >= 1 && stride >= 1, "segment: length and stride must be positive");
  require(a.steps() == m.steps(), "segment: audio has " + std::to_string(a.steps()) + " frames but motion has " +
                                      std::to_string(m.steps()) + "; align audio first");
  Segmentation out;
  if (m.steps() < length) {
    out.too_short = true;
    return out;
  }
  for (int start = 0; start + length <= m.steps(); start += stride) {
    Window w;
    w.start = start;
    w.face = m.face.middleRows(start, length).cast<double>();
    w.body = m.body.middleRows(start, length).cast<double>();
    w.hand = m.hand.middleRows(start, length).cast<double>();
    w.audio = a.frames.middleRows(start, length);
    out.windows.push_back(std::move(w));
  }
  return out;
}

}  // namespace holo::motion
