#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/audio/features.hpp"
#include "holo/motion/motion.hpp"

namespace holo::motion {

// Knobs of the synthetic audio/motion corpus. Serialized as JSON with the
// same key names.
struct CorpusConfig {
  int n_samples = 200;
  int num_speakers = 4;
  double min_seconds = 3.0;
  double max_seconds = 10.0;
  int body_modes = 8;
  int hand_modes = 8;
  double prototype_scale = 0.5;    // std-dev of shared pose prototypes
  double speaker_shift = 0.2;      // std-dev of the per-speaker prototype offset
  double transition_rate = 0.25;   // per-frame pull toward the active prototype
  double hand_coupling = 0.5;      // chance the hand mode follows the body mode
  double segment_min_seconds = 0.3;
  double segment_max_seconds = 1.0;
  double silence_prob = 0.25;      // chance an envelope segment is silent
  double face_weight_scale = 0.3;  // std-dev of the envelope -> face map
};

nlohmann::json to_json(const CorpusConfig& c);
CorpusConfig corpus_config_from_json(const nlohmann::json& j);

// Hidden structure the corpus was generated from.
struct CorpusTruth {
  Vec face_weight;                     // 103: face_t = face_weight * envelope_t + face_bias
  Vec face_bias;                       // 103
  std::vector<Mat> body_prototypes;    // per speaker, body_modes x 63
  std::vector<Mat> hand_prototypes;    // per speaker, hand_modes x 90
  std::vector<Vec> mode_preference;    // per speaker, body_modes, sums to 1
};

nlohmann::json to_json(const CorpusTruth& t);
CorpusTruth corpus_truth_from_json(const nlohmann::json& j);

struct Corpus {
  CorpusConfig config;
  uint64_t seed = 0;
  CorpusTruth truth;
  std::vector<Sample> samples;
};

// Audio is three sinusoids under a piecewise-constant envelope; the face is
// an exact affine function of the (normalized) envelope; body and hand move
// toward speaker-specific prototypes, switching at envelope onsets.
Corpus synth_corpus(const CorpusConfig& cfg, uint64_t seed);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

nlohmann::json to_json(const DatasetSplit& s);
DatasetSplit dataset_split_from_json(const nlohmann::json& j);

// 80/10/10 by floor(0.8n) / floor(0.1n) / remainder after a seeded shuffle.
DatasetSplit split_dataset(const std::vector<std::string>& ids, uint64_t seed);
DatasetSplit split_dataset(const std::vector<Sample>& samples, uint64_t seed);

inline constexpr int kDefaultWindow = 88;

struct Window {
  int start = 0;
  int speaker = 0;
  std::string sample_id;
  Mat face;   // length x 103
  Mat body;   // length x 63
  Mat hand;   // length x 90
  Mat audio;  // length x feature dim
};

struct Segmentation {
  std::vector<Window> windows;
  bool too_short = false;  // input had fewer frames than one window
};

// Fixed-length windows at the given stride; trailing frames that do not fill
// a window are dropped.
Segmentation segment(const MotionSequence& m, const audio::AudioFeatureSeq& a, int length = kDefaultWindow,
                     int stride = kDefaultWindow);

}  // namespace holo::motion
