#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/face/face_generator.hpp"
#include "holo/motion/corpus.hpp"

namespace holo::pipeline {

struct FaceSettings {
  face::FeaturePath feature = face::FeaturePath::kSpeech;
  int hidden = 64;
  int layers = 6;
  double lr = 0.001;
  double momentum = 0.9;
  int epochs = 100;
};

struct VqSettings {
  int hidden = 64;
  int body_codes = 256;
  int hand_codes = 256;
  int joint_codes = 512;
  double lr = 1e-4;
  double beta = 0.25;
  int batch_size = 128;
  int epochs = 100;
  int window = 88;
  std::vector<int> sweep_sizes{64, 128, 256, 512};
};

struct ArSettings {
  int channels = 64;
  int layers = 15;
  int head_hidden = 64;
  int audio_hidden = 64;
  double lr = 1e-4;
  int batch_size = 128;
  int epochs = 100;
  int train_stride = 22;  // frames between overlapping training windows
};

struct GenerateSettings {
  int speaker = 0;
  uint64_t seed = 1;
  int samples = 1;
  double temperature = 1.0;
  bool greedy = false;
};

struct EvalSettings {
  int samples_per_clip = 2;  // sampling seeds per held-out clip
  int disc_hidden = 32;
  int disc_epochs = 20;
  double disc_lr = 1e-3;
  int disc_batch = 8;
  double test_fraction = 0.3;
};

// Everything a run depends on. The "paper" profile carries the published
// hyperparameters; "desk" shrinks epochs and widths so a full run fits on
// one CPU core.
struct RunConfig {
  std::string profile = "paper";
  std::string output_root;  // empty: HOLO_OUTPUT_ROOT or ./holo_run
  uint64_t seed = 1;
  motion::CorpusConfig corpus;
  FaceSettings face;
  VqSettings vq;
  ArSettings ar;
  GenerateSettings generate;
  EvalSettings eval;

  static RunConfig for_profile(const std::string& name);
};

nlohmann::json to_json(const RunConfig& c);
// Keys present in `j` override the defaults of the profile named by
// j["profile"] (default "paper"). Unknown keys and wrong types raise
// ConfigError naming the key.
RunConfig run_config_from_json(const nlohmann::json& j);
// Parse errors report line and column.
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

// "section.key=value"; the value is parsed as JSON when possible, else taken
// as a string.
void apply_override(RunConfig& c, const std::string& assignment);

// SHA-256 (hex, 16 chars) of the settings that shape trained artifacts.
std::string config_hash(const RunConfig& c);

std::filesystem::path output_root(const RunConfig& c);

}  // namespace holo::pipeline
