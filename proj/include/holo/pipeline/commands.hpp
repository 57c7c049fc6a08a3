#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "holo/ar/generate.hpp"
#include "holo/metrics/metrics.hpp"
#include "holo/motion/corpus.hpp"
#include "holo/pipeline/config.hpp"

// Subcommands of the `holo` tool. Each reads its prerequisites from the
// output root, writes its artifacts there, and records a manifest.
namespace holo::pipeline {

// Layout under the output root.
std::filesystem::path corpus_dir(const std::filesystem::path& root);
std::filesystem::path checkpoint_path(const std::filesystem::path& root, const std::string& name);
std::filesystem::path log_path(const std::filesystem::path& root, const std::string& name);

// Seed streams derived from RunConfig::seed.
enum class SeedStream : uint64_t {
  kFace = 1,
  kVqBody = 2,
  kVqHand = 3,
  kVqJoint = 4,
  kAr = 5,
  kArAblation = 6,
  kDiscriminator = 7,
  kEvalSampling = 100,
};
uint64_t stream_seed(const RunConfig& c, SeedStream s);

struct CorpusData {
  motion::CorpusConfig config;
  uint64_t seed = 0;
  motion::DatasetSplit split;
  std::vector<motion::Sample> samples;  // waveforms normalized as on load
  std::map<std::string, size_t> index;

  const motion::Sample& get(const std::string& id) const;
  std::vector<const motion::Sample*> subset(const std::vector<std::string>& ids) const;
};

CorpusData load_corpus(const std::filesystem::path& root);

// Windows of one split, with MFCC frames attached. The default stride gives
// non-overlapping windows.
std::vector<motion::Window> split_windows(const CorpusData& data, const std::vector<std::string>& ids, int length,
                                          int stride = 0);

void cmd_synth_data(const RunConfig& cfg, std::ostream& log);
void cmd_train_face(const RunConfig& cfg, std::ostream& log);
void cmd_train_vq(const RunConfig& cfg, motion::Part part, std::ostream& log);
void cmd_train_ar(const RunConfig& cfg, bool cross_conditional, std::ostream& log);

struct GenerateRequest {
  std::optional<std::filesystem::path> audio;  // default: first test clip of the corpus
  int speaker = 0;
  uint64_t seed = 1;
  int samples = 1;
  double temperature = 1.0;
  bool greedy = false;
  std::optional<std::filesystem::path> out_dir;  // default: <root>/generated
};
// Writes one HMOTION1 file per sample (sampling seed = seed + k).
std::vector<std::filesystem::path> cmd_generate(const RunConfig& cfg, const GenerateRequest& req, std::ostream& log);

metrics::MetricReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_plot(const RunConfig& cfg, std::ostream& log);
// RE of compositional (K + K) vs joint (2K) codebooks for each sweep size.
void cmd_sweep_codebooks(const RunConfig& cfg, std::ostream& log);

}  // namespace holo::pipeline
