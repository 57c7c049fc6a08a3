// holo: command-line driver for the holistic speech-to-motion pipeline.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "holo/error.hpp"
#include "holo/pipeline/commands.hpp"
#include "holo/pipeline/plot.hpp"
#include "holo/runtime.hpp"

namespace {

using namespace holo;
using namespace holo::pipeline;

struct GlobalOptions {
  std::string config_file;
  std::string profile;
  std::vector<std::string> overrides;
  std::string output;
  std::optional<uint64_t> seed;
};

RunConfig resolve_config(const GlobalOptions& g) {
  nlohmann::json j = nlohmann::json::object();
  if (!g.config_file.empty()) j = parse_config_text(read_text_file(g.config_file), g.config_file);
  if (!g.profile.empty()) j["profile"] = g.profile;
  RunConfig cfg = run_config_from_json(j);
  for (const auto& o : g.overrides) apply_override(cfg, o);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.output.empty()) cfg.output_root = g.output;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  holo::tune_allocator();
  CLI::App app{"Holistic speech-to-motion pipeline: face regression, compositional VQ and a cross-conditional prior"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("-c,--config", g.config_file, "JSON config file (unknown keys are rejected)");
  app.add_option("--profile", g.profile, "Base hyperparameters: paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--set", g.overrides, "Override one setting, e.g. --set ar.epochs=5 (repeatable)");
  app.add_option("-o,--output", g.output, "Output root (default: $HOLO_OUTPUT_ROOT, else ./holo_run)");
  app.add_option("--seed", g.seed, "Master seed");

  auto* synth = app.add_subcommand("synth-data", "Write the synthetic corpus and its split");
  auto* face = app.add_subcommand("train-face", "Train the audio-to-face regressor");
  auto* vq = app.add_subcommand("train-vq", "Train one VQ-VAE");
  std::string part = "body";
  vq->add_option("--part", part, "body, hand or joint")->check(CLI::IsMember({"body", "hand", "joint"}));
  auto* ar = app.add_subcommand("train-ar", "Train the autoregressive prior over body/hand codes");
  bool no_cross = false;
  ar->add_flag("--no-cross-cond", no_cross, "Ablation: body and hand streams do not see each other");
  auto* gen = app.add_subcommand("generate", "Generate holistic motion for an audio clip");
  GenerateRequest req;
  std::string audio_path, out_dir;
  gen->add_option("--audio", audio_path, "PCM16 WAV input (default: first test clip of the corpus)");
  gen->add_option("--speaker", req.speaker, "Speaker index")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", req.seed, "Sampling seed of the first sample");
  gen->add_option("--samples", req.samples, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--temperature", req.temperature, "Sampling temperature")->check(CLI::PositiveNumber);
  gen->add_flag("--greedy", req.greedy, "Argmax decoding instead of sampling");
  gen->add_option("--out", out_dir, "Output directory (default: <root>/generated)");
  auto* eval = app.add_subcommand("evaluate", "Compute L2, LVD, RS, Variation and RE on the test split");
  auto* plot = app.add_subcommand("plot", "Render SVG charts from logs and reports");
  auto* sweep = app.add_subcommand("sweep-codebooks", "RE of compositional vs joint codebooks across sizes");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(g);
    if (synth->parsed()) {
      cmd_synth_data(cfg, std::cout);
    } else if (face->parsed()) {
      cmd_train_face(cfg, std::cout);
    } else if (vq->parsed()) {
      cmd_train_vq(cfg, motion::part_from_string(part), std::cout);
    } else if (ar->parsed()) {
      cmd_train_ar(cfg, !no_cross, std::cout);
    } else if (gen->parsed()) {
      if (!audio_path.empty()) req.audio = audio_path;
      if (!out_dir.empty()) req.out_dir = out_dir;
      if (gen->count("--speaker") == 0) req.speaker = cfg.generate.speaker;
      if (gen->count("--seed") == 0) req.seed = cfg.generate.seed;
      if (gen->count("--samples") == 0) req.samples = cfg.generate.samples;
      if (gen->count("--temperature") == 0) req.temperature = cfg.generate.temperature;
      if (gen->count("--greedy") == 0) req.greedy = cfg.generate.greedy;
      cmd_generate(cfg, req, std::cout);
    } else if (eval->parsed()) {
      cmd_evaluate(cfg, std::cout);
    } else if (plot->parsed()) {
      cmd_plot(cfg, std::cout);
    } else if (sweep->parsed()) {
      cmd_sweep_codebooks(cfg, std::cout);
    }
  } catch (const holo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
