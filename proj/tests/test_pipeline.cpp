#include <doctest.h>

#include <fstream>
#include <sstream>

#include "holo/error.hpp"
#include "holo/motion/motion.hpp"
#include "holo/pipeline/checkpoint.hpp"
#include "holo/pipeline/commands.hpp"
#include "holo/pipeline/config.hpp"
#include "holo/pipeline/manifest.hpp"
#include "holo/pipeline/plot.hpp"
#include "support/gradcheck.hpp"
#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using namespace holo;
using namespace holo::pipeline;
using holo::testing::TempDir;

TEST_CASE("config parse errors carry line and column") {
  const std::string text = "{\n  \"seed\": 3,\n  \"face\": {\"lr\": }\n}\n";
  try {
    parse_config_text(text, "run.json");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.json:3:") != std::string::npos);
  }
}

TEST_CASE("config keys") {
  SUBCASE("unknown keys are named") {
    CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json::parse(R"({"vq": {"bodycodes": 3}})")),
                         doctest::Contains("bodycodes"), ConfigError);
    CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json::parse(R"({"extra": 1})")), doctest::Contains("extra"),
                         ConfigError);
  }
  SUBCASE("wrong types are named") {
    CHECK_THROWS_WITH_AS(run_config_from_json(nlohmann::json::parse(R"({"ar": {"epochs": "many"}})")),
                         doctest::Contains("epochs"), ConfigError);
  }
  SUBCASE("profile defaults and overrides") {
    const RunConfig desk = run_config_from_json(nlohmann::json::parse(R"({"profile": "desk", "vq": {"epochs": 7}})"));
    CHECK(desk.vq.epochs == 7);
    CHECK(desk.vq.body_codes == RunConfig::for_profile("desk").vq.body_codes);
    CHECK_THROWS_AS(RunConfig::for_profile("laptop"), ConfigError);
  }
  SUBCASE("round trip") {
    RunConfig c = RunConfig::for_profile("desk");
    c.seed = 42;
    c.face.feature = face::FeaturePath::kMfcc;
    const RunConfig back = run_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));
  }
  SUBCASE("command-line assignments") {
    RunConfig c;
    apply_override(c, "ar.lr=0.5");
    CHECK(c.ar.lr == 0.5);
    apply_override(c, "face.feature=mfcc");
    CHECK(c.face.feature == face::FeaturePath::kMfcc);
    CHECK_THROWS_WITH_AS(apply_override(c, "ar.lrr=1"), doctest::Contains("ar.lrr"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "vq.window=90"), ConfigError);
  }
}

TEST_CASE("config hash tracks artifact-shaping settings only") {
  RunConfig a;
  RunConfig b = a;
  b.output_root = "/elsewhere";
  b.generate.temperature = 0.5;
  b.eval.samples_per_clip = 9;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.vq.lr = 2e-4;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("checkpoints round trip bit-exactly") {
  TempDir dir("ckpt");
  ar::ArConfig cfg;
  cfg.body_codes = 7;
  cfg.hand_codes = 5;
  cfg.channels = 6;
  cfg.layers = 2;
  cfg.audio_hidden = 8;
  cfg.head_hidden = 4;
  cfg.zero_heads = false;
  cfg.cross_conditional = false;
  ar::ArModel m(cfg);
  CheckpointInfo info;
  info.kind = "ar";
  info.config_hash = "0123456789abcdef";
  info.seed = 9;
  info.extra = {{"note", "x"}};
  save_ar(dir / "ar.hmotion", m, info);
  const Checkpoint ck = read_checkpoint(dir / "ar.hmotion");
  CHECK(ck.info.kind == "ar");
  CHECK(ck.info.seed == 9);
  CHECK(ck.info.extra["note"] == "x");
  ar::ArModel back = load_ar(ck);
  CHECK(back.config().cross_conditional == false);
  CHECK(back.config().body_codes == 7);
  CHECK(nn::flatten_values(back.params()) == nn::flatten_values(m.params()));
  CHECK(nn::flatten_values(back.buffers()) == nn::flatten_values(m.buffers()));

  CHECK(!hash_warning(ck, "0123456789abcdef"));
  const auto w = hash_warning(ck, "ffffffffffffffff");
  REQUIRE(w);
  CHECK(w->find("0123456789abcdef") != std::string::npos);

  SUBCASE("missing tensors are reported") {
    ar::ArConfig bigger = cfg;
    bigger.layers = 3;
    ar::ArModel other(bigger);
    CHECK_THROWS_AS(restore(ck, "arparams", other.params()), FormatError);
  }
}

TEST_CASE("vq, face and discriminator checkpoints") {
  TempDir dir("ckpt2");
  vq::VqVae v(vq::VqVaeConfig{motion::Part::kHand, 8, 12, 3, false});
  save_vq(dir / "vq.hmotion", v, {.kind = "vq", .config_hash = "x"});
  vq::VqVae vb = load_vq(read_checkpoint(dir / "vq.hmotion"));
  CHECK(vb.config().part == motion::Part::kHand);
  CHECK((vb.codebook_entries().array() == v.codebook_entries().array()).all());
  CHECK(nn::flatten_values(vb.params()) == nn::flatten_values(v.params()));

  face::FaceGeneratorConfig fc;
  fc.path = face::FeaturePath::kMfcc;
  fc.hidden = 8;
  fc.layers = 2;
  face::FaceGenerator f(fc);
  save_face(dir / "face.hmotion", f, {.kind = "face", .config_hash = "x"});
  face::FaceGenerator fb = load_face(read_checkpoint(dir / "face.hmotion"));
  CHECK(nn::flatten_values(fb.params()) == nn::flatten_values(f.params()));

  metrics::Discriminator d(metrics::DiscriminatorConfig{});
  save_discriminator(dir / "d.hmotion", d, {.kind = "discriminator", .config_hash = "x"});
  metrics::Discriminator db = load_discriminator(read_checkpoint(dir / "d.hmotion"));
  CHECK(nn::flatten_values(db.params()) == nn::flatten_values(d.params()));
}

TEST_CASE("manifests and csv") {
  TempDir dir("manifest");
  write_text_file(dir / "a.txt", "abc");
  const FileRecord r = record_file(dir.path(), dir / "a.txt");
  CHECK(r.path == "a.txt");
  CHECK(r.sha256 == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Manifest m;
  m.command = "test";
  m.outputs.push_back(r);
  const fs::path p = write_manifest(dir.path(), "test", m);
  CHECK(p == dir / "manifests" / "test.json");
  const auto j = nlohmann::json::parse(read_text_file(p));
  CHECK(j["outputs"][0]["sha256"] == r.sha256);

  write_text_file(dir / "t.csv", "epoch,loss\n1,0.5\n2,0.25\n");
  const CsvTable t = read_csv(dir / "t.csv");
  CHECK(t.column("loss") == 1);
  CHECK(t.column("nope") == -1);
  CHECK(t.numbers("loss") == std::vector<double>{0.5, 0.25});
  const std::string svg = svg_line_chart("t", "x", "y", {{"s", {1, 2}, {3, 4}}});
  CHECK(svg.starts_with("<svg"));
}

namespace {

RunConfig tiny_run(const fs::path& root) {
  RunConfig c = RunConfig::for_profile("desk");
  c.output_root = root.string();
  c.corpus.n_samples = 20;
  c.corpus.max_seconds = 3.5;
  c.face.feature = face::FeaturePath::kMfcc;
  c.face.hidden = 8;
  c.face.layers = 2;
  c.face.epochs = 1;
  c.vq.hidden = 8;
  c.vq.body_codes = 8;
  c.vq.hand_codes = 8;
  c.vq.joint_codes = 16;
  c.vq.epochs = 1;
  c.vq.sweep_sizes = {4};
  c.ar.channels = 8;
  c.ar.layers = 2;
  c.ar.head_hidden = 8;
  c.ar.audio_hidden = 8;
  c.ar.epochs = 1;
  c.eval.samples_per_clip = 1;
  c.eval.disc_epochs = 1;
  c.eval.disc_hidden = 4;
  return c;
}

void run_all(const RunConfig& c) {
  std::ostringstream log;
  cmd_synth_data(c, log);
  cmd_train_face(c, log);
  cmd_train_vq(c, motion::Part::kBody, log);
  cmd_train_vq(c, motion::Part::kHand, log);
  cmd_train_ar(c, true, log);
  cmd_evaluate(c, log);
}

std::map<std::string, std::string> output_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("evaluation before training names the missing step") {
  TempDir dir("untrained");
  const RunConfig c = tiny_run(dir.path());
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(cmd_evaluate(c, log), doctest::Contains("holo train-face"), DependencyError);
  cmd_synth_data(c, log);
  CHECK_THROWS_WITH_AS(cmd_train_ar(c, true, log), doctest::Contains("holo train-vq"), DependencyError);
}

TEST_CASE("a tiny pipeline is reproducible end to end") {
  TempDir a("pipe_a"), b("pipe_b");
  const RunConfig ca = tiny_run(a.path()), cb = tiny_run(b.path());
  run_all(ca);
  run_all(cb);
  const auto ha = output_hashes(a.path()), hb = output_hashes(b.path());
  CHECK(ha.size() == hb.size());
  for (const auto& [name, hash] : ha) {
    INFO(name);
    REQUIRE(hb.count(name) == 1);
    // Manifests embed the output root; everything else must match exactly.
    if (!name.starts_with("manifests")) CHECK(hb.at(name) == hash);
  }
  CHECK(ha.count("eval/report.txt") == 1);
  const auto report = metrics::parse_metric_report(read_text_file(a / "eval/report.txt"));
  metrics::validate(report);
  CHECK(report.l2.has_value());
  CHECK(report.rs.has_value());
  CHECK(report.re.has_value());

  SUBCASE("generation with several seeds") {
    std::ostringstream log;
    GenerateRequest req;
    req.samples = 3;
    req.seed = 5;
    const auto files = cmd_generate(ca, req, log);
    REQUIRE(files.size() == 3);
    const motion::MotionSequence m0 = motion::read_motion(files[0]);
    const motion::MotionSequence m1 = motion::read_motion(files[1]);
    const motion::MotionSequence m2 = motion::read_motion(files[2]);
    CHECK(m0.steps() % 4 == 0);
    CHECK((m0.face.array() == m1.face.array()).all());
    CHECK((m0.face.array() == m2.face.array()).all());
    CHECK(!(m0.body_hand().array() == m1.body_hand().array()).all());
    CHECK(files[1].filename().string().find("seed6") != std::string::npos);
    // Same seed, same bytes.
    GenerateRequest again = req;
    again.samples = 1;
    again.out_dir = a / "again";
    const auto rerun = cmd_generate(ca, again, log);
    CHECK(sha256_file(rerun[0]) == sha256_file(files[0]));
  }
  SUBCASE("plots") {
    std::ostringstream log;
    const auto svgs = cmd_plot(ca, log);
    CHECK(!svgs.empty());
    for (const auto& p : svgs) CHECK(read_text_file(p).starts_with("<svg"));
  }
}
