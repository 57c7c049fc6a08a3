#include "holo/pipeline/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "holo/error.hpp"
#include "holo/pipeline/manifest.hpp"

namespace holo::pipeline {

using nlohmann::json;

RunConfig RunConfig::for_profile(const std::string& name) {
  RunConfig c;
  c.profile = name;
  if (name == "paper") return c;
  if (name == "desk") {
    c.face.lr = 0.01;
    c.face.epochs = 100;
    c.vq.hidden = 32;
    c.vq.body_codes = 64;
    c.vq.hand_codes = 64;
    c.vq.joint_codes = 128;
    c.vq.lr = 1e-3;
    c.vq.batch_size = 32;
    c.vq.epochs = 30;
    c.vq.sweep_sizes = {32, 64, 128};
    c.ar.channels = 32;
    c.ar.head_hidden = 64;
    c.ar.audio_hidden = 32;
    c.ar.lr = 1e-3;
    c.ar.batch_size = 16;
    c.ar.epochs = 12;
    return c;
  }
  throw ConfigError("unknown profile '" + name + "' (expected 'paper' or 'desk')");
}

json to_json(const RunConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["output_root"] = c.output_root;
  j["seed"] = c.seed;
  j["corpus"] = motion::to_json(c.corpus);
  j["face"] = {{"feature", face::to_string(c.face.feature)}, {"hidden", c.face.hidden}, {"layers", c.face.layers},
               {"lr", c.face.lr}, {"momentum", c.face.momentum}, {"epochs", c.face.epochs}};
  j["vq"] = {{"hidden", c.vq.hidden},         {"body_codes", c.vq.body_codes}, {"hand_codes", c.vq.hand_codes},
             {"joint_codes", c.vq.joint_codes}, {"lr", c.vq.lr},               {"beta", c.vq.beta},
             {"batch_size", c.vq.batch_size}, {"epochs", c.vq.epochs},         {"window", c.vq.window},
             {"sweep_sizes", c.vq.sweep_sizes}};
  j["ar"] = {{"channels", c.ar.channels}, {"layers", c.ar.layers}, {"head_hidden", c.ar.head_hidden},
             {"audio_hidden", c.ar.audio_hidden}, {"lr", c.ar.lr}, {"batch_size", c.ar.batch_size},
             {"epochs", c.ar.epochs}, {"train_stride", c.ar.train_stride}};
  j["generate"] = {{"speaker", c.generate.speaker}, {"seed", c.generate.seed}, {"samples", c.generate.samples},
                   {"temperature", c.generate.temperature}, {"greedy", c.generate.greedy}};
  j["eval"] = {{"samples_per_clip", c.eval.samples_per_clip}, {"disc_hidden", c.eval.disc_hidden},
               {"disc_epochs", c.eval.disc_epochs}, {"disc_lr", c.eval.disc_lr}, {"disc_batch", c.eval.disc_batch},
               {"test_fraction", c.eval.test_fraction}};
  return j;
}

namespace {

// Reads the keys of one JSON object, remembering which were consumed so the
// rest can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config: '" + prefix_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: key '" + name(key) + "' has the wrong type (got " +
                        std::string(j_.at(key).type_name()) + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("config: unknown key '" + name(key.c_str()) + "'");
    }
  }

 private:
  std::string name(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <class T>
void positive(T v, const char* key) {
  if (!(v > 0)) throw ConfigError(std::string("config: key '") + key + "' must be positive");
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  std::string profile = "paper";
  if (j.contains("profile")) {
    if (!j["profile"].is_string()) throw ConfigError("config: key 'profile' must be a string");
    profile = j["profile"].get<std::string>();
  }
  RunConfig c = RunConfig::for_profile(profile);
  Section top(j, "");
  top.read("profile", c.profile);
  top.read("output_root", c.output_root);
  top.read("seed", c.seed);
  if (const json* cj = top.child("corpus")) {
    // Overlay: keep defaults for keys the file leaves out.
    json merged = motion::to_json(c.corpus);
    if (!cj->is_object()) throw ConfigError("config: 'corpus' must be an object");
    for (const auto& [k, v] : cj->items()) merged[k] = v;
    try {
      c.corpus = motion::corpus_config_from_json(merged);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (const json* fj = top.child("face")) {
    Section s(*fj, "face");
    std::string feature = face::to_string(c.face.feature);
    s.read("feature", feature);
    try {
      c.face.feature = face::feature_path_from_string(feature);
    } catch (const Error&) {
      throw ConfigError("config: key 'face.feature' must be 'speech' or 'mfcc', got '" + feature + "'");
    }
    s.read("hidden", c.face.hidden);
    s.read("layers", c.face.layers);
    s.read("lr", c.face.lr);
    s.read("momentum", c.face.momentum);
    s.read("epochs", c.face.epochs);
    s.finish();
  }
  if (const json* vj = top.child("vq")) {
    Section s(*vj, "vq");
    s.read("hidden", c.vq.hidden);
    s.read("body_codes", c.vq.body_codes);
    s.read("hand_codes", c.vq.hand_codes);
    s.read("joint_codes", c.vq.joint_codes);
    s.read("lr", c.vq.lr);
    s.read("beta", c.vq.beta);
    s.read("batch_size", c.vq.batch_size);
    s.read("epochs", c.vq.epochs);
    s.read("window", c.vq.window);
    s.read("sweep_sizes", c.vq.sweep_sizes);
    s.finish();
  }
  if (const json* aj = top.child("ar")) {
    Section s(*aj, "ar");
    s.read("channels", c.ar.channels);
    s.read("layers", c.ar.layers);
    s.read("head_hidden", c.ar.head_hidden);
    s.read("audio_hidden", c.ar.audio_hidden);
    s.read("lr", c.ar.lr);
    s.read("batch_size", c.ar.batch_size);
    s.read("epochs", c.ar.epochs);
    s.read("train_stride", c.ar.train_stride);
    s.finish();
  }
  if (const json* gj = top.child("generate")) {
    Section s(*gj, "generate");
    s.read("speaker", c.generate.speaker);
    s.read("seed", c.generate.seed);
    s.read("samples", c.generate.samples);
    s.read("temperature", c.generate.temperature);
    s.read("greedy", c.generate.greedy);
    s.finish();
  }
  if (const json* ej = top.child("eval")) {
    Section s(*ej, "eval");
    s.read("samples_per_clip", c.eval.samples_per_clip);
    s.read("disc_hidden", c.eval.disc_hidden);
    s.read("disc_epochs", c.eval.disc_epochs);
    s.read("disc_lr", c.eval.disc_lr);
    s.read("disc_batch", c.eval.disc_batch);
    s.read("test_fraction", c.eval.test_fraction);
    s.finish();
  }
  top.finish();

  positive(c.face.hidden, "face.hidden");
  positive(c.face.layers, "face.layers");
  positive(c.vq.hidden, "vq.hidden");
  positive(c.vq.body_codes, "vq.body_codes");
  positive(c.vq.hand_codes, "vq.hand_codes");
  positive(c.vq.joint_codes, "vq.joint_codes");
  positive(c.vq.batch_size, "vq.batch_size");
  positive(c.ar.channels, "ar.channels");
  positive(c.ar.layers, "ar.layers");
  positive(c.ar.batch_size, "ar.batch_size");
  positive(c.ar.train_stride, "ar.train_stride");
  positive(c.generate.samples, "generate.samples");
  positive(c.eval.samples_per_clip, "eval.samples_per_clip");
  if (c.vq.window <= 0 || c.vq.window % 4 != 0) throw ConfigError("config: key 'vq.window' must be a positive multiple of 4");
  if (c.face.epochs < 0 || c.vq.epochs < 0 || c.ar.epochs < 0) throw ConfigError("config: epochs must be non-negative");
  return c;
}

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                      e.what() + ")");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = parse_config_text(ss.str(), path.string());
  try {
    return run_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json j = to_json(c);
  std::string pointer;
  for (size_t start = 0; start <= key.size();) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const json::json_pointer ptr(pointer);
  if (!j.contains(ptr)) throw ConfigError("config: unknown key '" + key + "'");
  j[ptr] = value;
  c = run_config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_root");
  j.erase("generate");
  j.erase("eval");
  j.erase("profile");
  return sha256_hex(j.dump()).substr(0, 16);
}

std::filesystem::path output_root(const RunConfig& c) {
  if (!c.output_root.empty()) return c.output_root;
  if (const char* env = std::getenv("HOLO_OUTPUT_ROOT"); env && *env) return env;
  return "holo_run";
}

}  // namespace holo::pipeline
