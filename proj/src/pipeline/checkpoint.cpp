#include "holo/pipeline/checkpoint.hpp"

#include "holo/motion/container.hpp"
#include "holo/nn/optim.hpp"

namespace holo::pipeline {

using nlohmann::json;

void save_checkpoint(const std::filesystem::path& path, const TaggedParams& groups, const CheckpointInfo& info) {
  std::vector<motion::PartSpec> parts;
  json shapes = json::object();
  Eigen::Index total = 0;
  for (const auto& [tag, params] : groups) {
    for (const nn::Param* p : params) {
      const std::string name = tag + ":" + p->name;
      require(!shapes.contains(name), "checkpoint: duplicate tensor " + name);
      parts.push_back({name, static_cast<int>(p->value.size())});
      shapes[name] = {p->value.rows(), p->value.cols()};
      total += p->value.size();
    }
  }
  Mat row(1, total);
  Eigen::Index at = 0;
  for (const auto& [tag, params] : groups) {
    for (const nn::Param* p : params) {
      row.block(0, at, 1, p->value.size()) = Eigen::Map<const RowVec>(p->value.data(), p->value.size());
      at += p->value.size();
    }
  }
  json extra;
  extra["kind"] = info.kind;
  extra["config_hash"] = info.config_hash;
  extra["seed"] = info.seed;
  extra["model"] = info.model;
  extra["extra"] = info.extra;
  extra["shapes"] = shapes;
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  motion::write_container(path, parts, row, motion::Dtype::kFloat64, extra);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const motion::Container c = motion::read_container(path);
  if (c.dtype != motion::Dtype::kFloat64 || c.rows != 1 || !c.header.contains("kind") ||
      !c.header.contains("shapes")) {
    throw FormatError(path.string() + " is not a parameter checkpoint");
  }
  Checkpoint ck;
  ck.info.kind = c.header["kind"].get<std::string>();
  ck.info.config_hash = c.header.value("config_hash", "");
  ck.info.seed = c.header.value("seed", uint64_t{0});
  ck.info.model = c.header.value("model", json::object());
  ck.info.extra = c.header.value("extra", json::object());
  Eigen::Index at = 0;
  for (const motion::PartSpec& p : c.parts) {
    const auto& shape = c.header["shapes"].at(p.name);
    const auto rows = shape[0].get<Eigen::Index>();
    const auto cols = shape[1].get<Eigen::Index>();
    if (rows * cols != p.dim) throw FormatError(path.string() + ": tensor " + p.name + " has inconsistent shape");
    Mat m(rows, cols);
    m = Eigen::Map<const Mat>(c.values.data() + at, rows, cols);
    ck.tensors.emplace(p.name, std::move(m));
    at += p.dim;
  }
  return ck;
}

void restore(const Checkpoint& ckpt, const std::string& tag, const nn::ParamList& params) {
  for (nn::Param* p : params) {
    const std::string name = tag + ":" + p->name;
    const auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw FormatError("checkpoint lacks tensor " + name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw FormatError("checkpoint tensor " + name + " has shape " + std::to_string(it->second.rows()) + "x" +
                        std::to_string(it->second.cols()) + ", model expects " + std::to_string(p->value.rows()) +
                        "x" + std::to_string(p->value.cols()));
    }
    p->value = it->second;
  }
}

std::optional<std::string> hash_warning(const Checkpoint& ckpt, const std::string& expected_hash) {
  if (ckpt.info.config_hash == expected_hash) return std::nullopt;
  return "checkpoint (" + ckpt.info.kind + ") was trained with config " + ckpt.info.config_hash +
         " but the current config is " + expected_hash;
}

// ------------------------------------------------------------ model configs

json to_json(const face::FaceGeneratorConfig& c) {
  return {{"path", face::to_string(c.path)}, {"embed_dim", c.embed_dim}, {"hidden", c.hidden},
          {"layers", c.layers},              {"seed", c.seed}};
}

face::FaceGeneratorConfig face_config_from_json(const json& j) {
  face::FaceGeneratorConfig c;
  c.path = face::feature_path_from_string(j.at("path").get<std::string>());
  c.embed_dim = j.at("embed_dim").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.layers = j.at("layers").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

json to_json(const vq::VqVaeConfig& c) {
  return {{"part", motion::to_string(c.part)}, {"hidden", c.hidden}, {"codebook_size", c.codebook_size},
          {"seed", c.seed}};
}

vq::VqVaeConfig vq_config_from_json(const json& j) {
  vq::VqVaeConfig c;
  c.part = motion::part_from_string(j.at("part").get<std::string>());
  c.hidden = j.at("hidden").get<int>();
  c.codebook_size = j.at("codebook_size").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

json to_json(const ar::ArConfig& c) {
  return {{"body_codes", c.body_codes},     {"hand_codes", c.hand_codes},   {"audio_dim", c.audio_dim},
          {"audio_hidden", c.audio_hidden}, {"channels", c.channels},       {"layers", c.layers},
          {"head_hidden", c.head_hidden},   {"num_speakers", c.num_speakers},
          {"cross_conditional", c.cross_conditional}, {"zero_heads", c.zero_heads}, {"seed", c.seed}};
}

ar::ArConfig ar_config_from_json(const json& j) {
  ar::ArConfig c;
  c.body_codes = j.at("body_codes").get<int>();
  c.hand_codes = j.at("hand_codes").get<int>();
  c.audio_dim = j.at("audio_dim").get<int>();
  c.audio_hidden = j.at("audio_hidden").get<int>();
  c.channels = j.at("channels").get<int>();
  c.layers = j.at("layers").get<int>();
  c.head_hidden = j.at("head_hidden").get<int>();
  c.num_speakers = j.at("num_speakers").get<int>();
  c.cross_conditional = j.at("cross_conditional").get<bool>();
  c.zero_heads = j.at("zero_heads").get<bool>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

// ----------------------------------------------------------- model files

namespace {

void expect_kind(const Checkpoint& ck, const std::string& kind) {
  if (ck.info.kind != kind) {
    throw FormatError("expected a " + kind + " checkpoint, found '" + ck.info.kind + "'");
  }
}

}  // namespace

void save_face(const std::filesystem::path& path, face::FaceGenerator& m, CheckpointInfo info) {
  info.kind = "face";
  info.model = to_json(m.config());
  save_checkpoint(path, {{"faceparams", m.params()}}, info);
}

face::FaceGenerator load_face(const Checkpoint& ck) {
  expect_kind(ck, "face");
  face::FaceGenerator m(face_config_from_json(ck.info.model));
  restore(ck, "faceparams", m.params());
  return m;
}

void save_vq(const std::filesystem::path& path, vq::VqVae& m, CheckpointInfo info) {
  info.kind = "vq";
  info.model = to_json(m.config());
  const std::string part = motion::to_string(m.config().part);
  nn::ParamList weights = m.params();
  nn::Param* codebook = weights.back();
  weights.pop_back();
  for (nn::Param* b : m.buffers()) weights.push_back(b);
  save_checkpoint(path, {{"vqparams." + part, weights}, {"codebook." + part, {codebook}}}, info);
}

vq::VqVae load_vq(const Checkpoint& ck) {
  expect_kind(ck, "vq");
  vq::VqVae m(vq_config_from_json(ck.info.model));
  const std::string part = motion::to_string(m.config().part);
  nn::ParamList weights = m.params();
  nn::Param* codebook = weights.back();
  weights.pop_back();
  for (nn::Param* b : m.buffers()) weights.push_back(b);
  restore(ck, "vqparams." + part, weights);
  restore(ck, "codebook." + part, {codebook});
  return m;
}

void save_ar(const std::filesystem::path& path, ar::ArModel& m, CheckpointInfo info) {
  info.kind = "ar";
  info.model = to_json(m.config());
  nn::ParamList all = m.params();
  for (nn::Param* b : m.buffers()) all.push_back(b);
  save_checkpoint(path, {{"arparams", all}}, info);
}

ar::ArModel load_ar(const Checkpoint& ck) {
  expect_kind(ck, "ar");
  ar::ArModel m(ar_config_from_json(ck.info.model));
  nn::ParamList all = m.params();
  for (nn::Param* b : m.buffers()) all.push_back(b);
  restore(ck, "arparams", all);
  nn::apply_masks(all);
  return m;
}

void save_discriminator(const std::filesystem::path& path, metrics::Discriminator& d, CheckpointInfo info) {
  info.kind = "discriminator";
  info.model = {{"in_dim", d.config().in_dim}, {"hidden", d.config().hidden}, {"seed", d.config().seed}};
  save_checkpoint(path, {{"discriminator", d.params()}}, info);
}

metrics::Discriminator load_discriminator(const Checkpoint& ck) {
  expect_kind(ck, "discriminator");
  metrics::DiscriminatorConfig c;
  c.in_dim = ck.info.model.at("in_dim").get<int>();
  c.hidden = ck.info.model.at("hidden").get<int>();
  c.seed = ck.info.model.at("seed").get<uint64_t>();
  metrics::Discriminator d(c);
  restore(ck, "discriminator", d.params());
  return d;
}

}  // namespace holo::pipeline
