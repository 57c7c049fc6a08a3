#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "holo/ar/crosscond.hpp"
#include "holo/face/face_generator.hpp"
#include "holo/metrics/discriminator.hpp"
#include "holo/vq/vqvae.hpp"

// Checkpoints reuse the HMOTION1 framing with a single float64 row: one
// part per tensor, named "<tag>:<parameter name>", with shapes and the
// model configuration in the header.
namespace holo::pipeline {

struct CheckpointInfo {
  std::string kind;  // face, vq, ar, discriminator
  std::string config_hash;
  uint64_t seed = 0;
  nlohmann::json model = nlohmann::json::object();  // model configuration
  nlohmann::json extra = nlohmann::json::object();
};

struct Checkpoint {
  CheckpointInfo info;
  std::map<std::string, Mat> tensors;  // key "<tag>:<name>"
};

using TaggedParams = std::vector<std::pair<std::string, nn::ParamList>>;

void save_checkpoint(const std::filesystem::path& path, const TaggedParams& groups, const CheckpointInfo& info);
Checkpoint read_checkpoint(const std::filesystem::path& path);
// Copies tensors back by name; every parameter must be present with the
// same shape.
void restore(const Checkpoint& ckpt, const std::string& tag, const nn::ParamList& params);
// Non-empty when the checkpoint was produced under another configuration.
std::optional<std::string> hash_warning(const Checkpoint& ckpt, const std::string& expected_hash);

nlohmann::json to_json(const face::FaceGeneratorConfig& c);
face::FaceGeneratorConfig face_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const vq::VqVaeConfig& c);
vq::VqVaeConfig vq_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ar::ArConfig& c);
ar::ArConfig ar_config_from_json(const nlohmann::json& j);

void save_face(const std::filesystem::path& path, face::FaceGenerator& m, CheckpointInfo info);
face::FaceGenerator load_face(const Checkpoint& ckpt);
void save_vq(const std::filesystem::path& path, vq::VqVae& m, CheckpointInfo info);
vq::VqVae load_vq(const Checkpoint& ckpt);
void save_ar(const std::filesystem::path& path, ar::ArModel& m, CheckpointInfo info);
ar::ArModel load_ar(const Checkpoint& ckpt);
void save_discriminator(const std::filesystem::path& path, metrics::Discriminator& d, CheckpointInfo info);
metrics::Discriminator load_discriminator(const Checkpoint& ckpt);

}  // namespace holo::pipeline
