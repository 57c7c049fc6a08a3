#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace holo::pipeline {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct FileRecord {
  std::string path;  // relative to the output root
  std::string sha256;
};

// Provenance of one command: what it read, what it wrote, and with which
// settings. Contains no timestamps so reruns reproduce it byte for byte.
struct Manifest {
  std::string command;
  std::string config_hash;
  nlohmann::json config;
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
};

FileRecord record_file(const std::filesystem::path& root, const std::filesystem::path& file);
nlohmann::json to_json(const Manifest& m);
// Writes <root>/manifests/<name>.json and returns its path.
std::filesystem::path write_manifest(const std::filesystem::path& root, const std::string& name, const Manifest& m);

}  // namespace holo::pipeline
