#include "holo/pipeline/manifest.hpp"

#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "holo/error.hpp"

namespace holo::pipeline {

namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw DependencyError("OpenSSL SHA-256 unavailable");
  }
  ~Digest() { EVP_MD_CTX_free(ctx_); }
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  void update(const void* data, size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Digest d;
  d.update(bytes.data(), bytes.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string() + " for hashing");
  Digest d;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    d.update(buf, static_cast<size_t>(in.gcount()));
  }
  return d.hex();
}

FileRecord record_file(const std::filesystem::path& root, const std::filesystem::path& file) {
  return FileRecord{std::filesystem::relative(file, root).generic_string(), sha256_file(file)};
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  auto files = [](const std::vector<FileRecord>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return a;
  };
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  return j;
}

std::filesystem::path write_manifest(const std::filesystem::path& root, const std::string& name, const Manifest& m) {
  const auto dir = root / "manifests";
  std::filesystem::create_directories(dir);
  const auto path = dir / (name + ".json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << to_json(m).dump(2) << "\n";
  return path;
}

}  // namespace holo::pipeline
