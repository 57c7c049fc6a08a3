#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/tensor.hpp"

// HMOTION1 container:
//   bytes 0..7   magic "HMOTION1"
//   bytes 8..11  uint32 byte-order mark 0x01020304, little-endian
//   bytes 12..15 uint32 header length N, little-endian
//   N bytes      UTF-8 JSON header {fps, T, parts:[{name, dim}], dtype, ...}
//   payload      T rows, parts concatenated per row, little-endian
//                float32 (motion) or float64 (parameters)
namespace holo::motion {

inline constexpr char kMagic[8] = {'H', 'M', 'O', 'T', 'I', 'O', 'N', '1'};
inline constexpr uint32_t kByteOrderMark = 0x01020304u;

enum class Dtype { kFloat32, kFloat64 };

struct PartSpec {
  std::string name;
  int dim = 0;
};

struct Container {
  nlohmann::json header;
  std::vector<PartSpec> parts;
  int rows = 0;
  Dtype dtype = Dtype::kFloat32;
  Mat values;  // rows x sum(dim)

  bool has_part(const std::string& name) const;
  Mat part(const std::string& name) const;
  int total_dim() const;
};

// `extra` fields are merged into the header; parts/T/dtype are filled in.
void write_container(const std::filesystem::path& path, const std::vector<PartSpec>& parts, const Mat& values,
                     Dtype dtype, const nlohmann::json& extra = nlohmann::json::object());
std::vector<unsigned char> encode_container(const std::vector<PartSpec>& parts, const Mat& values, Dtype dtype,
                                            const nlohmann::json& extra = nlohmann::json::object());
Container read_container(const std::filesystem::path& path);
Container decode_container(const std::vector<unsigned char>& bytes, const std::string& origin = "<memory>");

}  // namespace holo::motion
