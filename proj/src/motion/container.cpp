#include "holo/motion/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "holo/error.hpp"

namespace holo::motion {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <class T>
T get_le(const unsigned char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::string dtype_name(Dtype d) { return d == Dtype::kFloat32 ? "float32" : "float64"; }

size_t dtype_size(Dtype d) { return d == Dtype::kFloat32 ? 4 : 8; }

}  // namespace

bool Container::has_part(const std::string& name) const {
  for (const auto& p : parts) {
    if (p.name == name) return true;
  }
  return false;
}

int Container::total_dim() const {
  int d = 0;
  for (const auto& p : parts) d += p.dim;
  return d;
}

Mat Container::part(const std::string& name) const {
  int offset = 0;
  for (const auto& p : parts) {
    if (p.name == name) return values.middleCols(offset, p.dim);
    offset += p.dim;
  }
  throw FormatError("container has no part '" + name + "'");
}

std::vector<unsigned char> encode_container(const std::vector<PartSpec>& parts, const Mat& values, Dtype dtype,
                                            const nlohmann::json& extra) {
  int total = 0;
  nlohmann::json jparts = nlohmann::json::array();
  for (const auto& p : parts) {
    require(p.dim > 0, "container part '" + p.name + "' must have positive dimension");
    total += p.dim;
    jparts.push_back({{"name", p.name}, {"dim", p.dim}});
  }
  require(values.cols() == total, "container payload has " + std::to_string(values.cols()) +
                                      " columns but parts sum to " + std::to_string(total));
  nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
  header["T"] = values.rows();
  header["parts"] = jparts;
  header["dtype"] = dtype_name(dtype);
  header["endian"] = "little";
  const std::string text = header.dump();

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  put_le<uint32_t>(out, kByteOrderMark);
  put_le<uint32_t>(out, static_cast<uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + static_cast<size_t>(values.size()) * dtype_size(dtype));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (dtype == Dtype::kFloat32) {
      put_le<float>(out, static_cast<float>(v));
    } else {
      put_le<double>(out, v);
    }
  }
  return out;
}

void write_container(const std::filesystem::path& path, const std::vector<PartSpec>& parts, const Mat& values,
                     Dtype dtype, const nlohmann::json& extra) {
  const auto bytes = encode_container(parts, values, dtype, extra);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Container decode_container(const std::vector<unsigned char>& bytes, const std::string& origin) {
  if (bytes.size() < 16) {
    throw FormatError(origin + ": file too short for an HMOTION1 header (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw FormatError(origin + ": bad magic, not an HMOTION1 file");
  const uint32_t bom = get_le<uint32_t>(bytes.data() + 8);
  if (bom != kByteOrderMark) {
    if (bom == 0x04030201u) {
      throw FormatError(origin + ": byte-order mark indicates a big-endian producer; payload must be little-endian");
    }
    throw FormatError(origin + ": corrupt byte-order mark");
  }
  const uint32_t header_len = get_le<uint32_t>(bytes.data() + 12);
  if (16 + static_cast<size_t>(header_len) > bytes.size()) {
    throw FormatError(origin + ": header length " + std::to_string(header_len) + " exceeds file size " +
                      std::to_string(bytes.size()));
  }
  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": malformed header: " + e.what());
  }
  try {
    c.rows = c.header.at("T").get<int>();
    const std::string dtype = c.header.value("dtype", "float32");
    if (dtype == "float32") {
      c.dtype = Dtype::kFloat32;
    } else if (dtype == "float64") {
      c.dtype = Dtype::kFloat64;
    } else {
      throw FormatError(origin + ": unsupported dtype '" + dtype + "'");
    }
    if (c.header.value("endian", "little") != "little") throw FormatError(origin + ": payload is not little-endian");
    for (const auto& p : c.header.at("parts")) c.parts.push_back({p.at("name").get<std::string>(), p.at("dim").get<int>()});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": header missing required fields: " + e.what());
  }
  require(c.rows >= 0, origin + ": negative frame count");
  const int cols = c.total_dim();
  const size_t expected = static_cast<size_t>(c.rows) * static_cast<size_t>(cols) * dtype_size(c.dtype);
  const size_t actual = bytes.size() - 16 - header_len;
  if (expected != actual) {
    throw FormatError(origin + ": payload length mismatch: expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(actual));
  }
  c.values.resize(c.rows, cols);
  const unsigned char* p = bytes.data() + 16 + header_len;
  for (Eigen::Index i = 0; i < c.values.size(); ++i) {
    if (c.dtype == Dtype::kFloat32) {
      c.values.data()[i] = static_cast<double>(get_le<float>(p));
      p += 4;
    } else {
      c.values.data()[i] = get_le<double>(p);
      p += 8;
    }
  }
  return c;
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_container(bytes, path.string());
}

}  // namespace holo::motion
