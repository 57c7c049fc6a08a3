#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace holo {

// splitmix64 step; used to derive independent stream seeds from one base seed.
uint64_t splitmix64(uint64_t x);
uint64_t derive_seed(uint64_t base, uint64_t stream);

// Seeded generator with platform-stable conversions (no std:: distributions,
// whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Uniform integer in [0, n).
  int index(int n);
  // Inverse-CDF draw from unnormalized non-negative weights.
  int categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(index(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace holo
