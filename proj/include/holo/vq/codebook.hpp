#pragma once

#include <vector>

#include "holo/motion/motion.hpp"
#include "holo/random.hpp"
#include "holo/tensor.hpp"

namespace holo::vq {

inline constexpr int kCodeDim = 64;

struct Codebook {
  Mat entries;  // size x code_dim
  motion::Part part = motion::Part::kBody;

  int size() const { return static_cast<int>(entries.rows()); }
  int dim() const { return static_cast<int>(entries.cols()); }
};

void validate(const Codebook& cb);

// Entries drawn uniformly from [-1/size, 1/size].
Codebook init_codebook(int size, motion::Part part, Rng& rng, int dim = kCodeDim);

struct QuantizedSequence {
  Mat codes;                 // steps x code_dim; codes.row(t) == entries.row(indices[t])
  std::vector<int> indices;  // steps
  motion::Part part = motion::Part::kBody;

  int steps() const { return static_cast<int>(indices.size()); }
};

// Index of the nearest entry in Euclidean distance for every row of
// `latents`; ties go to the lowest index.
std::vector<int> nearest_indices(const Mat& latents, const Mat& entries);

QuantizedSequence quantize(const Mat& latents, const Codebook& cb);
// Codebook lookup for externally produced indices (e.g. sampled ones).
QuantizedSequence lookup(const std::vector<int>& indices, const Codebook& cb);

}  // namespace holo::vq
