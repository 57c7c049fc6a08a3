#include "holo/vq/codebook.hpp"

#include "holo/error.hpp"

namespace holo::vq {

void validate(const Codebook& cb) {
  require(cb.size() >= 1, "codebook is empty");
  require(cb.entries.allFinite(), "codebook entries must be finite");
}

Codebook init_codebook(int size, motion::Part part, Rng& rng, int dim) {
  require(size >= 1, "codebook size must be positive");
  Codebook cb;
  cb.part = part;
  cb.entries.resize(size, dim);
  const double bound = 1.0 / size;
  for (Eigen::Index i = 0; i < cb.entries.size(); ++i) cb.entries.data()[i] = rng.uniform(-bound, bound);
  return cb;
}

std::vector<int> nearest_indices(const Mat& latents, const Mat& entries) {
  require(entries.rows() >= 1, "quantize: empty codebook");
  require(latents.cols() == entries.cols(), "quantize: latent dimension " + std::to_string(latents.cols()) +
                                                " does not match codebook dimension " +
                                                std::to_string(entries.cols()));
  std::vector<int> out(static_cast<size_t>(latents.rows()));
  for (Eigen::Index t = 0; t < latents.rows(); ++t) {
    const Vec dist = (entries.rowwise() - latents.row(t)).rowwise().squaredNorm();
    int best = 0;
    double best_d = dist(0);
    for (Eigen::Index k = 1; k < dist.size(); ++k) {
      if (dist(k) < best_d) {
        best_d = dist(k);
        best = static_cast<int>(k);
      }
    }
    out[static_cast<size_t>(t)] = best;
  }
  return out;
}

QuantizedSequence quantize(const Mat& latents, const Codebook& cb) {
  require(cb.size() >= 1, "quantize: empty codebook");
  return lookup(nearest_indices(latents, cb.entries), cb);
}

QuantizedSequence lookup(const std::vector<int>& indices, const Codebook& cb) {
  QuantizedSequence q;
  q.part = cb.part;
  q.indices = indices;
  q.codes.resize(static_cast<Eigen::Index>(indices.size()), cb.dim());
  for (size_t t = 0; t < indices.size(); ++t) {
    const int k = indices[t];
    require(k >= 0 && k < cb.size(), "codebook index " + std::to_string(k) + " out of range [0, " +
                                         std::to_string(cb.size()) + ")");
    q.codes.row(static_cast<Eigen::Index>(t)) = cb.entries.row(k);
  }
  return q;
}

}  // namespace holo::vq
