#include "holo/tensor.hpp"

namespace holo {

SeqBatch concat_channels(std::initializer_list<const SeqBatch*> parts) {
  require(parts.size() > 0, "concat_channels: no inputs");
  const SeqBatch& first = **parts.begin();
  int total = 0;
  for (const SeqBatch* p : parts) {
    require(p->batch == first.batch && p->steps == first.steps, "concat_channels: shape mismatch");
    total += p->channels();
  }
  SeqBatch out(first.batch, first.steps, total);
  int offset = 0;
  for (const SeqBatch* p : parts) {
    out.data.middleCols(offset, p->channels()) = p->data;
    offset += p->channels();
  }
  return out;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace holo
