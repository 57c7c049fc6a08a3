#include "holo/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace holo {

void tune_allocator() {
#if defined(__GLIBC__)
  // Large Eigen temporaries would otherwise be mmap'd and unmapped per step.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // the largest value glibc accepts
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace holo
