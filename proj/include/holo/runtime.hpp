#pragma once

namespace holo {

// Keeps freed training buffers in the heap instead of returning them to the
// kernel on every step. Call once at the start of main().
void tune_allocator();

}  // namespace holo
