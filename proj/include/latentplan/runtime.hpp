#pragma once

namespace lp {

// Keeps freed heap memory mapped between encoder calls. The large, short-lived
// activation buffers otherwise go back to the kernel after every batch and
// page-fault on the next one. Safe to call more than once; no-op off glibc.
void tune_allocator();

}  // namespace lp
