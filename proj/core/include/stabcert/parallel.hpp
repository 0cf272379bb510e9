#pragma once

#include <cstddef>
#include <functional>

namespace stabcert {

// Number of worker threads for embarrassingly parallel sweeps. Respects the
// STABCERT_THREADS environment variable; defaults to the hardware count.
unsigned parallel_thread_count();

// Run fn(i) for i in [0, n). Results must be written to caller-owned slots
// indexed by i, so the outcome is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace stabcert
