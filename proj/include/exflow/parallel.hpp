#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace exflow {

// Global worker count for the parallel maps; 0 means "ask the hardware".
void set_thread_count(int threads);
int thread_count();

// Deterministic parallel map: fn(i) must write only to state owned by index i.
// Results are identical for any worker count because work is partitioned by
// index, never by scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace exflow
