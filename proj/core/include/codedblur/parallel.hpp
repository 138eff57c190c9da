#pragma once

#include <functional>

namespace codedblur {

/// Caps the number of worker threads used by data-parallel loops.
/// 0 restores the hardware default. Results never depend on the cap:
/// every parallel loop writes disjoint output slots.
void set_max_workers(int workers);
int max_workers();

/// Runs fn(i) for i in [0, n) on up to max_workers() threads.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace codedblur
