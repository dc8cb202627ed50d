#pragma once

#include <functional>

namespace depthhints {

/// Caps the number of worker threads used by every parallel loop in the
/// library. 0 restores the default (all hardware threads).
void set_max_threads(int n);
int max_threads();

/// Calls body(i) for every i in [0,n). Iterations must not depend on each
/// other; results are then independent of scheduling.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace depthhints
