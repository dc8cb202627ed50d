#include "depthhints/parallel.hpp"

#include <memory>
#include <mutex>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

namespace depthhints {

namespace {

std::mutex g_control_mutex;
std::unique_ptr<tbb::global_control> g_control;

}  // namespace

void set_max_threads(int n) {
  std::lock_guard lock(g_control_mutex);
  g_control.reset();
  if (n > 0)
    g_control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                      static_cast<std::size_t>(n));
}

int max_threads() {
  return static_cast<int>(
      tbb::global_control::active_value(tbb::global_control::max_allowed_parallelism));
}

void parallel_for(int n, const std::function<void(int)>& body) {
  if (n <= 0) return;
  if (n == 1 || max_threads() <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<int>(0, n), [&](const tbb::blocked_range<int>& r) {
    for (int i = r.begin(); i != r.end(); ++i) body(i);
  });
}

}  // namespace depthhints
