#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace maxstable {

// Worker count: explicit value if positive, else MAXSTABLE_WORKERS, else 1.
int resolve_workers(int requested);

// Serial reference: fn(0), fn(1), ... in order.
template <class Fn>
auto serial_replicates(std::size_t count, Fn&& fn) {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
  return out;
}

// Runs fn(i) for i in [0, count) on `workers` OpenMP threads. Results are
// returned in index order, so any fn whose output depends only on i (e.g.
// through a per-index RNG stream) gives the same vector for every worker
// count. The first exception by index is rethrown after the loop.
template <class Fn>
auto parallel_replicates(std::size_t count, int workers, Fn&& fn) {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  if (workers <= 1 || count <= 1) return serial_replicates(count, fn);
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long long i = 0; i < n; ++i) {
    try {
      slots[static_cast<std::size_t>(i)].emplace(fn(static_cast<std::size_t>(i)));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace maxstable
