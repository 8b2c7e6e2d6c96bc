// Index-ordered parallel map over independent work items.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace holopt {

/// Worker count for `requested` (0 = automatic), capped by HOLOPT_WORKERS.
unsigned worker_count(unsigned requested = 0);

/// Evaluates fn(i) for i in [0, n) and returns the results in index order, so
/// the output never depends on scheduling. The lowest-index exception, if
/// any, is rethrown after all workers finish.
template <class Fn>
auto parallel_map(std::size_t n, Fn&& fn, unsigned workers = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto threads =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(workers), n == 0 ? 1 : n));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace holopt
