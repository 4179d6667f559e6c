#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace eslab {

/// Explicit request if given, else $ESLAB_THREADS, else the hardware count.
/// Always at least 1.
std::size_t resolve_thread_count(std::optional<std::size_t> requested = std::nullopt);

/// Calls fn(k) for k in [0, trials) on up to `threads` workers and returns
/// the results indexed by k. Work is claimed dynamically, but since every
/// result lands in its own slot the output never depends on scheduling. The
/// first exception thrown by any call is rethrown after all workers stop.
template <class Fn>
auto run_trials(std::size_t trials, std::size_t threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<Result>> slots(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= trials) return;
      try {
        slots[k].emplace(fn(k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, trials));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Result> out;
  out.reserve(trials);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace eslab
