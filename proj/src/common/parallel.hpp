#pragma once

#include <future>
#include <vector>

namespace odectrl {

// Runs f(0..n-1), possibly concurrently. Callers merge any shared state
// afterwards in index order, which keeps results deterministic.
template <class F>
void parallel_for_index(int n, F&& f) {
  if (n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i)
    futures.push_back(std::async(std::launch::async, [&f, i] { f(i); }));
  for (auto& fut : futures) fut.get();
}

}  // namespace odectrl
