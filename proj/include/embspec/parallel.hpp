#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace embspec {

/// Runs fn(worker, index) for every index in [0, count) on up to `workers`
/// threads. Exceptions are captured per index instead of propagating, so the
/// caller can examine them in index order.
template <typename Fn>
std::vector<std::exception_ptr> parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](unsigned worker, std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(worker, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (n == 1) {
    body(0, next);
    return errors;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) pool.emplace_back([&, w] { body(w, next); });
  pool.clear();  // joins
  return errors;
}

}  // namespace embspec
