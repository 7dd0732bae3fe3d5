#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace knng {

// Every Euclidean distance in the library funnels through squared_l2, so the
// counter below is an exact record of metric evaluations. Complexity claims
// are asserted on these counts; wall time is secondary evidence.
inline std::atomic<std::uint64_t> distance_eval_count{0};

inline std::uint64_t distance_evals() {
  return distance_eval_count.load(std::memory_order_relaxed);
}

inline void reset_distance_evals() {
  distance_eval_count.store(0, std::memory_order_relaxed);
}

inline double squared_l2(const double* a, const double* b, std::size_t d) {
  distance_eval_count.fetch_add(1, std::memory_order_relaxed);
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double l2(const double* a, const double* b, std::size_t d) {
  return std::sqrt(squared_l2(a, b, d));
}

}  // namespace knng
