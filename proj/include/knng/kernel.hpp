#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "knng/dataset.hpp"

namespace knng {

struct KernelParams {
  double alpha = 0.5;  // mixing weight between feature and class similarity
  double sigma = 0.0;  // Gaussian bandwidth; must be resolved (> 0) before build
  double gamma = 0.1;  // class-mismatch discount

  void validate() const;  // throws DataError; requires sigma already resolved
};

// Dense symmetric composite similarity matrix. Entries lie in (0, 1] and the
// diagonal is exactly 1.
struct KernelMatrix {
  std::vector<double> values;  // row-major n x n
  std::size_t n = 0;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  // Row i and column i are the same buffer by symmetry.
  const double* column(std::size_t j) const { return values.data() + j * n; }
};

// Median heuristic over a uniform subsample of min(n, 1000) samples. Falls
// back to the mean nonzero distance when the median is 0 (duplicate-heavy
// data) and to 1 when every distance is 0.
double resolve_sigma(const Dataset& ds, std::uint64_t seed = 0);

// K[i][j] = alpha * exp(-||x_i - x_j||^2 / (2 sigma^2))
//         + (1 - alpha) * (y_i == y_j ? 1 : gamma)
// Each pair is computed once, so symmetry is exact.
KernelMatrix build_kernel(const Dataset& ds, const KernelParams& p, unsigned threads = 0);

// ||K(.,j)||_2^2 for every column.
std::vector<double> column_squared_norms(const KernelMatrix& K);

// Combined bytes for the kernel plus its Gram matrix at order n; the training
// pipeline refuses to start when this exceeds the configured budget instead
// of thrashing.
std::size_t kernel_memory_bytes(std::size_t n);

}  // namespace knng
