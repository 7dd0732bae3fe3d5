#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "knng/density.hpp"
#include "knng/kernel.hpp"

namespace knng {

struct SparseEntry {
  int index;
  double weight;
};

// Column-sparse self-representation matrix. Entries are post-normalization:
// per nonzero column the absolute weights sum to 1, signs preserved, and the
// own index never appears.
struct SparseWeights {
  std::vector<std::vector<SparseEntry>> columns;  // per column, index-ascending
  std::vector<int> optimal_k;                     // support size per column
};

struct SolveTrace {
  // Aggregated objective after each full sweep, entry 0 being the value at
  // the zero start. Columns that converge early contribute their final value
  // to later sweeps.
  std::vector<double> objective_per_sweep;
  // First sweep where the aggregated objective's relative decrease drops
  // below tol; -1 when that never happens within the sweep budget.
  int sweeps_to_converge = -1;
  bool all_converged = false;
};

struct SolveOptions {
  double tol = 1e-6;    // relative objective decrease per sweep
  int max_sweeps = 300;
};

// S(z, t) = sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t);

// Shared Gram-matrix state for the per-column solves. Building it costs one
// n x n matrix product; afterwards each column solve touches only the rows
// of the active coordinates. The per-column Lasso null thresholds
// 2 max_{i != j} |K(.,i)^T K(.,j)| come out of the same product, which is
// what the automatic lambda bounds are scaled to.
class NeighborhoodSolver {
 public:
  NeighborhoodSolver(const KernelMatrix& K, unsigned threads = 0);
  ~NeighborhoodSolver();
  NeighborhoodSolver(NeighborhoodSolver&&) noexcept;
  NeighborhoodSolver& operator=(NeighborhoodSolver&&) noexcept;

  std::size_t order() const;
  // ||K(.,j)||_2^2 (the Gram diagonal).
  const std::vector<double>& column_sq_norms() const;
  // Per-column lambda above which the solution is exactly zero.
  const std::vector<double>& null_thresholds() const;

  std::vector<SparseEntry> solve(std::size_t j, double lambda, const SolveOptions& opts = {},
                                 std::vector<double>* objective_out = nullptr,
                                 bool* converged = nullptr) const;

  std::pair<SparseWeights, SolveTrace> learn(const RegularizationSchedule& sched,
                                             const SolveOptions& opts, unsigned threads) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Cyclic coordinate descent for
//   min_w ||K(.,j) - K w||_2^2 + lambda ||w||_1   s.t. w_j = 0,
// updating w_i <- S(g_i, lambda/2) / ||K(.,i)||_2^2 in ascending index order
// from a zero start. Returns the raw optimum (no pruning, no normalization),
// index-ascending. The result satisfies the Lasso KKT conditions to 1e-6.
// When objective_out is non-null it receives the per-sweep objective values.
std::vector<SparseEntry> solve_column(const KernelMatrix& K, std::size_t j,
                                      double lambda, const SolveOptions& opts = {},
                                      std::vector<double>* objective_out = nullptr);

// Runs solve_column for every j with its scheduled lambda, prunes entries
// with |w| < 1e-10, L1-normalizes each nonzero column by absolute value, and
// aggregates the per-column traces deterministically.
std::pair<SparseWeights, SolveTrace> learn_neighborhoods(const KernelMatrix& K,
                                                         const RegularizationSchedule& sched,
                                                         const SolveOptions& opts = {},
                                                         unsigned threads = 0);

}  // namespace knng
