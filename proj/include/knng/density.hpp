#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "knng/dataset.hpp"

namespace knng {

struct DensityProfile {
  std::vector<double> rho;  // per sample, in [0, 1]
  std::vector<int> scales;  // neighborhood sizes used (after clipping)
};

struct RegularizationSchedule {
  std::vector<double> lambda;  // per sample
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// raw(j) = mean over scales s of 1 / (eps + mean distance to the s exact
// nearest neighbors), eps = 1e-12; rho is the min-max normalization of raw.
// All-equal raw maps to all 0.5. Scales are clipped to [1, n-1].
DensityProfile compute_density(const Dataset& ds, std::vector<int> scales,
                               unsigned threads = 0);

// lambda_j = lambda_min + (lambda_max - lambda_min) * (1 - rho_j).
RegularizationSchedule schedule_lambda(const DensityProfile& profile,
                                       double lambda_min, double lambda_max);

// Default bounds scaled to the solver's per-column null thresholds:
// lambda_max = 0.5 min_j T_j (so every column keeps at least one neighbor,
// with a 2x margin even for the most isolated sample) and
// lambda_min = 0.02 lambda_max, capped at 0.5 min_j ||K(.,j)||_2^2 so the
// connectivity precondition always holds.
std::pair<double, double> default_lambda_bounds(const std::vector<double>& null_thresholds,
                                                const std::vector<double>& col_sq_norms);

}  // namespace knng
