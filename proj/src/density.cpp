#include "knng/density.hpp"

#include <algorithm>
#include <cmath>

#include "knng/distance.hpp"
#include "knng/errors.hpp"
#include "knng/threading.hpp"

namespace knng {

DensityProfile compute_density(const Dataset& ds, std::vector<int> scales, unsigned threads) {
  if (ds.n < 2) throw DataError("density needs at least 2 samples");
  if (scales.empty()) throw DataError("density needs at least one scale");
  const int max_allowed = static_cast<int>(ds.n) - 1;
  for (auto& s : scales) {
    if (s < 1) throw DataError("density scales must be >= 1");
    s = std::min(s, max_allowed);
  }
  const int s_max = *std::max_element(scales.begin(), scales.end());
  constexpr double kEps = 1e-12;

  std::vector<double> raw(ds.n, 0.0);
  parallel_for(0, ds.n, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> dist(ds.n - 1);
    for (std::size_t j = lo; j < hi; ++j) {
      std::size_t m = 0;
      for (std::size_t i = 0; i < ds.n; ++i) {
        if (i == j) continue;
        dist[m++] = l2(ds.row(j), ds.row(i), ds.d);
      }
      std::partial_sort(dist.begin(), dist.begin() + s_max, dist.end());
      // Prefix sums over the sorted head give every scale's mean distance.
      double acc = 0.0;
      std::vector<double> prefix(static_cast<std::size_t>(s_max));
      for (int t = 0; t < s_max; ++t) {
        acc += dist[static_cast<std::size_t>(t)];
        prefix[static_cast<std::size_t>(t)] = acc;
      }
      double sum_inv = 0.0;
      for (int s : scales) {
        const double mean_dist = prefix[static_cast<std::size_t>(s - 1)] / s;
        sum_inv += 1.0 / (kEps + mean_dist);
      }
      raw[j] = sum_inv / static_cast<double>(scales.size());
    }
  });

  DensityProfile profile;
  profile.scales = std::move(scales);
  profile.rho.resize(ds.n);
  const auto [mn_it, mx_it] = std::minmax_element(raw.begin(), raw.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx == mn) {
    std::fill(profile.rho.begin(), profile.rho.end(), 0.5);
  } else {
    for (std::size_t j = 0; j < ds.n; ++j) profile.rho[j] = (raw[j] - mn) / (mx - mn);
  }
  return profile;
}

RegularizationSchedule schedule_lambda(const DensityProfile& profile,
                                       double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max)) {
    throw DataError("need 0 < lambda_min < lambda_max");
  }
  RegularizationSchedule sched;
  sched.lambda_min = lambda_min;
  sched.lambda_max = lambda_max;
  sched.lambda.resize(profile.rho.size());
  for (std::size_t j = 0; j < profile.rho.size(); ++j) {
    sched.lambda[j] = lambda_min + (lambda_max - lambda_min) * (1.0 - profile.rho[j]);
  }
  return sched;
}

std::pair<double, double> default_lambda_bounds(const std::vector<double>& null_thresholds,
                                                const std::vector<double>& col_sq_norms) {
  if (null_thresholds.empty() || col_sq_norms.size() != null_thresholds.size()) {
    throw DataError("lambda bound inputs are empty or inconsistent");
  }
  const double min_threshold = *std::min_element(null_thresholds.begin(), null_thresholds.end());
  const double min_norm = *std::min_element(col_sq_norms.begin(), col_sq_norms.end());
  if (!(min_threshold > 0.0)) throw DataError("degenerate kernel: zero null threshold");
  const double lambda_max = 0.5 * min_threshold;
  const double lambda_min = std::min(0.02 * lambda_max, 0.5 * min_norm);
  return {lambda_min, lambda_max};
}

}  // namespace knng
