#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace knng {

// Every tunable across the pipeline. A value of 0 on sigma / lambda bounds /
// max_degree0 / threads / kernel_budget_gib means "resolve automatically";
// resolved values are recorded next to the settings so a persisted snapshot
// reproduces the model bit-identically.
struct RunConfig {
  // kernel
  double alpha = 0.5;
  double sigma = 0.0;  // 0 = median heuristic
  double gamma = 0.1;

  // density / regularization
  std::vector<int> density_scales = {5, 10, 20};
  double lambda_min = 0.0;  // 0 = 0.01 * q
  double lambda_max = 0.0;  // 0 = 0.5 * q

  // solver
  double tol = 1e-6;
  int max_sweeps = 300;

  // consensus
  double self_weight_scale = 1.0;

  // index
  int M = 16;
  int max_degree0 = 0;  // 0 = 2M
  int ef_construction = 200;
  int ef_search = 1;

  // evaluation / execution
  int folds = 10;
  std::uint64_t seed = 42;
  bool normalize = false;
  unsigned threads = 0;            // 0 = machine parallelism
  double kernel_budget_gib = 0.0;  // 0 = 70% of available memory
  int baseline_k = 5;
  int baseline_ef = 32;
  bool f1_per_class = false;  // macro-F1 as mean of per-class F1 instead

  // resolved during training (not user settings)
  double resolved_sigma = 0.0;
  double resolved_lambda_min = 0.0;
  double resolved_lambda_max = 0.0;
  std::vector<double> normalize_mean;    // present when normalize is on
  std::vector<double> normalize_stddev;

  void validate() const;

  // Strict JSON round-trip: unknown keys are rejected.
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
};

// Bytes the kernel stage may allocate (kernel + Gram). 0 budget resolves to
// 70% of currently available physical memory.
std::size_t resolve_kernel_budget_bytes(double budget_gib);

}  // namespace knng
