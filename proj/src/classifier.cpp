#include "knng/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "knng/consensus.hpp"
#include "knng/density.hpp"
#include "knng/distance.hpp"
#include "knng/errors.hpp"
#include "knng/kernel.hpp"
#include "knng/rng.hpp"
#include "knng/sparse_learner.hpp"

namespace knng {

IndexParams index_params_from_config(const RunConfig& cfg) {
  IndexParams p;
  p.M = cfg.M;
  p.max_degree0 = cfg.max_degree0;
  p.ef_construction = cfg.ef_construction;
  p.ef_search = cfg.ef_search;
  p.seed = cfg.seed + kLevelSeedOffset;
  return p;
}

int TrainedModel::predict(const double* q) const {
  if (config.normalize) {
    std::vector<double> scaled(q, q + index.d);
    apply_zscore(scaled, index.d, config.normalize_mean, config.normalize_stddev);
    return index.predict(scaled.data());
  }
  return index.predict(q);
}

ModelFile TrainedModel::to_file() const {
  ModelFile file;
  file.index = index;
  file.class_names = class_names;
  file.metadata_json = config.to_json();
  return file;
}

TrainedModel model_from_file(const ModelFile& file) {
  TrainedModel model;
  model.index = file.index;
  model.class_names = file.class_names;
  model.config = RunConfig::from_json(file.metadata_json);
  return model;
}

TrainedModel train(const Dataset& input, const RunConfig& cfg) {
  cfg.validate();
  input.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Dataset scaled;  // only populated when normalizing
  const Dataset* ds = &input;
  RunConfig resolved = cfg;
  if (cfg.normalize) {
    scaled = input;
    auto [mean, stddev] = zscore(scaled);
    resolved.normalize_mean = std::move(mean);
    resolved.normalize_stddev = std::move(stddev);
    ds = &scaled;
  }

  const std::size_t need = kernel_memory_bytes(ds->n);
  const std::size_t budget = resolve_kernel_budget_bytes(cfg.kernel_budget_gib);
  if (need > budget) {
    std::ostringstream msg;
    msg << "training at n=" << ds->n << " needs "
        << static_cast<double>(need) / (1024.0 * 1024.0 * 1024.0)
        << " GiB for the kernel and Gram matrices, over the memory budget of "
        << static_cast<double>(budget) / (1024.0 * 1024.0 * 1024.0)
        << " GiB; raise kernel_budget_gib or reduce the training set";
    throw DataError(msg.str());
  }

  KernelParams kp;
  kp.alpha = cfg.alpha;
  kp.gamma = cfg.gamma;
  kp.sigma = cfg.sigma > 0.0 ? cfg.sigma : resolve_sigma(*ds, cfg.seed + kSigmaSeedOffset);
  resolved.resolved_sigma = kp.sigma;

  const KernelMatrix K = build_kernel(*ds, kp, cfg.threads);
  const NeighborhoodSolver solver(K, cfg.threads);
  const auto& col_norms = solver.column_sq_norms();

  double lo = cfg.lambda_min, hi = cfg.lambda_max;
  if (lo == 0.0) std::tie(lo, hi) = default_lambda_bounds(solver.null_thresholds(), col_norms);
  resolved.resolved_lambda_min = lo;
  resolved.resolved_lambda_max = hi;
  const double min_norm = *std::min_element(col_norms.begin(), col_norms.end());
  if (lo >= min_norm) {
    std::ostringstream msg;
    msg << "lambda_min=" << lo << " violates the connectivity precondition lambda_min < "
        << "min_j ||K(.,j)||^2 = " << min_norm << "; isolated nodes would be possible";
    throw DataError(msg.str());
  }

  const DensityProfile profile = compute_density(*ds, cfg.density_scales, cfg.threads);
  const RegularizationSchedule sched = schedule_lambda(profile, lo, hi);

  SolveOptions opts;
  opts.tol = cfg.tol;
  opts.max_sweeps = cfg.max_sweeps;
  auto [W, trace] = solver.learn(sched, opts, cfg.threads);

  const ConsensusLabels labels = precompute_all(*ds, W, cfg.self_weight_scale);

  TrainedModel model;
  model.index = build_index(*ds, W, labels, index_params_from_config(cfg));
  model.class_names = ds->class_names;
  model.config = resolved;
  model.trace = std::move(trace);

  TrainingStats stats;
  double mean_kj = 0.0;
  for (int kj : W.optimal_k) {
    stats.kj_histogram[kj] += 1;
    mean_kj += kj;
  }
  stats.mean_kj = mean_kj / static_cast<double>(ds->n);
  stats.trace_sweeps = model.trace.sweeps_to_converge;
  stats.final_objective = model.trace.objective_per_sweep.empty()
                              ? 0.0
                              : model.trace.objective_per_sweep.back();
  stats.all_converged = model.trace.all_converged;
  stats.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  model.stats = std::move(stats);
  return model;
}

int baseline_bruteforce_knn(const Dataset& ds_train, const double* q, int k) {
  if (ds_train.n == 0) throw DataError("empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > ds_train.n) {
    throw DataError("k must be in [1, n]");
  }
  std::vector<std::pair<double, int>> dist(ds_train.n);
  for (std::size_t i = 0; i < ds_train.n; ++i) {
    dist[i] = {squared_l2(q, ds_train.row(i), ds_train.d), static_cast<int>(i)};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<int> votes(static_cast<std::size_t>(ds_train.c), 0);
  for (int i = 0; i < k; ++i) {
    votes[static_cast<std::size_t>(ds_train.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)])]++;
  }
  int best = 0;
  for (int cls = 1; cls < ds_train.c; ++cls) {
    if (votes[static_cast<std::size_t>(cls)] > votes[static_cast<std::size_t>(best)]) best = cls;
  }
  return best;
}

int baseline_static_hnsw(const Dataset& ds_train, const IndexParams& p, const double* q, int k) {
  const StaticHnswBaseline baseline(ds_train, p);
  return baseline.predict(q, k, p.ef_search);
}

}  // namespace knng
