#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "knng/config.hpp"
#include "knng/dataset.hpp"

namespace knng {

struct ConfusionMatrix {
  std::vector<std::uint64_t> counts;  // row-major c x c, rows = true class
  int c = 0;

  explicit ConfusionMatrix(int classes = 0)
      : counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0),
        c(classes) {}

  std::uint64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(c) +
                  static_cast<std::size_t>(predicted)];
  }
  void add(int truth, int predicted) {
    counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(c) +
           static_cast<std::size_t>(predicted)]++;
  }
  std::uint64_t total() const;
};

struct MacroMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-class precision/recall with 0 on zero denominators, unweighted means
// over all classes. By default macro-F1 is the harmonic mean of the macro
// averages; f1_per_class switches to the mean of per-class F1 scores.
MacroMetrics macro_metrics(const ConfusionMatrix& cm, bool f1_per_class = false);
double accuracy(const ConfusionMatrix& cm);

struct FoldMetrics {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::uint64_t distance_evals = 0;  // during prediction only
  std::uint64_t test_count = 0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct MethodReport {
  std::string name;
  std::vector<FoldMetrics> per_fold;
  // Aggregates are the unweighted means of the per-fold values.
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double mean_distance_evals_per_query = 0.0;
  double total_train_seconds = 0.0;
  double total_predict_seconds = 0.0;

  void finalize();
};

struct EvalReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<MethodReport> methods;

  // Deterministic content only (metrics and distance counts); wall times are
  // reported on stdout and in the CSV, never in the JSON.
  std::string to_json() const;
  std::string to_csv() const;  // includes timing columns
  std::string to_table() const;
};

// Stratified F-fold cross-validation of the proposed method and, when
// with_baselines is set, brute-force kNN and static-HNSW voting on identical
// folds. Folds run sequentially so per-fold distance counts stay exact.
EvalReport cross_validate(const Dataset& ds, const RunConfig& cfg, bool with_baselines);

struct BenchModel {
  std::string name;
  std::function<int(const double*)> predict;
};

struct BenchRow {
  std::string name;
  std::size_t queries = 0;
  double distance_evals_per_query = 0.0;
  double median_seconds_per_query = 0.0;
  double total_seconds = 0.0;  // of the median-timing repeat
};

// Runs every model over the query block `repeats` times (>= 3), reporting
// exact per-query distance-evaluation counts and the median wall time.
// Timing passes are strictly sequential on the calling thread.
std::vector<BenchRow> bench_inference(const std::vector<BenchModel>& models,
                                      const std::vector<double>& queries, std::size_t d,
                                      int repeats);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace knng
