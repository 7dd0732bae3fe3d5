#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "knng/config.hpp"
#include "knng/dataset.hpp"
#include "knng/graph_index.hpp"
#include "knng/model_io.hpp"
#include "knng/sparse_learner.hpp"

namespace knng {

struct TrainingStats {
  std::map<int, int> kj_histogram;  // support size -> node count
  double mean_kj = 0.0;
  double build_seconds = 0.0;
  int trace_sweeps = 0;
  double final_objective = 0.0;
  bool all_converged = true;
};

struct TrainedModel {
  GraphIndex index;
  std::vector<std::string> class_names;
  RunConfig config;  // resolved snapshot, sufficient to reproduce the model
  TrainingStats stats;
  SolveTrace trace;

  // Predicts a class id for a raw query (normalization applied if the model
  // was trained with it).
  int predict(const double* q) const;

  ModelFile to_file() const;
};

// Full pipeline: kernel -> density -> lambda schedule -> neighborhood
// learning -> consensus labels -> graph build. Deterministic for a fixed
// (dataset, config) pair. The input dataset is copied when normalization is
// on. Fails up front when the kernel + Gram allocation would exceed the
// memory budget or when user lambda bounds violate the connectivity
// precondition lambda_min < min_j ||K(.,j)||^2.
TrainedModel train(const Dataset& ds, const RunConfig& cfg);

TrainedModel model_from_file(const ModelFile& file);

// Exact k-NN over the training set: unweighted majority vote, vote ties to
// the smallest class id, distance ties to the smallest index. Computes
// exactly n distance evaluations per call.
int baseline_bruteforce_knn(const Dataset& ds_train, const double* q, int k);

// Ablation baseline: plain HNSW index (no learned links, original labels)
// answering queries by beam search with ef = max(ef, k) plus majority vote.
struct StaticHnswBaseline {
  GraphIndex index;

  StaticHnswBaseline(const Dataset& ds_train, const IndexParams& p)
      : index(build_plain_index(ds_train, p)) {}

  int predict(const double* q, int k, int ef) const { return knn_vote(index, q, k, ef); }
};

// One-shot form mirroring the operation contract; builds the index per call.
int baseline_static_hnsw(const Dataset& ds_train, const IndexParams& p, const double* q, int k);

IndexParams index_params_from_config(const RunConfig& cfg);

}  // namespace knng
