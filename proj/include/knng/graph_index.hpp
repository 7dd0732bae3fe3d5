#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "knng/consensus.hpp"
#include "knng/dataset.hpp"
#include "knng/sparse_learner.hpp"

namespace knng {

struct IndexParams {
  int M = 16;               // per-layer degree cap for layers >= 1
  int max_degree0 = 0;      // layer-0 cap; 0 means 2*M
  int ef_construction = 200;
  int ef_search = 1;        // query-time pool size; 1 is pure greedy descent
  double level_norm = 0.0;  // 0 means 1/ln(M)
  std::uint64_t seed = 0;   // level sampling

  void validate() const;
  int degree0() const { return max_degree0 > 0 ? max_degree0 : 2 * M; }
  double m_level() const;
};

// Multi-layer navigable graph over the training samples. Layer-0 adjacency is
// undirected and, in learned mode, a superset of each node's symmetrized
// learned neighbor set; the layer-0 graph is connected by construction.
// Immutable after build; concurrent queries are safe.
struct GraphIndex {
  std::size_t n = 0;
  std::size_t d = 0;
  int c = 0;
  std::vector<double> features;  // row-major n x d
  std::vector<int> node_label;   // consensus label (learned) or original (plain)
  std::vector<int> level;
  // links[u][layer] for layer in [0, level[u]]
  std::vector<std::vector<std::vector<int>>> links;
  int entry_point = -1;
  int top_level = 0;
  IndexParams params;
  double avg_degree = 0.0;  // layer-0 mean degree

  const double* row(std::size_t u) const { return features.data() + u * d; }

  // Greedy descent through the upper layers, then best-first layer-0 search
  // with pool size ef. Returns the id of the closest visited node; with
  // ef >= n on a connected graph this is the exact 1-NN.
  int search_nearest(const double* q, int ef) const;

  // Same search, returning the whole result pool sorted by (distance, id).
  std::vector<std::pair<double, int>> search_pool(const double* q, int ef) const;

  // node_label of search_nearest(q, params.ef_search); no extra distance
  // computations and no vote tallying after the search returns.
  int predict(const double* q) const;
};

// Learned wiring: layer 0 seeded with the symmetrized sparse-representation
// links (largest |w| first, truncated at degree0), augmented with standard
// HNSW-selected links up to degree0 wherever the learned degree is below M,
// then repaired to a single component via union-find plus nearest
// cross-component edges.
GraphIndex build_index(const Dataset& ds, const SparseWeights& W,
                       const ConsensusLabels& labels, const IndexParams& p);

// Ablation baseline: plain heuristic HNSW wiring on every layer, nodes carry
// the original training labels.
GraphIndex build_plain_index(const Dataset& ds, const IndexParams& p);

// Unweighted majority vote over the k best members of a beam search with
// pool size max(ef, k). Ties break to the smallest class id; distance ties
// to the smallest node id.
int knn_vote(const GraphIndex& idx, const double* q, int k, int ef);

// Number of connected components of the layer-0 graph (1 after repair).
std::size_t layer0_components(const GraphIndex& idx);

}  // namespace knng
