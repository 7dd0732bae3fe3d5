#pragma once

#include <utility>
#include <vector>

#include "knng/dataset.hpp"
#include "knng/sparse_learner.hpp"

namespace knng {

struct ConsensusLabels {
  std::vector<int> y_hat;          // per node, in [0, c)
  std::vector<double> self_weight; // max |w| over the node's neighbors, 0 if none
};

// Weighted mode over the node's own label (mass self_weight_scale * max
// neighbor weight) and its neighbors. Empty neighbor list returns own_label.
// Ties break to the smallest class id. Weights must be nonnegative and finite.
int consensus_label(int own_label, const std::vector<std::pair<int, double>>& neighbors,
                    int num_classes, double self_weight_scale = 1.0);

// Applies consensus_label to every column of W using |w_ij| vote masses.
ConsensusLabels precompute_all(const Dataset& ds, const SparseWeights& W,
                               double self_weight_scale = 1.0);

}  // namespace knng
