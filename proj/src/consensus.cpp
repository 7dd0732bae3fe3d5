#include "knng/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "knng/errors.hpp"

namespace knng {

int consensus_label(int own_label, const std::vector<std::pair<int, double>>& neighbors,
                    int num_classes, double self_weight_scale) {
  if (own_label < 0 || own_label >= num_classes) throw DataError("own label out of range");
  if (neighbors.empty()) return own_label;

  double w_self = 0.0;
  for (const auto& [cls, w] : neighbors) {
    if (cls < 0 || cls >= num_classes) throw DataError("neighbor label out of range");
    if (w < 0.0 || !std::isfinite(w)) throw DataError("vote weights must be nonnegative and finite");
    w_self = std::max(w_self, w);
  }
  w_self *= self_weight_scale;

  std::vector<double> mass(static_cast<std::size_t>(num_classes), 0.0);
  mass[static_cast<std::size_t>(own_label)] += w_self;
  for (const auto& [cls, w] : neighbors) mass[static_cast<std::size_t>(cls)] += w;

  int best = 0;
  for (int k = 1; k < num_classes; ++k) {
    if (mass[static_cast<std::size_t>(k)] > mass[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

ConsensusLabels precompute_all(const Dataset& ds, const SparseWeights& W,
                               double self_weight_scale) {
  if (W.columns.size() != ds.n) throw DataError("weight matrix order does not match dataset");

  ConsensusLabels out;
  out.y_hat.resize(ds.n);
  out.self_weight.resize(ds.n);
  std::vector<std::pair<int, double>> votes;
  for (std::size_t j = 0; j < ds.n; ++j) {
    votes.clear();
    double w_max = 0.0;
    for (const auto& e : W.columns[j]) {
      const double w = std::abs(e.weight);
      votes.emplace_back(ds.labels[static_cast<std::size_t>(e.index)], w);
      w_max = std::max(w_max, w);
    }
    out.self_weight[j] = w_max;
    out.y_hat[j] = consensus_label(ds.labels[j], votes, ds.c, self_weight_scale);
  }
  return out;
}

}  // namespace knng
