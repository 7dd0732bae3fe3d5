#include "knng/graph_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "knng/distance.hpp"
#include "knng/errors.hpp"
#include "knng/rng.hpp"

namespace knng {

namespace {

using DistId = std::pair<double, int>;  // (distance, node id), totally ordered

// Best-first search on one layer. `visited` must be zeroed over the reachable
// id range. Returns the result pool sorted ascending.
std::vector<DistId> search_layer(const GraphIndex& idx, const double* q, int entry,
                                 int ef, int layer, std::vector<char>& visited) {
  std::priority_queue<DistId, std::vector<DistId>, std::greater<>> candidates;
  std::priority_queue<DistId, std::vector<DistId>, std::less<>> results;
  const double d0 = l2(q, idx.row(static_cast<std::size_t>(entry)), idx.d);
  candidates.push({d0, entry});
  results.push({d0, entry});
  visited[static_cast<std::size_t>(entry)] = 1;

  while (!candidates.empty()) {
    const DistId cur = candidates.top();
    if (static_cast<int>(results.size()) >= ef && cur > results.top()) break;
    candidates.pop();
    const auto& neigh =
        idx.links[static_cast<std::size_t>(cur.second)][static_cast<std::size_t>(layer)];
    for (int v : neigh) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      visited[static_cast<std::size_t>(v)] = 1;
      const double dv = l2(q, idx.row(static_cast<std::size_t>(v)), idx.d);
      const DistId cand{dv, v};
      if (static_cast<int>(results.size()) < ef || cand < results.top()) {
        candidates.push(cand);
        results.push(cand);
        if (static_cast<int>(results.size()) > ef) results.pop();
      }
    }
  }

  std::vector<DistId> out(results.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = results.top();
    results.pop();
  }
  return out;
}

// Greedy walk; moves only on strict improvement, so it cannot cycle.
int greedy_descend(const GraphIndex& idx, const double* q, int start, int layer,
                   double* dist_inout) {
  int cur = start;
  double best = *dist_inout;
  bool improved = true;
  while (improved) {
    improved = false;
    const auto& neigh = idx.links[static_cast<std::size_t>(cur)][static_cast<std::size_t>(layer)];
    for (int v : neigh) {
      const double dv = l2(q, idx.row(static_cast<std::size_t>(v)), idx.d);
      if (dv < best) {
        best = dv;
        cur = v;
        improved = true;
      }
    }
  }
  *dist_inout = best;
  return cur;
}

// Neighbor selection heuristic: keep a candidate when it is closer to the
// query than to every kept neighbor; pruned candidates refill remaining
// slots in distance order when fill_pruned is set.
std::vector<DistId> select_neighbors(const GraphIndex& idx, const std::vector<DistId>& pool,
                                     int m, bool fill_pruned) {
  std::vector<DistId> kept;
  std::vector<DistId> pruned;
  for (const auto& cand : pool) {
    if (static_cast<int>(kept.size()) >= m) break;
    bool good = true;
    for (const auto& r : kept) {
      const double dcr = l2(idx.row(static_cast<std::size_t>(cand.second)),
                            idx.row(static_cast<std::size_t>(r.second)), idx.d);
      if (dcr < cand.first) {
        good = false;
        break;
      }
    }
    if (good) {
      kept.push_back(cand);
    } else {
      pruned.push_back(cand);
    }
  }
  if (fill_pruned) {
    for (const auto& cand : pruned) {
      if (static_cast<int>(kept.size()) >= m) break;
      kept.push_back(cand);
    }
  }
  return kept;
}

struct Builder {
  const Dataset& ds;
  IndexParams p;
  bool learned_mode;
  GraphIndex idx;

  // Learned layer-0 demand. learned_edges[u] holds every v wired to u by the
  // sparse weights: v in u's truncated top-|w| set or u in v's. Protection
  // against eviction is membership here.
  std::vector<std::vector<int>> learned_edges;
  std::vector<std::unordered_set<int>> learned_set;
  std::vector<std::size_t> learned_sym_degree;  // untruncated symmetrized degree
  std::vector<char> visited;

  Builder(const Dataset& dset, const SparseWeights* W, const std::vector<int>& labels,
          const IndexParams& params, bool learned)
      : ds(dset), p(params), learned_mode(learned) {
    p.validate();
    if (ds.n == 0) throw DataError("cannot build an index from an empty dataset");
    p.max_degree0 = p.degree0();
    p.level_norm = p.m_level();

    idx.n = ds.n;
    idx.d = ds.d;
    idx.c = ds.c;
    idx.features = ds.features;
    idx.node_label = labels;
    idx.params = p;

    if (learned_mode) prepare_learned(*W);
    assign_levels();
    visited.assign(ds.n, 0);
  }

  void prepare_learned(const SparseWeights& W) {
    const std::size_t n = ds.n;
    std::vector<std::vector<std::pair<int, double>>> raw(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& e : W.columns[j]) {
        const auto i = static_cast<std::size_t>(e.index);
        const double w = std::abs(e.weight);
        raw[j].emplace_back(e.index, w);
        raw[i].emplace_back(static_cast<int>(j), w);
      }
    }
    const int cap = p.degree0();
    std::vector<std::vector<int>> truncated(n);
    for (std::size_t u = 0; u < n; ++u) {
      auto& pairs = raw[u];
      std::sort(pairs.begin(), pairs.end());
      std::vector<std::pair<double, int>> merged;  // (weight, id)
      for (const auto& [id, w] : pairs) {
        if (!merged.empty() && merged.back().second == id) {
          merged.back().first = std::max(merged.back().first, w);
        } else {
          merged.emplace_back(w, id);
        }
      }
      learned_sym_degree.push_back(merged.size());
      std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      if (static_cast<int>(merged.size()) > cap) merged.resize(static_cast<std::size_t>(cap));
      for (const auto& [w, id] : merged) truncated[u].push_back(id);
    }
    // An edge survives when either endpoint ranked it; collect per node.
    learned_edges.resize(n);
    learned_set.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      for (int v : truncated[u]) {
        if (learned_set[u].insert(v).second) learned_edges[u].push_back(v);
        const auto vu = static_cast<std::size_t>(v);
        if (learned_set[vu].insert(static_cast<int>(u)).second) {
          learned_edges[vu].push_back(static_cast<int>(u));
        }
      }
    }
    for (auto& list : learned_edges) std::sort(list.begin(), list.end());
  }

  void assign_levels() {
    Rng rng(p.seed);
    const double m_l = p.m_level();
    idx.level.resize(ds.n);
    idx.links.resize(ds.n);
    for (std::size_t j = 0; j < ds.n; ++j) {
      double u = rng.next_double();
      if (u < 0x1.0p-53) u = 0x1.0p-53;
      idx.level[j] = static_cast<int>(std::floor(-std::log(u) * m_l));
      idx.links[j].resize(static_cast<std::size_t>(idx.level[j]) + 1);
    }
  }

  bool edge_protected(int u, int v) const {
    return learned_mode && learned_set[static_cast<std::size_t>(u)].count(v) > 0;
  }

  static bool has_link(const std::vector<int>& list, int v) {
    return std::find(list.begin(), list.end(), v) != list.end();
  }

  std::vector<int>& links_of(int u, int layer) {
    return idx.links[static_cast<std::size_t>(u)][static_cast<std::size_t>(layer)];
  }

  void remove_edge(int u, int v, int layer) {
    auto& lu = links_of(u, layer);
    auto& lv = links_of(v, layer);
    lu.erase(std::remove(lu.begin(), lu.end(), v), lu.end());
    lv.erase(std::remove(lv.begin(), lv.end(), u), lv.end());
  }

  void add_edge(int u, int v, int layer) {
    if (u == v) return;
    auto& lu = links_of(u, layer);
    if (has_link(lu, v)) return;
    lu.push_back(v);
    links_of(v, layer).push_back(u);
  }

  double node_dist(int u, int v) const {
    return l2(idx.row(static_cast<std::size_t>(u)), idx.row(static_cast<std::size_t>(v)), idx.d);
  }

  // Upper layers keep the heuristic selection of M links; dropped edges
  // vanish from both endpoints.
  void shrink_upper(int u, int layer) {
    auto& lu = links_of(u, layer);
    if (static_cast<int>(lu.size()) <= p.M) return;
    std::vector<DistId> pool;
    pool.reserve(lu.size());
    for (int v : lu) pool.push_back({node_dist(u, v), v});
    std::sort(pool.begin(), pool.end());
    const auto kept = select_neighbors(idx, pool, p.M, true);
    std::unordered_set<int> keep;
    for (const auto& [dist, v] : kept) keep.insert(v);
    std::vector<int> to_drop;
    for (int v : lu) {
      if (!keep.count(v)) to_drop.push_back(v);
    }
    for (int v : to_drop) remove_edge(u, v, layer);
  }

  // (distance, id) of u's farthest evictable layer-0 link, or id -1.
  DistId worst_augmented0(int u) const {
    DistId worst{-1.0, -1};
    for (int v : idx.links[static_cast<std::size_t>(u)][0]) {
      if (edge_protected(u, v) || edge_protected(v, u)) continue;
      const DistId key{node_dist(u, v), v};
      if (key > worst) worst = key;
    }
    return worst;
  }

  void insert(int j) {
    const auto ju = static_cast<std::size_t>(j);
    const double* q = idx.row(ju);
    if (j == 0) {
      idx.entry_point = 0;
      idx.top_level = idx.level[0];
      return;
    }

    int cur = idx.entry_point;
    double dcur = l2(q, idx.row(static_cast<std::size_t>(cur)), idx.d);
    for (int layer = idx.top_level; layer > idx.level[ju]; --layer) {
      cur = greedy_descend(idx, q, cur, layer, &dcur);
    }

    for (int layer = std::min(idx.top_level, idx.level[ju]); layer >= 0; --layer) {
      std::fill(visited.begin(), visited.begin() + j, 0);
      auto pool = search_layer(idx, q, cur, p.ef_construction, layer, visited);
      if (layer >= 1) {
        const auto selected = select_neighbors(idx, pool, p.M, true);
        for (const auto& [dist, v] : selected) {
          add_edge(j, v, layer);
          shrink_upper(v, layer);
        }
      } else {
        wire_layer0(j, pool);
      }
      cur = pool.front().second;
    }

    if (idx.level[ju] > idx.top_level) {
      idx.top_level = idx.level[ju];
      idx.entry_point = j;
    }
  }

  void wire_layer0(int j, const std::vector<DistId>& pool) {
    const auto ju = static_cast<std::size_t>(j);
    const int cap = p.degree0();

    if (learned_mode) {
      for (int v : learned_edges[ju]) {
        if (v >= j) continue;  // not inserted yet; wired when v's turn comes
        add_edge(j, v, 0);
        // Make room at v by evicting its farthest augmented link; learned
        // edges may overflow the cap when nothing is evictable.
        if (static_cast<int>(links_of(v, 0).size()) > cap) {
          const DistId worst = worst_augmented0(v);
          if (worst.second >= 0) remove_edge(v, worst.second, 0);
        }
      }
    }

    const bool augment =
        !learned_mode || learned_sym_degree[ju] < static_cast<std::size_t>(p.M);
    if (!augment) return;

    auto& lj = links_of(j, 0);
    const auto selected = select_neighbors(idx, pool, cap, true);
    for (const auto& [dist, v] : selected) {
      if (static_cast<int>(lj.size()) >= cap) break;
      if (v == j || has_link(lj, v)) continue;
      if (static_cast<int>(links_of(v, 0).size()) >= cap) {
        // Admit only when this edge improves v's neighborhood.
        const DistId worst = worst_augmented0(v);
        if (worst.second < 0) continue;
        if (DistId{node_dist(v, j), j} >= worst) continue;
        remove_edge(v, worst.second, 0);
      }
      add_edge(j, v, 0);
    }
  }

  struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
      for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
  };

  void repair_connectivity() {
    UnionFind uf(ds.n);
    for (std::size_t u = 0; u < ds.n; ++u) {
      for (int v : idx.links[u][0]) uf.unite(static_cast<int>(u), v);
    }
    std::vector<std::vector<int>> comps;
    std::vector<int> root_to_comp(ds.n, -1);
    for (std::size_t u = 0; u < ds.n; ++u) {
      const int r = uf.find(static_cast<int>(u));
      if (root_to_comp[static_cast<std::size_t>(r)] < 0) {
        root_to_comp[static_cast<std::size_t>(r)] = static_cast<int>(comps.size());
        comps.emplace_back();
      }
      comps[static_cast<std::size_t>(root_to_comp[static_cast<std::size_t>(r)])].push_back(
          static_cast<int>(u));
    }
    if (comps.size() <= 1) return;

    std::size_t main_idx = 0;
    for (std::size_t i = 1; i < comps.size(); ++i) {
      if (comps[i].size() > comps[main_idx].size()) main_idx = i;
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (i == main_idx) continue;
      double best_dist = 0.0;
      int best_u = -1, best_v = -1;
      for (int u : comps[i]) {
        for (int v : comps[main_idx]) {
          const double dist = node_dist(u, v);
          if (best_u < 0 || dist < best_dist ||
              (dist == best_dist && std::pair{u, v} < std::pair{best_u, best_v})) {
            best_dist = dist;
            best_u = u;
            best_v = v;
          }
        }
      }
      add_edge(best_u, best_v, 0);  // repair edges bypass the degree cap
    }
  }

  GraphIndex finish() {
    for (std::size_t j = 0; j < ds.n; ++j) insert(static_cast<int>(j));
    repair_connectivity();
    double total = 0.0;
    for (std::size_t u = 0; u < ds.n; ++u) {
      total += static_cast<double>(idx.links[u][0].size());
    }
    idx.avg_degree = total / static_cast<double>(ds.n);
    return std::move(idx);
  }
};

int uf_find(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

void IndexParams::validate() const {
  if (M < 2) throw DataError("M must be at least 2");
  if (ef_construction < M) throw DataError("ef_construction must be >= M");
  if (ef_search < 1) throw DataError("ef_search must be >= 1");
  if (max_degree0 < 0) throw DataError("max_degree0 must be nonnegative");
  if (level_norm < 0.0) throw DataError("level_norm must be nonnegative");
}

double IndexParams::m_level() const {
  return level_norm > 0.0 ? level_norm : 1.0 / std::log(static_cast<double>(M));
}

int GraphIndex::search_nearest(const double* q, int ef) const {
  return search_pool(q, ef).front().second;
}

std::vector<std::pair<double, int>> GraphIndex::search_pool(const double* q, int ef) const {
  if (n == 0) throw DataError("empty index");
  if (ef < 1) throw DataError("ef must be >= 1");
  int cur = entry_point;
  double dcur = l2(q, row(static_cast<std::size_t>(cur)), d);
  for (int layer = top_level; layer >= 1; --layer) {
    cur = greedy_descend(*this, q, cur, layer, &dcur);
  }
  std::vector<char> visited(n, 0);
  return search_layer(*this, q, cur, ef, 0, visited);
}

int GraphIndex::predict(const double* q) const {
  return node_label[static_cast<std::size_t>(search_nearest(q, params.ef_search))];
}

GraphIndex build_index(const Dataset& ds, const SparseWeights& W,
                       const ConsensusLabels& labels, const IndexParams& p) {
  if (W.columns.size() != ds.n || labels.y_hat.size() != ds.n) {
    throw DataError("index inputs are dimensionally inconsistent");
  }
  Builder b(ds, &W, labels.y_hat, p, true);
  return b.finish();
}

GraphIndex build_plain_index(const Dataset& ds, const IndexParams& p) {
  Builder b(ds, nullptr, ds.labels, p, false);
  return b.finish();
}

int knn_vote(const GraphIndex& idx, const double* q, int k, int ef) {
  if (k < 1) throw DataError("k must be >= 1");
  const auto pool = idx.search_pool(q, std::max(ef, k));
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
  std::vector<int> votes(static_cast<std::size_t>(idx.c), 0);
  for (std::size_t i = 0; i < take; ++i) {
    votes[static_cast<std::size_t>(idx.node_label[static_cast<std::size_t>(pool[i].second)])]++;
  }
  int best = 0;
  for (int cls = 1; cls < idx.c; ++cls) {
    if (votes[static_cast<std::size_t>(cls)] > votes[static_cast<std::size_t>(best)]) best = cls;
  }
  return best;
}

std::size_t layer0_components(const GraphIndex& idx) {
  std::vector<int> parent(idx.n);
  for (std::size_t i = 0; i < idx.n; ++i) parent[i] = static_cast<int>(i);
  for (std::size_t u = 0; u < idx.n; ++u) {
    for (int v : idx.links[u][0]) {
      parent[static_cast<std::size_t>(uf_find(parent, static_cast<int>(u)))] = uf_find(parent, v);
    }
  }
  std::unordered_set<int> roots;
  for (std::size_t u = 0; u < idx.n; ++u) {
    roots.insert(uf_find(parent, static_cast<int>(u)));
  }
  return roots.size();
}

}  // namespace knng
