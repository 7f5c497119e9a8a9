#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mstlab/errors.hpp"
#include "mstlab/graph.hpp"
#include "mstlab/stats.hpp"

namespace mstlab {

// Comparator shared by every tree construction: weight first, then the
// normalized endpoint pair, so equal-weight inputs resolve identically on
// every run and platform.
inline bool edge_order(const Edge& a, const Edge& b) {
  if (a.w != b.w) return a.w < b.w;
  return normalized_ends(a) < normalized_ends(b);
}

// A rooted forest with a binary-lifting index for path maxima.  Construction
// is O(n log n); minimax_value answers in O(log n).
class SpanningTree {
 public:
  SpanningTree() = default;

  SpanningTree(int vertex_count, std::vector<Edge> edges)
      : n_(vertex_count), edges_(std::move(edges)) {
    if (int(edges_.size()) > std::max(0, n_ - 1))
      throw std::invalid_argument("SpanningTree: too many edges for a forest");
    build();
  }

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int component_count() const { return components_; }
  bool is_spanning() const { return components_ <= 1; }

  // Compensated sum of edge weights.
  double total_weight() const { return total_weight_; }

  int component_of(int v) const { return comp_[std::size_t(v)]; }

  int max_degree() const {
    int best = 0;
    for (int v = 0; v < n_; ++v) best = std::max(best, degree_[std::size_t(v)]);
    return best;
  }

  int degree(int v) const { return degree_[std::size_t(v)]; }

  // Maximum edge weight on the unique tree path between u and v; 0 for u == v.
  // The minimax connection cost of the underlying graph by the path-optimality
  // of minimum spanning trees.
  double minimax_value(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_)
      throw std::invalid_argument("minimax_value: vertex out of range");
    if (u == v) return 0.0;
    if (comp_[std::size_t(u)] != comp_[std::size_t(v)])
      throw no_path_error("minimax_value: vertices in different components");
    double best = 0.0;
    if (depth_[std::size_t(u)] < depth_[std::size_t(v)]) std::swap(u, v);
    int diff = depth_[std::size_t(u)] - depth_[std::size_t(v)];
    for (int j = 0; diff != 0; ++j, diff >>= 1)
      if (diff & 1) {
        best = std::max(best, upmax_[std::size_t(j)][std::size_t(u)]);
        u = up_[std::size_t(j)][std::size_t(u)];
      }
    if (u == v) return best;
    for (int j = levels_ - 1; j >= 0; --j) {
      if (up_[std::size_t(j)][std::size_t(u)] != up_[std::size_t(j)][std::size_t(v)]) {
        best = std::max({best, upmax_[std::size_t(j)][std::size_t(u)],
                         upmax_[std::size_t(j)][std::size_t(v)]});
        u = up_[std::size_t(j)][std::size_t(u)];
        v = up_[std::size_t(j)][std::size_t(v)];
      }
    }
    return std::max({best, upmax_[0][std::size_t(u)], upmax_[0][std::size_t(v)]});
  }

 private:
  void build() {
    validate_tree_edges();
    KahanSum acc;
    for (const Edge& e : edges_) acc.add(e.w);
    total_weight_ = acc.value();

    std::vector<std::vector<std::pair<int, double>>> adj(std::size_t(n_), std::vector<std::pair<int, double>>{});
    degree_.assign(std::size_t(n_), 0);
    for (const Edge& e : edges_) {
      adj[std::size_t(e.u)].push_back({e.v, e.w});
      adj[std::size_t(e.v)].push_back({e.u, e.w});
      ++degree_[std::size_t(e.u)];
      ++degree_[std::size_t(e.v)];
    }

    comp_.assign(std::size_t(n_), -1);
    depth_.assign(std::size_t(n_), 0);
    std::vector<int> parent(std::size_t(n_), -1);
    std::vector<double> parent_w(std::size_t(n_), 0.0);
    components_ = 0;
    std::vector<int> stack;
    int max_depth = 0;
    for (int root = 0; root < n_; ++root) {
      if (comp_[std::size_t(root)] != -1) continue;
      comp_[std::size_t(root)] = components_;
      stack.push_back(root);
      while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        for (const auto& [b, w] : adj[std::size_t(a)]) {
          if (comp_[std::size_t(b)] != -1) continue;
          comp_[std::size_t(b)] = components_;
          parent[std::size_t(b)] = a;
          parent_w[std::size_t(b)] = w;
          depth_[std::size_t(b)] = depth_[std::size_t(a)] + 1;
          max_depth = std::max(max_depth, depth_[std::size_t(b)]);
          stack.push_back(b);
        }
      }
      ++components_;
    }

    levels_ = 1;
    while ((1 << levels_) <= max_depth) ++levels_;
    up_.assign(std::size_t(levels_), std::vector<int>(std::size_t(n_)));
    upmax_.assign(std::size_t(levels_), std::vector<double>(std::size_t(n_), 0.0));
    for (int v = 0; v < n_; ++v) {
      up_[0][std::size_t(v)] = parent[std::size_t(v)] == -1 ? v : parent[std::size_t(v)];
      upmax_[0][std::size_t(v)] = parent[std::size_t(v)] == -1 ? 0.0 : parent_w[std::size_t(v)];
    }
    for (int j = 1; j < levels_; ++j)
      for (int v = 0; v < n_; ++v) {
        const int mid = up_[std::size_t(j - 1)][std::size_t(v)];
        up_[std::size_t(j)][std::size_t(v)] = up_[std::size_t(j - 1)][std::size_t(mid)];
        upmax_[std::size_t(j)][std::size_t(v)] =
            std::max(upmax_[std::size_t(j - 1)][std::size_t(v)],
                     upmax_[std::size_t(j - 1)][std::size_t(mid)]);
      }
  }

  void validate_tree_edges() const {
    DisjointSets ds(n_);
    for (const Edge& e : edges_) {
      if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
        throw std::invalid_argument("SpanningTree: endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("SpanningTree: self loop");
      if (!ds.unite(e.u, e.v))
        throw std::invalid_argument("SpanningTree: edges contain a cycle");
    }
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  double total_weight_ = 0.0;
  int components_ = 0;
  int levels_ = 1;
  std::vector<int> comp_;
  std::vector<int> depth_;
  std::vector<int> degree_;
  std::vector<std::vector<int>> up_;
  std::vector<std::vector<double>> upmax_;
};

// Kruskal over edges ordered by edge_order.  Disconnected inputs yield a
// minimum spanning forest (component_count > 1 on the result).
inline SpanningTree kruskal_mst(const WeightedGraph& g) {
  validate_graph(g);
  std::vector<int> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return edge_order(g.edges[std::size_t(a)], g.edges[std::size_t(b)]);
  });
  DisjointSets ds(g.n);
  std::vector<Edge> chosen;
  chosen.reserve(std::size_t(std::max(0, g.n - 1)));
  for (int idx : order) {
    const Edge& e = g.edges[std::size_t(idx)];
    if (ds.unite(e.u, e.v)) {
      chosen.push_back(e);
      if (int(chosen.size()) == g.n - 1) break;
    }
  }
  return SpanningTree(g.n, std::move(chosen));
}

}  // namespace mstlab
