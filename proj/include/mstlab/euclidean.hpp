#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mstlab/geometry.hpp"
#include "mstlab/graph.hpp"
#include "mstlab/mst.hpp"

namespace mstlab {

// All pairwise edges; the exact but quadratic candidate set.
inline WeightedGraph complete_graph(const std::vector<Point>& pts) {
  WeightedGraph g;
  g.n = int(pts.size());
  g.edges.reserve(std::size_t(g.n) * std::size_t(std::max(0, g.n - 1)) / 2);
  for (int u = 0; u < g.n; ++u)
    for (int v = u + 1; v < g.n; ++v)
      g.edges.push_back({u, v, dist(pts[std::size_t(u)], pts[std::size_t(v)])});
  return g;
}

// Median-split kd-tree over point indices; supports k-nearest-neighbor
// queries in any dimension.
class KdTree {
 public:
  explicit KdTree(const std::vector<Point>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), 0);
    if (!pts_.empty()) {
      d_ = pts_[0].dim();
      nodes_.reserve(pts_.size());
      root_ = build(0, int(pts_.size()), 0);
    }
  }

  // Indices of the k points nearest to pts[query], excluding query itself,
  // ordered by (distance, index).
  std::vector<int> nearest(int query, int k) const {
    // max-heap of (dist2, index) keeps the best k seen so far
    std::priority_queue<std::pair<double, int>> heap;
    search(root_, query, k, heap);
    std::vector<std::pair<double, int>> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    std::sort(out.begin(), out.end());
    std::vector<int> ids;
    ids.reserve(out.size());
    for (const auto& [d2, i] : out) {
      (void)d2;
      ids.push_back(i);
    }
    return ids;
  }

 private:
  struct Node {
    int point = -1;
    int left = -1;
    int right = -1;
    int axis = 0;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % d_;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) {
                       const double xa = pts_[std::size_t(a)][axis];
                       const double xb = pts_[std::size_t(b)][axis];
                       return xa != xb ? xa < xb : a < b;
                     });
    Node node;
    node.point = idx_[std::size_t(mid)];
    node.axis = axis;
    const int self = int(nodes_.size());
    nodes_.push_back(node);
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid + 1, hi, depth + 1);
    nodes_[std::size_t(self)].left = left;
    nodes_[std::size_t(self)].right = right;
    return self;
  }

  void search(int node, int query, int k,
              std::priority_queue<std::pair<double, int>>& heap) const {
    if (node == -1) return;
    const Node& nd = nodes_[std::size_t(node)];
    if (nd.point != query) {
      const double d2 = dist2(pts_[std::size_t(query)], pts_[std::size_t(nd.point)]);
      if (int(heap.size()) < k)
        heap.push({d2, nd.point});
      else if (d2 < heap.top().first ||
               (d2 == heap.top().first && nd.point < heap.top().second))
        heap.pop(), heap.push({d2, nd.point});
    }
    const double split =
        pts_[std::size_t(query)][nd.axis] - pts_[std::size_t(nd.point)][nd.axis];
    const int first = split <= 0.0 ? nd.left : nd.right;
    const int second = split <= 0.0 ? nd.right : nd.left;
    search(first, query, k, heap);
    if (int(heap.size()) < k || split * split <= heap.top().first)
      search(second, query, k, heap);
  }

  const std::vector<Point>& pts_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int d_ = 1;
};

// Symmetrized k-nearest-neighbor candidate edges, deduplicated.
inline std::vector<Edge> knn_edges(const std::vector<Point>& pts, const KdTree& tree, int k) {
  std::vector<Edge> edges;
  const int n = int(pts.size());
  edges.reserve(std::size_t(n) * std::size_t(k));
  for (int i = 0; i < n; ++i)
    for (int j : tree.nearest(i, k)) {
      const int u = std::min(i, j), v = std::max(i, j);
      edges.push_back({u, v, dist(pts[std::size_t(u)], pts[std::size_t(v)])});
    }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair{a.u, a.v} < std::pair{b.u, b.v};
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& a, const Edge& b) {
                            return a.u == b.u && a.v == b.v;
                          }),
              edges.end());
  return edges;
}

enum class MstStrategy { automatic, complete, knn };

namespace detail {

inline std::vector<std::pair<int, int>> edge_pairs(const SpanningTree& t) {
  std::vector<std::pair<int, int>> ps;
  ps.reserve(t.edges().size());
  for (const Edge& e : t.edges()) ps.push_back(normalized_ends(e));
  std::sort(ps.begin(), ps.end());
  return ps;
}

}  // namespace detail

// Euclidean minimum spanning tree.  The k-nearest-neighbor strategy starts at
// k = 8 (d = 2) or 14 (d = 3), doubles k until two consecutive rounds produce
// the same connected tree, and falls back to the complete graph at k >= n-1;
// the doubling stop is the verification step, so the result matches the
// complete-graph tree.
inline SpanningTree euclidean_mst(const std::vector<Point>& pts,
                                  MstStrategy strategy = MstStrategy::automatic) {
  const int n = int(pts.size());
  if (n == 0) return SpanningTree(0, {});
  if (n == 1) return SpanningTree(1, {});
  if (strategy == MstStrategy::complete) return kruskal_mst(complete_graph(pts));

  const int d = pts[0].dim();
  int k = d <= 2 ? 8 : (d == 3 ? 14 : 8 + 6 * (d - 2));
  k = std::min(k, n - 1);
  if (k == n - 1) return kruskal_mst(complete_graph(pts));

  const KdTree tree(pts);
  WeightedGraph g;
  g.n = n;
  g.edges = knn_edges(pts, tree, k);
  SpanningTree current = kruskal_mst(g);
  while (k < n - 1) {
    const int k2 = std::min(2 * k, n - 1);
    SpanningTree next =
        k2 == n - 1 ? kruskal_mst(complete_graph(pts))
                    : kruskal_mst(WeightedGraph{n, knn_edges(pts, tree, k2)});
    if (current.is_spanning() &&
        detail::edge_pairs(current) == detail::edge_pairs(next))
      return next;
    k = k2;
    current = std::move(next);
  }
  return current;
}

inline SpanningTree euclidean_mst(const Configuration& cfg,
                                  MstStrategy strategy = MstStrategy::automatic) {
  return euclidean_mst(cfg.points, strategy);
}

}  // namespace mstlab
