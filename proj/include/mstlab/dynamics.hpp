#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "mstlab/errors.hpp"
#include "mstlab/euclidean.hpp"
#include "mstlab/geometry.hpp"
#include "mstlab/graph.hpp"
#include "mstlab/mst.hpp"

namespace mstlab {

// One round of the incremental insertion: edge {v, p_k} goes in, and when a
// cycle forms its heaviest edge comes out.  path_max records the maximum
// weight on the tree path from v to p_k before the edge was added (for the
// first round, the weight of the added edge itself).
struct InsertionStep {
  int k = 0;
  Edge added;
  std::optional<Edge> removed;
  double path_max = 0.0;
  double tree_weight = 0.0;
};

struct InsertionTrace {
  std::vector<InsertionStep> steps;
  int new_vertex = 0;             // id assigned to the inserted point
  std::vector<Edge> tree_edges;   // final tree
  double final_weight = 0.0;

  SpanningTree final_tree(int vertex_count) const {
    return SpanningTree(vertex_count, tree_edges);
  }
};

namespace detail {

// Path between two vertices in a tree given as an edge list; returns edge
// indices along the path.  Linear scan BFS — the dynamic tree is tiny.
inline std::vector<int> tree_path(int n, const std::vector<Edge>& edges, int from, int to) {
  std::vector<std::vector<std::pair<int, int>>> adj(std::size_t(n), std::vector<std::pair<int, int>>{});  // (neighbor, edge idx)
  for (int i = 0; i < int(edges.size()); ++i) {
    adj[std::size_t(edges[std::size_t(i)].u)].push_back({edges[std::size_t(i)].v, i});
    adj[std::size_t(edges[std::size_t(i)].v)].push_back({edges[std::size_t(i)].u, i});
  }
  std::vector<int> via_edge(std::size_t(n), -1), via_vertex(std::size_t(n), -1);
  std::vector<char> seen(std::size_t(n), 0);
  std::vector<int> stack{from};
  seen[std::size_t(from)] = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    if (a == to) break;
    for (const auto& [b, idx] : adj[std::size_t(a)]) {
      if (seen[std::size_t(b)]) continue;
      seen[std::size_t(b)] = 1;
      via_edge[std::size_t(b)] = idx;
      via_vertex[std::size_t(b)] = a;
      stack.push_back(b);
    }
  }
  if (!seen[std::size_t(to)]) throw no_path_error("tree_path: no connection");
  std::vector<int> path;
  for (int at = to; at != from; at = via_vertex[std::size_t(at)])
    path.push_back(via_edge[std::size_t(at)]);
  return path;
}

}  // namespace detail

// Inserts a point into a Euclidean minimum spanning tree by repeated
// add-and-delete: candidate edges {v, p_k} are offered in order of increasing
// distance from v; each addition closes a cycle whose heaviest edge is then
// removed (the new edge itself when it is the heaviest, leaving the tree
// unchanged; among path edges, ties resolve by edge_order).  With the full
// base set as neighbors the result is the minimum spanning tree of the
// extended point set; with a restricted list it is the minimum spanning tree
// of the base tree's edges plus the offered edges.
inline InsertionTrace insert_vertex(const std::vector<Point>& base_points,
                                    const SpanningTree& base_tree, const Point& v,
                                    std::vector<int> neighbor_indices) {
  const int n = int(base_points.size());
  if (n == 0) throw std::invalid_argument("insert_vertex: empty base set");
  if (base_tree.vertex_count() != n || !base_tree.is_spanning())
    throw std::invalid_argument("insert_vertex: base tree does not span the base set");
  if (neighbor_indices.empty())
    throw std::invalid_argument("insert_vertex: no candidate neighbors");
  std::set<int> unique_check;
  for (int idx : neighbor_indices) {
    if (idx < 0 || idx >= n)
      throw std::invalid_argument("insert_vertex: neighbor outside the base set");
    if (!unique_check.insert(idx).second)
      throw std::invalid_argument("insert_vertex: duplicate neighbor");
  }
  if (v.dim() != base_points[0].dim())
    throw std::invalid_argument("insert_vertex: dimension mismatch");

  std::sort(neighbor_indices.begin(), neighbor_indices.end(), [&](int a, int b) {
    const double da = dist(v, base_points[std::size_t(a)]);
    const double db = dist(v, base_points[std::size_t(b)]);
    return da != db ? da < db : a < b;
  });

  InsertionTrace trace;
  trace.new_vertex = n;
  std::vector<Edge> tree = base_tree.edges();
  KahanSum weight;
  for (const Edge& e : tree) weight.add(e.w);

  for (int k = 1; k <= int(neighbor_indices.size()); ++k) {
    const int p = neighbor_indices[std::size_t(k - 1)];
    const Edge candidate{n, p, dist(v, base_points[std::size_t(p)])};
    InsertionStep step;
    step.k = k;
    step.added = candidate;
    if (k == 1) {
      step.path_max = candidate.w;
      tree.push_back(candidate);
      weight.add(candidate.w);
    } else {
      const std::vector<int> path = detail::tree_path(n + 1, tree, n, p);
      int heaviest = path.front();
      for (int idx : path)
        if (edge_order(tree[std::size_t(heaviest)], tree[std::size_t(idx)]))
          heaviest = idx;
      step.path_max = tree[std::size_t(heaviest)].w;
      if (candidate.w >= step.path_max) {
        step.removed = candidate;  // added edge is the heaviest in its cycle
      } else {
        step.removed = tree[std::size_t(heaviest)];
        weight.add(-tree[std::size_t(heaviest)].w);
        weight.add(candidate.w);
        tree[std::size_t(heaviest)] = candidate;
      }
    }
    step.tree_weight = weight.value();
    trace.steps.push_back(step);
  }
  trace.tree_edges = std::move(tree);
  trace.final_weight = weight.value();
  return trace;
}

// Convenience form: every base point is a candidate neighbor.
inline InsertionTrace insert_vertex(const std::vector<Point>& base_points,
                                    const SpanningTree& base_tree, const Point& v) {
  std::vector<int> all(base_points.size());
  for (int i = 0; i < int(all.size()); ++i) all[std::size_t(i)] = i;
  return insert_vertex(base_points, base_tree, v, std::move(all));
}

// ---------------------------------------------------------------------------
// Effect of removing one edge.

struct RemovalReport {
  double delta = 0.0;           // M(g) - M(g - e), always <= 0
  double reconnect_cost = 0.0;  // minimax value between the endpoints in g - e
  double weight_without = 0.0;  // M(g - e)
};

// M(g) = M(g-e) + w(e) - max(w(e), Y) where Y is the minimax connection cost
// of e's endpoints once e is gone.  Removing a bridge is refused: there is no
// reconnection, so the identity has no meaning there.
inline RemovalReport edge_removal_delta(const WeightedGraph& g, std::size_t edge_index) {
  validate_graph(g);
  if (edge_index >= g.edges.size())
    throw std::invalid_argument("edge_removal_delta: edge index out of range");
  WeightedGraph rest;
  rest.n = g.n;
  rest.edges.reserve(g.edges.size() - 1);
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (i != edge_index) rest.edges.push_back(g.edges[i]);
  const Edge& e = g.edges[edge_index];
  DisjointSets ds(g.n);
  for (const Edge& r : rest.edges) ds.unite(r.u, r.v);
  if (ds.find(e.u) != ds.find(e.v))
    throw bridge_error("edge_removal_delta: edge is a bridge");
  const SpanningTree rest_tree = kruskal_mst(rest);
  RemovalReport rep;
  rep.reconnect_cost = rest_tree.minimax_value(e.u, e.v);
  rep.weight_without = rest_tree.total_weight();
  rep.delta = e.w - std::max(e.w, rep.reconnect_cost);
  return rep;
}

// ---------------------------------------------------------------------------
// Block resampling of Poisson configurations.

struct DeltaReport {
  double delta = 0.0;
  int block_id = 0;
  double weight_before = 0.0;
  double weight_after = 0.0;
};

// Replaces the points inside `block` by a fresh Poisson draw keyed only by
// (resample_seed), so callers holding the same seed rebuild the identical
// fresh pattern — the coupling device behind every paired delta below.
inline Configuration resample_block(const Configuration& cfg, const Box& block,
                                    double intensity, std::uint64_t resample_seed) {
  if (block.dim() != cfg.dim())
    throw std::invalid_argument("resample_block: dimension mismatch");
  for (int i = 0; i < block.dim(); ++i)
    if (std::abs(block.center[i] - cfg.domain.center[i]) + block.half_width >
        cfg.domain.half_width + 1e-12)
      throw std::invalid_argument("resample_block: block leaves the domain");
  Configuration out;
  out.domain = cfg.domain;
  for (const Point& p : cfg.points)
    if (!block.contains(p)) out.points.push_back(p);
  Rng rng = Rng(resample_seed).derive(0x626c6f636bull);  // block stream
  Configuration fresh = sample_poisson(block, intensity, rng);
  for (Point& p : fresh.points) out.points.push_back(std::move(p));
  return out;
}

// M(before) - M(after) when one block is resampled.
inline DeltaReport block_delta(const Configuration& cfg, const Box& block,
                               double intensity, std::uint64_t resample_seed,
                               int block_id = 0,
                               MstStrategy strategy = MstStrategy::automatic) {
  const Configuration after = resample_block(cfg, block, intensity, resample_seed);
  DeltaReport rep;
  rep.block_id = block_id;
  rep.weight_before = euclidean_mst(cfg, strategy).total_weight();
  rep.weight_after = euclidean_mst(after, strategy).total_weight();
  rep.delta = rep.weight_before - rep.weight_after;
  return rep;
}

// Same resample, but the spanning trees are built only from points inside the
// window box(center, radius); the localized surrogate for block_delta.
inline DeltaReport local_delta(const Configuration& cfg, const Point& center,
                               double radius, const Box& block, double intensity,
                               std::uint64_t resample_seed, int block_id = 0,
                               MstStrategy strategy = MstStrategy::automatic) {
  const Box window(center, radius);
  for (int i = 0; i < block.dim(); ++i)
    if (std::abs(block.center[i] - window.center[i]) + block.half_width >
        window.half_width + 1e-12)
      throw std::invalid_argument("local_delta: block leaves the window");
  const Configuration after = resample_block(cfg, block, intensity, resample_seed);
  auto restrict_pts = [&](const Configuration& c) {
    std::vector<Point> inside;
    for (const Point& p : c.points)
      if (window.contains(p)) inside.push_back(p);
    return inside;
  };
  DeltaReport rep;
  rep.block_id = block_id;
  rep.weight_before = euclidean_mst(restrict_pts(cfg), strategy).total_weight();
  rep.weight_after = euclidean_mst(restrict_pts(after), strategy).total_weight();
  rep.delta = rep.weight_before - rep.weight_after;
  return rep;
}

}  // namespace mstlab
