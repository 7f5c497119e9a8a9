#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "mstlab/dynamics.hpp"
#include "mstlab/euclidean.hpp"
#include "mstlab/mst.hpp"
#include "oracles.hpp"

using namespace mstlab;

namespace {

// Checks every structural invariant of an insertion trace against freshly
// rebuilt intermediate trees, then compares the final tree with a
// from-scratch recomputation on the extended point set.
void check_trace(const std::vector<Point>& base, const Point& v) {
  const SpanningTree base_tree = euclidean_mst(base);
  const InsertionTrace trace = insert_vertex(base, base_tree, v);
  const int n = int(base.size());
  REQUIRE(trace.new_vertex == n);

  std::vector<Edge> current = base_tree.edges();
  double running = base_tree.total_weight();
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const InsertionStep& step = trace.steps[s];
    REQUIRE(step.k == int(s) + 1);
    // the added edge always touches the new vertex
    const int other = step.added.u == n ? step.added.v : step.added.u;
    REQUIRE((step.added.u == n || step.added.v == n));
    REQUIRE(other < n);

    if (s == 0) {
      // first round: no cycle, nothing removed, path_max is the edge weight
      REQUIRE_FALSE(step.removed.has_value());
      REQUIRE(step.path_max == step.added.w);
      running += step.added.w;
    } else {
      // later rounds: path_max is the minimax value in the tree so far
      const SpanningTree before(n + 1, current);
      REQUIRE(step.path_max ==
              Catch::Approx(before.minimax_value(n, other)).epsilon(1e-13));
      REQUIRE(step.removed.has_value());
      // the removed edge is the heaviest on the closed cycle
      REQUIRE(step.removed->w ==
              Catch::Approx(std::max(step.path_max, step.added.w))
                  .epsilon(1e-13));
      running += step.added.w - step.removed->w;
    }
    // apply the step to our shadow copy
    if (step.removed.has_value()) {
      const auto key = normalized_ends(*step.removed);
      const auto it = std::find_if(
          current.begin(), current.end(),
          [&](const Edge& e) { return normalized_ends(e) == key; });
      const bool removed_is_added =
          key == normalized_ends(step.added);
      if (!removed_is_added) {
        REQUIRE(it != current.end());
        current.erase(it);
        current.push_back(step.added);
      }
    } else {
      current.push_back(step.added);
    }
    REQUIRE(step.tree_weight == Catch::Approx(running).epsilon(1e-12));
  }

  // final tree must equal the from-scratch minimum spanning tree
  std::vector<Point> all = base;
  all.push_back(v);
  const SpanningTree direct = euclidean_mst(all);
  const SpanningTree incremental = trace.final_tree(n + 1);
  REQUIRE(detail::edge_pairs(incremental) == detail::edge_pairs(direct));
  REQUIRE(trace.final_weight ==
          Catch::Approx(direct.total_weight()).epsilon(1e-12));
}

}  // namespace

TEST_CASE("inserting the midpoint of a gap rewires the chain", "[dynamics]") {
  // base points 0, 1, 3 on a line: tree is 0-1 (weight 1) plus 1-3 (weight 2)
  const std::vector<Point> base = {point(0.0, 0.0), point(1.0, 0.0),
                                   point(3.0, 0.0)};
  const SpanningTree base_tree = euclidean_mst(base);
  REQUIRE(base_tree.total_weight() == 3.0);

  const InsertionTrace trace = insert_vertex(base, base_tree, point(2.0, 0.0));
  // new tree: 0-1, 1-v, v-3, total weight 3; the long 1-3 edge is gone
  REQUIRE(trace.final_weight == 3.0);
  bool saw_removed_long_edge = false;
  for (const InsertionStep& s : trace.steps)
    if (s.removed.has_value() && s.removed->w == 2.0)
      saw_removed_long_edge = true;
  REQUIRE(saw_removed_long_edge);
  check_trace(base, point(2.0, 0.0));
}

TEST_CASE("insertion far away attaches a single leaf", "[dynamics]") {
  const std::vector<Point> base = {point(0.0, 0.0), point(1.0, 0.0),
                                   point(0.0, 1.0)};
  const SpanningTree base_tree = euclidean_mst(base);
  const InsertionTrace trace =
      insert_vertex(base, base_tree, point(10.0, 0.0));
  // the far point connects to its nearest neighbor and nothing else changes
  REQUIRE(trace.final_weight ==
          Catch::Approx(base_tree.total_weight() + 9.0).epsilon(1e-14));
  const SpanningTree final_tree = trace.final_tree(4);
  REQUIRE(final_tree.degree(trace.new_vertex) == 1);
}

TEST_CASE("incremental insertion equals recomputation", "[dynamics]") {
  Rng rng(211);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = rep % 2 == 0 ? 2 : 3;
    const int n = 3 + int(rng.uniform_int(57));
    Rng p_rng = rng.derive(std::uint64_t(rep));
    const std::vector<Point> base = oracle::random_points(n, d, 4.0, p_rng);
    Point v;
    v.x.resize(std::size_t(d));
    for (int i = 0; i < d; ++i) v[i] = p_rng.uniform(-4.0, 4.0);
    check_trace(base, v);
  }
}

TEST_CASE("insertion input validation", "[dynamics]") {
  const std::vector<Point> base = {point(0.0, 0.0), point(1.0, 0.0)};
  const SpanningTree tree = euclidean_mst(base);
  REQUIRE_THROWS_AS(insert_vertex({}, SpanningTree{}, point(0.0, 0.0)),
                    std::invalid_argument);
  // dimension mismatch
  REQUIRE_THROWS_AS(insert_vertex(base, tree, point(0.0, 0.0, 0.0)),
                    std::invalid_argument);
  // neighbor index out of range / duplicated
  REQUIRE_THROWS_AS(insert_vertex(base, tree, point(0.5, 1.0), {0, 2}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(insert_vertex(base, tree, point(0.5, 1.0), {0, 0}),
                    std::invalid_argument);
  // base tree that does not span
  REQUIRE_THROWS_AS(
      insert_vertex(base, SpanningTree(2, {}), point(0.5, 1.0)),
      std::invalid_argument);
}

TEST_CASE("removal identity on a four-cycle", "[dynamics]") {
  // cycle 0-1-2-3-0 with weights 1, 2, 3, 4
  const WeightedGraph g{4,
                        {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}, {3, 0, 4.0}}};
  REQUIRE(kruskal_mst(g).total_weight() == 6.0);

  const RemovalReport rep = edge_removal_delta(g, 0);  // drop the weight-1 edge
  // without 0-1 the tree is forced: weight 9; reconnecting 0 to 1 costs 4
  REQUIRE(rep.weight_without == 9.0);
  REQUIRE(rep.reconnect_cost == 4.0);
  REQUIRE(rep.delta == -3.0);
  // the identity: M(g) = M(g-e) + w - max(w, Y)
  REQUIRE(6.0 == rep.weight_without + 1.0 - std::max(1.0, rep.reconnect_cost));
}

TEST_CASE("removal identity holds exactly on integer-weight graphs",
          "[dynamics]") {
  Rng rng(223);
  int non_bridge_seen = 0, bridge_seen = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 3 + int(rng.uniform_int(6));
    Rng g_rng = rng.derive(std::uint64_t(rep));
    const WeightedGraph g =
        oracle::random_connected_graph(n, 0.4, g_rng, /*integer=*/true);
    const double total = kruskal_mst(g).total_weight();
    for (std::size_t j = 0; j < g.edges.size(); ++j) {
      // bridge test: does the rest of the edge set still connect the ends?
      DisjointSets ds(n);
      for (std::size_t i = 0; i < g.edges.size(); ++i)
        if (i != j) ds.unite(g.edges[i].u, g.edges[i].v);
      const Edge& e = g.edges[j];
      if (ds.find(e.u) != ds.find(e.v)) {
        ++bridge_seen;
        REQUIRE_THROWS_AS(edge_removal_delta(g, j), bridge_error);
        continue;
      }
      ++non_bridge_seen;
      const RemovalReport rep_j = edge_removal_delta(g, j);
      // all quantities are small integers: the identity is exact
      REQUIRE(total ==
              rep_j.weight_without + e.w - std::max(e.w, rep_j.reconnect_cost));
      REQUIRE(rep_j.delta == e.w - std::max(e.w, rep_j.reconnect_cost));
      REQUIRE(rep_j.delta <= 0.0);
    }
  }
  REQUIRE(non_bridge_seen > 100);
  REQUIRE(bridge_seen > 10);
}

TEST_CASE("block resampling is a pure function of the seed", "[dynamics]") {
  Rng rng(227);
  const Box domain(point(0.0, 0.0), 4.0);
  const Configuration cfg = sample_poisson(domain, 1.5, rng);
  const Box block(point(1.0, -1.0), 1.0);

  const Configuration a = resample_block(cfg, block, 1.5, 42);
  const Configuration b = resample_block(cfg, block, 1.5, 42);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    for (int k = 0; k < 2; ++k) REQUIRE(a.points[i][k] == b.points[i][k]);

  // points outside the block are carried over untouched
  for (const Point& p : cfg.points)
    if (!block.contains(p)) {
      bool found = false;
      for (const Point& q : a.points) {
        bool same = true;
        for (int k = 0; k < 2; ++k) same = same && p[k] == q[k];
        found = found || same;
      }
      REQUIRE(found);
    }
  // no surviving point inside the block came from the original draw
  const Configuration c = resample_block(cfg, block, 1.5, 43);
  bool differs = c.points.size() != a.points.size();
  if (!differs)
    for (std::size_t i = 0; i < a.points.size(); ++i)
      for (int k = 0; k < 2; ++k)
        differs = differs || a.points[i][k] != c.points[i][k];
  REQUIRE(differs);

  // block sticking out of the domain is refused
  REQUIRE_THROWS_AS(resample_block(cfg, Box(point(4.0, 0.0), 1.0), 1.5, 1),
                    std::invalid_argument);
}

TEST_CASE("block and local deltas agree when the window is the domain",
          "[dynamics]") {
  Rng rng(229);
  const Box domain(point(0.0, 0.0), 3.0);
  const Configuration cfg = sample_poisson(domain, 2.0, rng);
  const Box block(point(0.5, 0.5), 1.0);

  const DeltaReport full = block_delta(cfg, block, 2.0, 7, 3);
  const DeltaReport local =
      local_delta(cfg, point(0.0, 0.0), 3.0, block, 2.0, 7, 3);
  REQUIRE(full.block_id == 3);
  REQUIRE(local.weight_before == full.weight_before);
  REQUIRE(local.weight_after == full.weight_after);
  REQUIRE(local.delta == full.delta);

  // a genuinely smaller window changes the weights but keeps the coupling
  const DeltaReport small =
      local_delta(cfg, point(0.5, 0.5), 1.5, block, 2.0, 7, 3);
  REQUIRE(small.weight_before <= full.weight_before);

  // block outside the window is refused
  REQUIRE_THROWS_AS(
      local_delta(cfg, point(-2.0, -2.0), 1.0, block, 2.0, 7, 3),
      std::invalid_argument);
}
