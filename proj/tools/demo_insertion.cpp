// Demo: incremental MST maintenance.  Samples a small Poisson configuration,
// builds its Euclidean MST, then inserts one more point and prints the
// add-and-delete trace: each offered neighbor either joins the tree (evicting
// the heaviest edge on the cycle it closes) or leaves it unchanged.

#include <cstdio>

#include "mstlab/dynamics.hpp"
#include "mstlab/euclidean.hpp"
#include "mstlab/geometry.hpp"

int main() {
  using namespace mstlab;

  Rng rng(7);
  const Box window(point(0.0, 0.0), 4.0);
  Configuration cfg = sample_poisson(window, 1.5, rng);
  std::printf("sampled %d points in [-4,4]^2\n", cfg.size());

  const SpanningTree base = euclidean_mst(cfg.points);
  std::printf("base tree: %zu edges, total weight %.6f\n", base.edges().size(),
              base.total_weight());

  const Point fresh = point(0.25, -0.35);
  const InsertionTrace trace = insert_vertex(cfg.points, base, fresh);
  std::printf("inserting (%.2f, %.2f): %zu offered neighbors\n", fresh[0], fresh[1],
              trace.steps.size());
  for (const InsertionStep& s : trace.steps) {
    if (s.removed)
      std::printf("  k=%2d add {%d,%d} drop {%d,%d}  path_max=%.6f  weight=%.6f\n",
                  s.k, s.added.u, s.added.v, s.removed->u, s.removed->v, s.path_max,
                  s.tree_weight);
    else
      std::printf("  k=%2d add {%d,%d}              path_max=%.6f  weight=%.6f\n",
                  s.k, s.added.u, s.added.v, s.path_max, s.tree_weight);
  }
  std::printf("final tree weight %.6f\n", trace.final_weight);

  // The trace must agree with recomputing the MST from scratch.
  std::vector<Point> extended = cfg.points;
  extended.push_back(fresh);
  const SpanningTree direct = euclidean_mst(extended);
  std::printf("direct recompute    %.6f\n", direct.total_weight());
  return 0;
}
