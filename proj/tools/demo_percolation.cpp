// Demo: percolation-style diagnostics.  Estimates a continuum two-arm
// probability over growing windows and prints the table, then checks one
// configuration for walls around the origin.

#include <cstdio>

#include "mstlab/percolation.hpp"

int main() {
  using namespace mstlab;

  const double r = 0.5;
  auto runner = [r](int n, double param, Rng& rng) {
    Point origin;
    origin.x.assign(2, 0.0);
    const Box window(origin, double(n));
    const Configuration cfg = sample_poisson(window, 1.0, rng);
    ArmQuery q;
    q.inner = ContactSet{Box(origin, 1.0), 0.0, {}};
    q.outer = window;
    q.r = param;
    q.k = 2;
    q.variant = ArmVariant::touch;
    return arm_event(cfg, q);
  };

  std::printf("two-arm probability, r=%.2f, unit intensity:\n", r);
  std::printf("%4s %10s %10s %22s\n", "n", "phat", "successes", "95%% interval");
  for (const ArmRow& row :
       estimate_arm_probability(runner, {4, 8, 16}, {r}, 400, 2026)) {
    std::printf("%4d %10.4f %10d       [%.4f, %.4f]\n", row.n, row.phat,
                row.successes, row.ci_lo, row.ci_hi);
  }

  // Wall query: is every pair of points straddling the annulus B(0,3)\B(0,1)
  // joined through it?
  Rng rng(11);
  Point origin;
  origin.x.assign(2, 0.0);
  const Box window(origin, 4.0);
  const Configuration cfg = sample_poisson(window, 2.0, rng);
  const Box k_region(origin, 3.5);
  const WallStatus status = has_wall(cfg, origin, 1.0, 3.0, k_region, 0.25);
  const char* text = status == WallStatus::yes       ? "yes"
                     : status == WallStatus::no      ? "no"
                                                     : "inconclusive";
  std::printf("wall between radius 1 and 3: %s\n", text);
  return 0;
}
