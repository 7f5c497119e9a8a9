#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "mstlab/config_io.hpp"
#include "mstlab/geometry.hpp"
#include "mstlab/graph.hpp"
#include "mstlab/rng.hpp"
#include "mstlab/stats.hpp"

using namespace mstlab;

TEST_CASE("streams are reproducible and splittable", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(42);
  Rng d1 = c.derive(1), d2 = c.derive(2);
  REQUIRE(d1.key() != d2.key());
  REQUIRE(d1.next_u64() != d2.next_u64());
  // deriving does not disturb the parent
  Rng c2(42);
  (void)c2.derive(1);
  Rng c3(42);
  REQUIRE(c2.next_u64() == c3.next_u64());
  // multi-key derivation is order-sensitive
  REQUIRE(Rng(7).derive(1, 2).key() != Rng(7).derive(2, 1).key());
}

TEST_CASE("unit doubles stay inside [0,1)", "[rng]") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_int covers its range uniformly", "[rng]") {
  Rng rng(5);
  std::vector<int> counts(7, 0);
  const int reps = 70000;
  for (int i = 0; i < reps; ++i) ++counts[std::size_t(rng.uniform_int(7))];
  for (int k = 0; k < 7; ++k) {
    // binomial(reps, 1/7): sd ~ sqrt(reps * (1/7)(6/7)) ~ 92.5
    REQUIRE(std::abs(counts[std::size_t(k)] - reps / 7) < 600);
  }
  REQUIRE_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
}

TEST_CASE("random_subset draws distinct indices of the right size", "[rng]") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + int(rng.uniform_int(20));
    const int m = int(rng.uniform_int(std::uint64_t(n) + 1));
    const std::vector<int> s = rng.random_subset(n, m);
    REQUIRE(int(s.size()) == m);
    std::set<int> seen(s.begin(), s.end());
    REQUIRE(int(seen.size()) == m);
    for (int v : s) {
      REQUIRE(v >= 0);
      REQUIRE(v < n);
    }
  }
}

TEST_CASE("exponential and normal draws have the right moments", "[rng]") {
  Rng rng(13);
  Moments exp_m, norm_m;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) exp_m.add(rng.exponential(2.0));
  for (int i = 0; i < reps; ++i) norm_m.add(rng.normal());
  // exponential(rate 2): mean 0.5, sd 0.5; allow 5 standard errors
  REQUIRE(std::abs(exp_m.mean - 0.5) < 5.0 * 0.5 / std::sqrt(double(reps)));
  REQUIRE(std::abs(norm_m.mean) < 5.0 / std::sqrt(double(reps)));
  REQUIRE(std::abs(norm_m.sd() - 1.0) < 0.02);
}

TEST_CASE("poisson counts match their mean", "[rng]") {
  Rng rng(17);
  Moments m;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) m.add(double(rng.poisson(3.0)));
  // sd of the estimator: sqrt(3/reps)
  REQUIRE(std::abs(m.mean - 3.0) < 5.0 * std::sqrt(3.0 / double(reps)));
  REQUIRE(rng.poisson(0.0) == 0);
  // large-mean chunked path stays sane
  Moments big;
  for (int i = 0; i < 2000; ++i) big.add(double(rng.poisson(900.0)));
  REQUIRE(std::abs(big.mean - 900.0) < 5.0 * std::sqrt(900.0 / 2000.0));
}

TEST_CASE("kahan summation survives cancellation", "[stats]") {
  KahanSum acc;
  acc.add(1e16);
  acc.add(1.0);
  acc.add(-1e16);
  REQUIRE(acc.value() == 1.0);
  KahanSum tenth;
  for (int i = 0; i < 10; ++i) tenth.add(0.1);
  REQUIRE(std::abs(tenth.value() - 1.0) < 1e-15);
}

TEST_CASE("moments match closed forms", "[stats]") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  REQUIRE(mean_of(xs) == 2.5);
  REQUIRE(std::abs(sample_variance(xs) - 5.0 / 3.0) < 1e-15);
  Moments m;
  m.add(1.0);
  REQUIRE_THROWS_AS(m.variance(), degenerate_statistic_error);
}

TEST_CASE("normal cdf, pdf and quantile are mutually consistent", "[stats]") {
  REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(normal_pdf(0.0) == Catch::Approx(0.3989422804014327).margin(1e-15));
  // symmetric tails
  REQUIRE(normal_cdf(-1.5) == Catch::Approx(1.0 - normal_cdf(1.5)).margin(1e-15));
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    REQUIRE(normal_quantile(normal_cdf(x)) == Catch::Approx(x).margin(1e-9));
  }
  REQUIRE_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("wilson interval brackets the point estimate", "[stats]") {
  const Interval ci = wilson_interval(80, 100);
  REQUIRE(ci.lo > 0.70);
  REQUIRE(ci.lo < 0.80);
  REQUIRE(ci.hi > 0.80);
  REQUIRE(ci.hi < 0.90);
  // extreme counts stay inside (0,1) at the open ends
  const Interval zero = wilson_interval(0, 50);
  REQUIRE(zero.lo == 0.0);
  REQUIRE(zero.hi > 0.0);
  const Interval full = wilson_interval(50, 50);
  REQUIRE(full.hi == 1.0);
  REQUIRE(full.lo < 1.0);
  REQUIRE_THROWS_AS(wilson_interval(1, 0), std::invalid_argument);
}

TEST_CASE("batch means standard error tracks iid theory", "[stats]") {
  Rng rng(23);
  std::vector<double> xs(4096);
  for (double& x : xs) x = rng.normal();
  const double se = batch_means_se(xs);
  const double iid = 1.0 / std::sqrt(4096.0);
  REQUIRE(se > iid / 2.0);
  REQUIRE(se < iid * 2.0);
}

TEST_CASE("weighted least squares recovers an exact line", "[stats]") {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {2.0, -1.0, -4.0, -7.0};  // y = 2 - 3x
  const std::vector<double> w = {1.0, 2.0, 3.0, 4.0};
  const WlsFit fit = wls_fit(x, y, w);
  REQUIRE(fit.slope == Catch::Approx(-3.0).margin(1e-12));
  REQUIRE(fit.intercept == Catch::Approx(2.0).margin(1e-12));
  REQUIRE_THROWS_AS(wls_fit({1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}),
                    degenerate_statistic_error);
}

TEST_CASE("box distances match hand-computed values", "[geometry]") {
  const Box unit(point(0.0, 0.0), 1.0);
  REQUIRE(dist_to_box(point(3.0, 0.0), unit) == 2.0);
  REQUIRE(dist_to_box(point(2.0, 2.0), unit) == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(dist_to_box(point(0.5, -0.5), unit) == 0.0);
  REQUIRE(unit.contains(point(1.0, 1.0)));  // closed box
  REQUIRE_FALSE(unit.contains(point(1.0 + 1e-12, 0.0)));
  REQUIRE(unit.volume() == 4.0);

  REQUIRE(in_dilation(point(1.5, 0.0), unit, 0.5));
  REQUIRE_FALSE(in_dilation(point(1.6, 0.0), unit, 0.5));
  REQUIRE(in_inner_shell(point(0.9, 0.0), unit, 0.2));
  REQUIRE_FALSE(in_inner_shell(point(0.7, 0.0), unit, 0.2));
  REQUIRE_FALSE(in_inner_shell(point(1.1, 0.0), unit, 0.2));  // outside the box
}

TEST_CASE("poisson sampling respects domain, intensity and distinctness",
          "[geometry]") {
  const Box window(point(0.0, 0.0), 2.0);
  Moments counts;
  std::set<std::vector<double>> all_seen;
  for (int rep = 0; rep < 2000; ++rep) {
    Rng rng(std::uint64_t(rep) + 1);
    const Configuration cfg = sample_poisson(window, 0.75, rng);
    counts.add(double(cfg.size()));
    for (const Point& p : cfg.points) {
      REQUIRE(window.contains(p));
      REQUIRE(all_seen.insert(p.x).second);  // distinct across the whole run
    }
  }
  // mean count = 0.75 * 16 = 12; sd of estimate = sqrt(12/2000)
  REQUIRE(std::abs(counts.mean - 12.0) < 5.0 * std::sqrt(12.0 / 2000.0));

  Rng rng(1);
  REQUIRE(sample_poisson(window, 0.0, rng).size() == 0);
  const Box huge(point(0.0, 0.0), 1e6);
  REQUIRE_THROWS_AS(sample_poisson(huge, 1e7, rng), std::invalid_argument);
}

TEST_CASE("configuration serialization round-trips exactly", "[io]") {
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    const double hw = 0.5 + 3.0 * rng.next_unit();
    const Box window(point(rng.normal(), rng.normal()), hw);
    Rng draw = rng.derive(std::uint64_t(rep));
    const Configuration cfg = sample_poisson(window, 2.0, draw);
    std::ostringstream out;
    write_configuration(out, cfg);
    std::istringstream in(out.str());
    const Configuration back = read_configuration(in);
    REQUIRE(back.domain.half_width == cfg.domain.half_width);
    REQUIRE(back.domain.center.x == cfg.domain.center.x);
    REQUIRE(back.points.size() == cfg.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i)
      REQUIRE(back.points[i].x == cfg.points[i].x);  // bitwise equality
  }
  std::istringstream bad("2 3\n0 0 1\n0.5 0.5\n");  // promises 3 points, has 1
  REQUIRE_THROWS(read_configuration(bad));
}

TEST_CASE("graph serialization and validation", "[io]") {
  WeightedGraph g;
  g.n = 4;
  g.edges = {{0, 1, 1.25}, {1, 2, 0.5}, {2, 3, 1e-17}, {0, 3, 7.0}};
  std::ostringstream out;
  write_graph(out, g);
  std::istringstream in(out.str());
  const WeightedGraph back = read_graph(in);
  REQUIRE(back.n == g.n);
  REQUIRE(back.edges.size() == g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    REQUIRE(back.edges[i].u == g.edges[i].u);
    REQUIRE(back.edges[i].v == g.edges[i].v);
    REQUIRE(back.edges[i].w == g.edges[i].w);
  }

  WeightedGraph loop{2, {{0, 0, 1.0}}};
  REQUIRE_THROWS_AS(validate_graph(loop), std::invalid_argument);
  WeightedGraph range{2, {{0, 2, 1.0}}};
  REQUIRE_THROWS_AS(validate_graph(range), std::invalid_argument);
}
