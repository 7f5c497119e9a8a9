#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mstlab/models.hpp"
#include "mstlab/stats.hpp"
#include "mstlab/stein.hpp"
#include "oracles.hpp"

using namespace mstlab;

namespace {

// resampling model backed by an explicit 2^n value table
ResamplingModel table_model(int n, std::vector<double> table) {
  ResamplingModel m;
  m.n_blocks = n;
  m.eval = [n, table = std::move(table)](const std::vector<std::uint8_t>& pick) {
    std::uint32_t mask = 0;
    for (int j = 0; j < n; ++j)
      if (pick[std::size_t(j)]) mask |= (1u << j);
    return table[mask];
  };
  return m;
}

}  // namespace

TEST_CASE("exact statistic matches the unreduced double sum", "[stein]") {
  Rng rng(401);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 1 + int(rng.uniform_int(7));
    std::vector<double> table(std::size_t(1) << n, 0.0);
    for (double& v : table) v = rng.uniform(-1.0, 1.0);
    const ResamplingModel model = table_model(n, table);
    const double got = exact_t_statistic(model);
    const double want = oracle::direct_t_statistic(
        n, [&](std::uint32_t mask) { return table[mask]; });
    REQUIRE(got == Catch::Approx(want).epsilon(1e-12).margin(1e-14));
  }
}

TEST_CASE("exact statistic of an additive functional", "[stein]") {
  // for f(x) = sum_j a_j x_j the statistic collapses to
  // half the sum of the squared coordinate jumps
  Rng rng(403);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + int(rng.uniform_int(9));
    std::vector<double> a(std::size_t(n), 0.0), base(std::size_t(n), 0.0),
        fresh(std::size_t(n), 0.0);
    for (int j = 0; j < n; ++j) {
      a[std::size_t(j)] = rng.uniform(-2.0, 2.0);
      base[std::size_t(j)] = rng.uniform(-1.0, 1.0);
      fresh[std::size_t(j)] = rng.uniform(-1.0, 1.0);
    }
    ResamplingModel m;
    m.n_blocks = n;
    m.eval = [&](const std::vector<std::uint8_t>& pick) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        s += a[std::size_t(j)] *
             (pick[std::size_t(j)] ? fresh[std::size_t(j)] : base[std::size_t(j)]);
      return s;
    };
    double want = 0.0;
    for (int j = 0; j < n; ++j) {
      const double jump =
          a[std::size_t(j)] * (base[std::size_t(j)] - fresh[std::size_t(j)]);
      want += 0.5 * jump * jump;
    }
    REQUIRE(exact_t_statistic(m) == Catch::Approx(want).epsilon(1e-12));
  }
  REQUIRE_THROWS_AS(exact_t_statistic(ResamplingModel{0, {}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(exact_t_statistic(ResamplingModel{21, {}}),
                    std::invalid_argument);
}

TEST_CASE("small models short-circuit to the exact value", "[stein]") {
  Rng rng(405);
  std::vector<double> table(1u << 5, 0.0);
  for (double& v : table) v = rng.next_unit();
  const ResamplingModel model = table_model(5, table);
  Rng sampler(1);
  const std::vector<double> got = sample_t(model, 64, sampler);
  REQUIRE(got.size() == 1);
  REQUIRE(got[0] == exact_t_statistic(model));
}

TEST_CASE("sampled statistic is unbiased on a wide additive model",
          "[stein]") {
  // 14 blocks forces the sampling path; the additive closed form gives truth
  const int n = 14;
  Rng rng(407);
  std::vector<double> base(std::size_t(n), 0.0), fresh(std::size_t(n), 0.0);
  for (int j = 0; j < n; ++j) {
    base[std::size_t(j)] = rng.uniform(-1.0, 1.0);
    fresh[std::size_t(j)] = rng.uniform(-1.0, 1.0);
  }
  ResamplingModel m;
  m.n_blocks = n;
  m.eval = [&](const std::vector<std::uint8_t>& pick) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += pick[std::size_t(j)] ? fresh[std::size_t(j)] : base[std::size_t(j)];
    return s;
  };
  double want = 0.0;
  for (int j = 0; j < n; ++j) {
    const double jump = base[std::size_t(j)] - fresh[std::size_t(j)];
    want += 0.5 * jump * jump;
  }
  Rng sampler(2);
  const std::vector<double> samples = sample_t(m, 20000, sampler);
  REQUIRE(samples.size() == 20000);
  const double got = mean_of(samples);
  const double se = std::sqrt(sample_variance(samples) / 20000.0);
  REQUIRE(std::abs(got - want) <= 4.0 * se + 1e-12);
}

TEST_CASE("the bound report is internally consistent", "[stein]") {
  const ModelFactory factory =
      lattice_edge_model_factory(1, 2, WeightLaw::uniform01());
  const SteinEstimate est = stein_bound(factory, 200, 8, 31);
  REQUIRE(est.n_blocks == 12);
  REQUIRE(est.exact_inner);
  REQUIRE(est.outer_reps == 200);
  REQUIRE(est.f_values.size() == 200);
  REQUIRE(est.sigma2_hat > 0.0);
  REQUIRE(est.t_var >= 0.0);
  REQUIRE(est.third_moment_hat > 0.0);
  // bound assembly from its own ingredients
  REQUIRE(est.bound_value ==
          Catch::Approx(std::sqrt(est.t_var) / est.sigma2_hat +
                        est.third_moment_hat /
                            (2.0 * std::pow(est.sigma2_hat, 1.5)))
              .epsilon(1e-13));
  REQUIRE(std::isfinite(est.se_bound_value));
  REQUIRE(est.se_t_mean > 0.0);

  // determinism across thread counts and reruns
  const SteinEstimate again = stein_bound(factory, 200, 8, 31);
  const SteinEstimate threaded = stein_bound(factory, 200, 8, 31, 3);
  REQUIRE(est.bound_value == again.bound_value);
  REQUIRE(est.bound_value == threaded.bound_value);
  REQUIRE(est.t_mean == threaded.t_mean);

  // a different seed moves the estimate
  const SteinEstimate moved = stein_bound(factory, 200, 8, 32);
  REQUIRE(moved.t_mean != est.t_mean);

  REQUIRE_THROWS_AS(stein_bound(factory, 1, 8, 31), std::invalid_argument);
  REQUIRE_THROWS_AS(stein_bound(factory, 200, 0, 31), std::invalid_argument);
}

TEST_CASE("mean of the statistic matches the variance of the functional",
          "[stein]") {
  // E T = Var f, checked on the 3x3 lattice with exact inner enumeration
  const ModelFactory factory =
      lattice_edge_model_factory(1, 2, WeightLaw::uniform01());
  const SteinEstimate est = stein_bound(factory, 500, 1, 77);
  const double gap = std::abs(est.t_mean - est.sigma2_hat);
  const double se =
      std::sqrt(est.se_t_mean * est.se_t_mean +
                est.se_sigma2_hat * est.se_sigma2_hat);
  REQUIRE(gap <= 3.0 * se);
}

TEST_CASE("degenerate functionals are refused", "[stein]") {
  const ModelFactory constant = [](std::uint64_t, std::uint64_t) {
    ResamplingModel m;
    m.n_blocks = 3;
    m.eval = [](const std::vector<std::uint8_t>&) { return 1.0; };
    return m;
  };
  REQUIRE_THROWS_AS(stein_bound(constant, 50, 4, 1),
                    degenerate_statistic_error);
}

TEST_CASE("poisson cell models resample cells independently", "[stein]") {
  const ModelFactory factory = poisson_cell_model_factory(1.5, 2.0, 2, 3);
  const ResamplingModel m = factory(11, 12);
  REQUIRE(m.n_blocks == 9);
  std::vector<std::uint8_t> none(9, 0);
  const double f0 = m.eval(none);
  REQUIRE(f0 > 0.0);
  REQUIRE(m.eval(none) == f0);  // pure function of the selection
  std::vector<std::uint8_t> all(9, 1);
  const double f1 = m.eval(all);
  REQUIRE(f1 != f0);
  // the all-fresh value equals the all-base value of the swapped model
  const ResamplingModel swapped = factory(12, 11);
  REQUIRE(swapped.eval(none) == f1);
  REQUIRE(swapped.eval(all) == f0);
  // single-cell selections move the value but stay in a sane range
  for (int c = 0; c < 9; ++c) {
    std::vector<std::uint8_t> one(9, 0);
    one[std::size_t(c)] = 1;
    const double fc = m.eval(one);
    REQUIRE(std::isfinite(fc));
  }
  REQUIRE_THROWS_AS(poisson_cell_model_factory(0.0, 1.0, 2, 3),
                    std::invalid_argument);
}

TEST_CASE("kolmogorov distance: pinned values and oracle agreement",
          "[stein]") {
  REQUIRE(kolmogorov_distance({0.0}) == 0.5);
  // two symmetric points: F_hat jumps to 1/2 at -1 and 1 at +1
  REQUIRE(kolmogorov_distance({-1.0, 1.0}) ==
          Catch::Approx(normal_cdf(1.0) - 0.5).epsilon(1e-14));
  Rng rng(409);
  for (int rep = 0; rep < 12; ++rep) {
    std::vector<double> xs;
    const int n = 1 + int(rng.uniform_int(200));
    for (int i = 0; i < n; ++i) xs.push_back(0.3 + 1.4 * rng.normal());
    REQUIRE(kolmogorov_distance(xs) ==
            Catch::Approx(oracle::naive_kolmogorov(xs)).epsilon(1e-12));
  }
  REQUIRE_THROWS_AS(kolmogorov_distance({}), std::invalid_argument);
}

TEST_CASE("wasserstein distance: pinned values and oracle agreement",
          "[stein]") {
  // a unit mass at zero is at mean absolute distance E|Z| from the normal
  REQUIRE(wasserstein_distance({0.0}) ==
          Catch::Approx(std::sqrt(2.0 / 3.14159265358979323846)).epsilon(1e-12));
  Rng rng(411);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> xs;
    const int n = 1 + int(rng.uniform_int(60));
    for (int i = 0; i < n; ++i) xs.push_back(-0.2 + 0.8 * rng.normal());
    REQUIRE(wasserstein_distance(xs) ==
            Catch::Approx(oracle::quadrature_wasserstein(xs)).epsilon(1e-7));
  }
  // translating a sample far away grows the distance without bound
  REQUIRE(wasserstein_distance({10.0, 11.0}) > 9.0);
  REQUIRE_THROWS_AS(wasserstein_distance({}), std::invalid_argument);
}

TEST_CASE("distance report bundles both metrics with the sample size",
          "[stein]") {
  Rng rng(413);
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(rng.normal());
  const DistanceReport rep = distance_report(xs);
  REQUIRE(rep.sample_size == 500);
  REQUIRE(rep.kolmogorov == kolmogorov_distance(xs));
  REQUIRE(rep.wasserstein == wasserstein_distance(xs));
  // a genuinely normal sample sits close to its target
  REQUIRE(rep.kolmogorov < 0.08);
  // the standard comparison between the two metrics, with finite-sample slack
  REQUIRE(rep.kolmogorov <=
          2.0 * std::sqrt(rep.wasserstein) + metric_relation_slack(500));
}

TEST_CASE("variance decomposition: additivity achieves equality", "[stein]") {
  const auto gauss = [](Rng& r) { return r.normal(); };
  const auto sum3 = [](const std::vector<double>& x) {
    return x[0] + x[1] + x[2];
  };
  const VarianceSplit split = variance_decomposition_check(
      3, gauss, sum3, {{0}, {1}, {2}}, 600, 24, 17);
  REQUIRE(split.per_group.size() == 3);
  // each coordinate explains about unit variance
  for (double v : split.per_group) REQUIRE(std::abs(v - 1.0) < 0.45);
  const double slack =
      3.0 * (split.total_se + split.explained_se) + 0.05 * split.total_variance;
  REQUIRE(std::abs(split.total_variance - split.explained_sum) <= slack);
}

TEST_CASE("variance decomposition: interactions leave residual variance",
          "[stein]") {
  const auto gauss = [](Rng& r) { return r.normal(); };
  // pure two-way interaction: each coordinate alone explains nothing
  const auto prod = [](const std::vector<double>& x) { return x[0] * x[1]; };
  const VarianceSplit split = variance_decomposition_check(
      2, gauss, prod, {{0}, {1}}, 600, 24, 19);
  const double slack = 3.0 * (split.total_se + split.explained_se);
  REQUIRE(split.explained_sum <= 0.0 + slack);
  REQUIRE(split.total_variance > 0.5);  // Var(X*Y) = 1

  REQUIRE_THROWS_AS(variance_decomposition_check(2, gauss, prod, {{0}, {0}},
                                                 600, 24, 19),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(variance_decomposition_check(2, gauss, prod, {{0}, {7}},
                                                 600, 24, 19),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(variance_decomposition_check(2, gauss, prod, {{0}, {1}},
                                                 2, 24, 19),
                    std::invalid_argument);
}
