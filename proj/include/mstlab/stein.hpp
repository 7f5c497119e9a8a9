#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mstlab/errors.hpp"
#include "mstlab/parallel.hpp"
#include "mstlab/rng.hpp"
#include "mstlab/stats.hpp"

namespace mstlab {

// A functional of independent blocks together with a fixed pair of draws:
// eval(selection) returns f with the selected blocks replaced by their fresh
// counterparts.  Both draws are pinned at construction, so eval is a pure
// function of the selection.
struct ResamplingModel {
  int n_blocks = 0;
  std::function<double(const std::vector<std::uint8_t>&)> eval;
};

using ModelFactory =
    std::function<ResamplingModel(std::uint64_t base_seed, std::uint64_t fresh_seed)>;

namespace detail {

inline std::vector<double> memo_eval_all(const ResamplingModel& model) {
  const int n = model.n_blocks;
  std::vector<double> val(std::size_t(1) << n);
  std::vector<std::uint8_t> pick(std::size_t(n), 0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (int j = 0; j < n; ++j) pick[std::size_t(j)] = (mask >> j) & 1u;
    val[mask] = model.eval(pick);
  }
  return val;
}

}  // namespace detail

// The resampling statistic evaluated exactly: every proper selection A and
// every unselected block j contribute
// [f(X)-f(X^j)] [f(X^A)-f(X^{A+j})] / (C(n,|A|)(n-|A|)), halved at the end.
// 2^n evaluations, so only small block counts qualify.
inline double exact_t_statistic(const ResamplingModel& model) {
  const int n = model.n_blocks;
  if (n < 1 || n > 20)
    throw std::invalid_argument("exact_t_statistic: needs 1 <= n_blocks <= 20");
  const std::vector<double> val = detail::memo_eval_all(model);
  std::vector<double> log_choose(std::size_t(n) + 1);
  for (int m = 1; m <= n; ++m)
    log_choose[std::size_t(m)] = log_choose[std::size_t(m - 1)] +
                                 std::log(double(n - m + 1)) - std::log(double(m));
  const std::uint32_t full = (1u << n) - 1u;
  KahanSum total;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    const int size = __builtin_popcount(mask);
    const double denom =
        std::exp(log_choose[std::size_t(size)]) * double(n - size);
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      total.add((val[0] - val[1u << j]) * (val[mask] - val[mask | (1u << j)]) / denom);
    }
  }
  return 0.5 * total.value();
}

// Monte Carlo samples of the statistic: draw |A| uniform on {0,...,n-1}, A
// uniform among that size, J uniform outside A; the sample
// (n/2) [f(X)-f(X^J)] [f(X^A)-f(X^{A+J})] is unbiased for the full sum.
// Small models (n_blocks <= 12) skip sampling and return the exact value.
inline std::vector<double> sample_t(const ResamplingModel& model, int inner_reps,
                                    Rng& rng) {
  const int n = model.n_blocks;
  if (n < 1) throw std::invalid_argument("sample_t: model has no blocks");
  if (inner_reps < 1) throw std::invalid_argument("sample_t: need inner_reps >= 1");
  if (n <= 12) return {exact_t_statistic(model)};

  std::vector<std::uint8_t> pick(std::size_t(n), 0);
  const double f_base = model.eval(pick);
  std::vector<double> samples;
  samples.reserve(std::size_t(inner_reps));
  for (int rep = 0; rep < inner_reps; ++rep) {
    const int m = int(rng.uniform_int(std::uint64_t(n)));
    const std::vector<int> subset = rng.random_subset(n, m);
    std::fill(pick.begin(), pick.end(), 0);
    for (int j : subset) pick[std::size_t(j)] = 1;
    int jpos = int(rng.uniform_int(std::uint64_t(n - m)));
    int J = -1;
    for (int j = 0; j < n; ++j)
      if (!pick[std::size_t(j)] && jpos-- == 0) {
        J = j;
        break;
      }
    const double f_a = model.eval(pick);
    pick[std::size_t(J)] = 1;
    const double f_aj = model.eval(pick);
    pick[std::size_t(J)] = 0;
    std::vector<std::uint8_t> only_j(std::size_t(n), 0);
    only_j[std::size_t(J)] = 1;
    const double f_j = model.eval(only_j);
    samples.push_back(0.5 * double(n) * (f_base - f_j) * (f_a - f_aj));
  }
  return samples;
}

struct SteinEstimate {
  int n_blocks = 0;
  int outer_reps = 0;
  int inner_reps = 0;
  bool exact_inner = false;  // inner statistic enumerated, not sampled
  double t_mean = 0.0;
  double t_var = 0.0;
  double sigma2_hat = 0.0;
  double third_moment_hat = 0.0;
  double bound_value = 0.0;
  double se_t_mean = 0.0;
  double se_t_var = 0.0;
  double se_sigma2_hat = 0.0;
  double se_third_moment_hat = 0.0;
  double se_bound_value = 0.0;
  std::vector<double> f_values;  // f(X) per outer draw
};

namespace detail {

// Spread of a per-batch statistic across equal batches, as a standard error.
inline double batch_statistic_se(
    const std::vector<double>& xs,
    const std::function<double(const std::vector<double>&)>& stat, int batches = 32) {
  const int b = std::min<int>(batches, int(xs.size() / 2));
  if (b < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t width = xs.size() / std::size_t(b);
  Moments m;
  for (int i = 0; i < b; ++i) {
    std::vector<double> slice(xs.begin() + long(std::size_t(i) * width),
                              xs.begin() + long(std::size_t(i + 1) * width));
    m.add(stat(slice));
  }
  return m.sd() / std::sqrt(double(b));
}

}  // namespace detail

// Full pipeline for the normal-approximation bound: draws outer_reps
// independent (X, X') pairs through the factory, estimates the statistic's
// mean and spread, the variance of f, and the third-moment sum, and reports
//   sqrt(Var_hat(T)) / sigma^2  +  sum_j E|f(X)-f(X^j)|^3 / (2 sigma^3).
// The spread of the inner estimates upper-bounds the variance term it stands
// in for, keeping the reported bound conservative.
inline SteinEstimate stein_bound(const ModelFactory& factory, int outer_reps,
                                 int inner_reps, std::uint64_t seed, int threads = 1) {
  if (outer_reps < 2) throw std::invalid_argument("stein_bound: need outer_reps >= 2");
  if (inner_reps < 1) throw std::invalid_argument("stein_bound: need inner_reps >= 1");
  const Rng root(seed);

  std::vector<double> w(std::size_t(outer_reps), 0.0), t(std::size_t(outer_reps), 0.0),
      third(std::size_t(outer_reps), 0.0);
  int n_blocks_seen = 0;
  parallel_for(std::size_t(outer_reps), threads, [&](std::size_t o) {
    const std::uint64_t base_seed = root.derive(1, o).key();
    const std::uint64_t fresh_seed = root.derive(2, o).key();
    const ResamplingModel model = factory(base_seed, fresh_seed);
    const int n = model.n_blocks;
    if (o == 0) n_blocks_seen = n;
    Rng stream = root.derive(3, o);
    if (n <= 12) {
      const std::vector<double> val = detail::memo_eval_all(model);
      w[o] = val[0];
      t[o] = exact_t_statistic(model);
      KahanSum acc;
      for (int j = 0; j < n; ++j)
        acc.add(std::pow(std::abs(val[0] - val[std::size_t(1) << j]), 3.0));
      third[o] = acc.value();
    } else {
      std::vector<std::uint8_t> pick(std::size_t(n), 0);
      const double f_base = model.eval(pick);
      w[o] = f_base;
      t[o] = mean_of(sample_t(model, inner_reps, stream));
      // third-moment sum by uniform-J sampling with importance weight n
      KahanSum acc;
      for (int rep = 0; rep < inner_reps; ++rep) {
        const int J = int(stream.uniform_int(std::uint64_t(n)));
        pick[std::size_t(J)] = 1;
        acc.add(std::pow(std::abs(f_base - model.eval(pick)), 3.0));
        pick[std::size_t(J)] = 0;
      }
      third[o] = double(n) * acc.value() / double(inner_reps);
    }
  });

  SteinEstimate est;
  est.n_blocks = n_blocks_seen;
  est.outer_reps = outer_reps;
  est.inner_reps = inner_reps;
  est.exact_inner = n_blocks_seen <= 12;
  est.f_values = w;
  est.t_mean = mean_of(t);
  est.t_var = sample_variance(t);
  est.sigma2_hat = sample_variance(w);
  est.third_moment_hat = mean_of(third);
  if (!(est.sigma2_hat > 0.0))
    throw degenerate_statistic_error("stein_bound: f has zero sample variance");
  const auto bound_of = [](double tvar, double sigma2, double third_sum) {
    return std::sqrt(std::max(tvar, 0.0)) / sigma2 +
           third_sum / (2.0 * std::pow(sigma2, 1.5));
  };
  est.bound_value = bound_of(est.t_var, est.sigma2_hat, est.third_moment_hat);

  est.se_t_mean = batch_means_se(t);
  est.se_sigma2_hat = detail::batch_statistic_se(w, sample_variance);
  est.se_t_var = detail::batch_statistic_se(t, sample_variance);
  est.se_third_moment_hat = batch_means_se(third);
  // per-batch bound: recompute the assembled quantity on each batch
  {
    const int b = std::min<int>(32, outer_reps / 2);
    if (b >= 2) {
      const std::size_t width = std::size_t(outer_reps) / std::size_t(b);
      Moments m;
      for (int i = 0; i < b; ++i) {
        const auto lo = std::size_t(i) * width, hi = std::size_t(i + 1) * width;
        std::vector<double> tb(t.begin() + long(lo), t.begin() + long(hi));
        std::vector<double> wb(w.begin() + long(lo), w.begin() + long(hi));
        std::vector<double> hb(third.begin() + long(lo), third.begin() + long(hi));
        const double s2 = sample_variance(wb);
        if (s2 > 0.0) m.add(bound_of(sample_variance(tb), s2, mean_of(hb)));
      }
      est.se_bound_value =
          m.count >= 2 ? m.sd() / std::sqrt(double(m.count))
                       : std::numeric_limits<double>::quiet_NaN();
    } else {
      est.se_bound_value = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Distances to the standard normal.

// sup_x |F_hat(x) - Phi(x)|, evaluated exactly: the supremum is attained at a
// jump of the empirical CDF, from one side or the other.
inline double kolmogorov_distance(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("kolmogorov_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double best = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double phi = normal_cdf(sample[i]);
    best = std::max(best, phi - double(i) / n);
    best = std::max(best, double(i + 1) / n - phi);
  }
  return best;
}

namespace detail {

// Antiderivative of Phi: integral of Phi from -inf to x.
inline double phi_integral(double x) { return x * normal_cdf(x) + normal_pdf(x); }

}  // namespace detail

// First Wasserstein distance between the empirical law and the standard
// normal: the integral of |F_hat - Phi|, taken exactly on each interval
// between order statistics (splitting at the crossing point) plus the two
// Gaussian tail pieces.
inline double wasserstein_distance(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("wasserstein_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  KahanSum total;
  total.add(detail::phi_integral(sample.front()));  // left tail, F_hat = 0
  for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
    const double lo = sample[i], hi = sample[i + 1];
    if (!(hi > lo)) continue;
    const double level = double(i + 1) / n;
    const double cross = normal_quantile(level);
    auto piece_above = [&](double a, double b) {  // Phi >= level on [a,b]
      return (detail::phi_integral(b) - detail::phi_integral(a)) - level * (b - a);
    };
    auto piece_below = [&](double a, double b) {  // Phi <= level on [a,b]
      return level * (b - a) - (detail::phi_integral(b) - detail::phi_integral(a));
    };
    if (cross <= lo)
      total.add(piece_above(lo, hi));
    else if (cross >= hi)
      total.add(piece_below(lo, hi));
    else {
      total.add(piece_below(lo, cross));
      total.add(piece_above(cross, hi));
    }
  }
  // right tail, F_hat = 1: integral of (1 - Phi)
  total.add(normal_pdf(sample.back()) -
            sample.back() * (1.0 - normal_cdf(sample.back())));
  return total.value();
}

struct DistanceReport {
  double kolmogorov = 0.0;
  double wasserstein = 0.0;
  std::size_t sample_size = 0;
};

inline DistanceReport distance_report(const std::vector<double>& sample) {
  return {kolmogorov_distance(sample), wasserstein_distance(sample), sample.size()};
}

// ---------------------------------------------------------------------------
// Variance decomposition across disjoint coordinate groups.

struct VarianceSplit {
  double total_variance = 0.0;
  double total_se = 0.0;
  double explained_sum = 0.0;
  double explained_se = 0.0;
  std::vector<double> per_group;
};

// Checks Var f(X) >= sum_i Var E(f | X restricted to group i) by Monte Carlo:
// the left side from independent draws, each right-side term by conditioning
// on the group's coordinates and averaging fresh draws of the rest.  The
// inner-noise bias of the conditional-mean variance is subtracted, keeping
// the comparison fair.
inline VarianceSplit variance_decomposition_check(
    int n_vars, const std::function<double(Rng&)>& draw_var,
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<std::vector<int>>& groups, int outer_reps, int inner_reps,
    std::uint64_t seed) {
  if (n_vars < 1) throw std::invalid_argument("variance_decomposition_check: no variables");
  if (outer_reps < 4 || inner_reps < 2)
    throw std::invalid_argument("variance_decomposition_check: too few replicates");
  std::vector<char> taken(std::size_t(n_vars), 0);
  for (const auto& g : groups)
    for (int idx : g) {
      if (idx < 0 || idx >= n_vars)
        throw std::invalid_argument("variance_decomposition_check: index out of range");
      if (taken[std::size_t(idx)]++)
        throw std::invalid_argument("variance_decomposition_check: groups overlap");
    }
  const Rng root(seed);

  std::vector<double> x(std::size_t(n_vars), 0.0);
  auto fill_all = [&](Rng stream) {
    for (int j = 0; j < n_vars; ++j) {
      Rng s = stream.derive(std::uint64_t(j));
      x[std::size_t(j)] = draw_var(s);
    }
  };

  VarianceSplit out;
  std::vector<double> fs(std::size_t(outer_reps), 0.0);
  for (int i = 0; i < outer_reps; ++i) {
    fill_all(root.derive(0, std::uint64_t(i)));
    fs[std::size_t(i)] = f(x);
  }
  out.total_variance = sample_variance(fs);
  out.total_se = detail::batch_statistic_se(fs, sample_variance);

  std::vector<double> explained_samples;  // per-outer contributions, all groups
  KahanSum explained;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> cond_mean(std::size_t(outer_reps), 0.0);
    std::vector<double> cond_var(std::size_t(outer_reps), 0.0);
    for (int o = 0; o < outer_reps; ++o) {
      // fix the group's coordinates
      std::vector<double> pinned(groups[g].size());
      {
        Rng s0 = root.derive(10 + g, std::uint64_t(o));
        for (std::size_t t = 0; t < groups[g].size(); ++t) {
          Rng s = s0.derive(t);
          pinned[t] = draw_var(s);
        }
      }
      Moments inner;
      for (int r = 0; r < inner_reps; ++r) {
        fill_all(root.derive(10 + g, std::uint64_t(o)).derive(100 + std::uint64_t(r)));
        for (std::size_t t = 0; t < groups[g].size(); ++t)
          x[std::size_t(groups[g][t])] = pinned[t];
        inner.add(f(x));
      }
      cond_mean[std::size_t(o)] = inner.mean;
      cond_var[std::size_t(o)] = inner.variance();
    }
    const double raw = sample_variance(cond_mean);
    const double bias = mean_of(cond_var) / double(inner_reps);
    out.per_group.push_back(raw - bias);
    explained.add(raw - bias);
  }
  out.explained_sum = explained.value();
  // standard error: conservative combination of per-group uncertainties
  double se2 = 0.0;
  (void)explained_samples;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    // variance-of-variance scale for each group's estimate
    const double scale = out.per_group[g] + out.total_variance / double(inner_reps);
    se2 += 2.0 * scale * scale / double(outer_reps - 1);
  }
  out.explained_se = std::sqrt(se2);
  return out;
}

}  // namespace mstlab
