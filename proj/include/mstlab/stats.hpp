#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mstlab/errors.hpp"

namespace mstlab {

// Compensated accumulator (Kahan with Neumaier's correction), accurate for
// long sums of small terms and for large-magnitude cancellation.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

inline double kahan_total(const std::vector<double>& xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

// Welford running moments.
struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / double(count);
    m2 += d * (x - mean);
  }
  double variance() const {  // sample variance, n-1 denominator
    if (count < 2) throw degenerate_statistic_error("variance needs >= 2 samples");
    return m2 / double(count - 1);
  }
  double sd() const { return std::sqrt(variance()); }
};

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value() / double(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.add(x);
  return m.variance();
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step (absolute error far below 1e-12 over (0,1)).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 for 95%).
inline Interval wilson_interval(std::size_t successes, std::size_t trials,
                                double z = 1.959963984540054) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  const double n = double(trials);
  const double phat = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  // at the boundary counts the interval ends are exact
  if (successes == 0) ci.lo = 0.0;
  if (successes == trials) ci.hi = 1.0;
  return ci;
}

// Standard error of a mean via batch means (guards against the mild
// correlation a shared-stream Monte Carlo loop can introduce).
inline double batch_means_se(const std::vector<double>& xs, int batches = 32) {
  const std::size_t n = xs.size();
  if (n < 2) throw degenerate_statistic_error("batch_means_se: sample too small");
  if (batches < 2 || n < std::size_t(2 * batches)) {
    Moments m;
    for (double x : xs) m.add(x);
    return m.sd() / std::sqrt(double(n));
  }
  const std::size_t width = n / std::size_t(batches);
  Moments batch_stats;
  for (int b = 0; b < batches; ++b) {
    KahanSum acc;
    for (std::size_t i = std::size_t(b) * width; i < std::size_t(b + 1) * width; ++i)
      acc.add(xs[i]);
    batch_stats.add(acc.value() / double(width));
  }
  return batch_stats.sd() / std::sqrt(double(batches));
}

struct WlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  std::size_t points = 0;
};

// Weighted least squares y ~ intercept + slope*x with weights = inverse
// variances; standard errors from the exact information matrix.
inline WlsFit wls_fit(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& w) {
  if (x.size() != y.size() || x.size() != w.size())
    throw std::invalid_argument("wls_fit: length mismatch");
  if (x.size() < 2) throw degenerate_statistic_error("wls_fit: need >= 2 points");
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("wls_fit: weights must be positive");
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
    swxx += w[i] * x[i] * x[i];
    swxy += w[i] * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (!(det > 0.0)) throw degenerate_statistic_error("wls_fit: singular design");
  WlsFit fit;
  fit.points = x.size();
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.slope_se = std::sqrt(sw / det);
  fit.intercept_se = std::sqrt(swxx / det);
  return fit;
}

// Finite-sample slack paired with the D <= 2*sqrt(W) comparison of empirical
// distance estimates (twice the 99% DKW radius).
inline double metric_relation_slack(std::size_t sample_size) {
  if (sample_size == 0) throw std::invalid_argument("metric_relation_slack: empty");
  return 2.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * double(sample_size)));
}

}  // namespace mstlab
