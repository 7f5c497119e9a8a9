#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mstlab {

// splitmix64 finalizer: bijective 64-bit scrambler with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based splitmix64 stream.  A stream is identified by a 64-bit key;
// output i is mix64(key + i*golden), so streams can be advanced or split
// without sequential dependence.  derive(k) hashes a child key, which makes
// (seed, experiment, replicate, ...) paths reproducible and independent of
// evaluation order — the backbone of every Monte Carlo loop in this library.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key), ctr_(0) {}

  // Child stream for a sub-task. Asymmetric hash-combine: derive(a).derive(b)
  // and derive(b).derive(a) disagree.
  Rng derive(std::uint64_t k) const {
    return Rng(mix64(mix64(key_ + 0x9e3779b97f4a7c15ull) ^ mix64(k)));
  }
  Rng derive(std::uint64_t k1, std::uint64_t k2) const {
    return derive(k1).derive(k2);
  }
  Rng derive(std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) const {
    return derive(k1).derive(k2).derive(k3);
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    ++ctr_;
    return mix64(key_ + 0x9e3779b97f4a7c15ull * ctr_);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in {0, ..., n-1}, rejection method (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log1p(-next_unit()) / rate;
  }

  // Standard normal via Marsaglia polar method (spare deviate discarded so a
  // stream's consumption is one pair per call, independent of call history).
  double normal() {
    for (;;) {
      const double u = 2.0 * next_unit() - 1.0;
      const double v = 2.0 * next_unit() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Poisson count by multiplicative inversion, chunked so exp(-mean) stays
  // far from underflow.  O(mean) time: fine at the intensities used here.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("poisson: mean must be finite and non-negative");
    std::uint64_t total = 0;
    while (mean > 400.0) {
      total += poisson_small(400.0);
      mean -= 400.0;
    }
    return total + poisson_small(mean);
  }

  // Random subset of {0,...,n-1} of size m by partial Fisher-Yates.
  std::vector<int> random_subset(int n, int m) {
    if (m < 0 || m > n) throw std::invalid_argument("random_subset: bad size");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < m; ++i) {
      const int j = i + int(uniform_int(std::uint64_t(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    return pool;
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double floor_p = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_unit();
    } while (p > floor_p);
    return k - 1;
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace mstlab
