#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mstlab/graph.hpp"
#include "mstlab/rng.hpp"

namespace mstlab {

// Edge-weight distribution.  Sampling always goes through the generalized
// inverse CDF applied to one uniform draw, so for a fixed underlying uniform
// the weight is monotone in any distribution parameter and thresholding at
// quantile(p) reproduces Bernoulli(p) openness for every law.
class WeightLaw {
 public:
  enum class Kind { uniform01, exponential, two_point, table };

  static WeightLaw uniform01() {
    WeightLaw law;
    law.kind_ = Kind::uniform01;
    return law;
  }

  static WeightLaw exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("WeightLaw: rate must be positive");
    WeightLaw law;
    law.kind_ = Kind::exponential;
    law.rate_ = rate;
    return law;
  }

  // P(X = b) = q, P(X = a) = 1 - q, with a < b.
  static WeightLaw two_point(double a, double b, double q) {
    if (!(a < b)) throw std::invalid_argument("WeightLaw: two_point needs a < b");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("WeightLaw: q outside [0,1]");
    WeightLaw law;
    law.kind_ = Kind::two_point;
    law.a_ = a;
    law.b_ = b;
    law.q_ = q;
    return law;
  }

  // Finite support {values[i]} with the given probabilities.
  static WeightLaw table(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
      throw std::invalid_argument("WeightLaw: bad table");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i - 1] < values[i]))
        throw std::invalid_argument("WeightLaw: table values must increase");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("WeightLaw: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("WeightLaw: probabilities must sum to 1");
    WeightLaw law;
    law.kind_ = Kind::table;
    law.values_ = std::move(values);
    law.cum_.resize(law.values_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      run += probs[i];
      law.cum_[i] = run;
    }
    law.cum_.back() = 1.0;
    return law;
  }

  Kind kind() const { return kind_; }

  // Generalized inverse CDF, inf{x : F(x) >= p}.
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("WeightLaw: quantile argument outside [0,1]");
    switch (kind_) {
      case Kind::uniform01:
        return p;
      case Kind::exponential:
        return p < 1.0 ? -std::log1p(-p) / rate_
                       : std::numeric_limits<double>::infinity();
      case Kind::two_point:
        return p <= 1.0 - q_ ? a_ : b_;
      case Kind::table: {
        for (std::size_t i = 0; i < cum_.size(); ++i)
          if (p <= cum_[i]) return values_[i];
        return values_.back();
      }
    }
    throw std::logic_error("WeightLaw: bad kind");
  }

  double sample(Rng& rng) const { return quantile(rng.next_unit()); }

  // True when the law puts all mass on one value (no randomness to study).
  bool is_degenerate() const {
    switch (kind_) {
      case Kind::uniform01:
      case Kind::exponential:
        return false;
      case Kind::two_point:
        return q_ == 0.0 || q_ == 1.0;
      case Kind::table: {
        int support = 0;
        double prev = 0.0;
        for (double c : cum_) {
          if (c > prev) ++support;
          prev = c;
        }
        return support <= 1;
      }
    }
    return false;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::uniform01:
        return "uniform01";
      case Kind::exponential:
        return "exponential";
      case Kind::two_point:
        return "two_point";
      case Kind::table:
        return "table";
    }
    return "?";
  }

  double rate() const { return rate_; }
  double low() const { return a_; }
  double high() const { return b_; }
  double high_prob() const { return q_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& cumulative() const { return cum_; }

 private:
  Kind kind_ = Kind::uniform01;
  double rate_ = 1.0;
  double a_ = 0.0, b_ = 1.0, q_ = 0.5;
  std::vector<double> values_;
  std::vector<double> cum_;
};

// The nearest-neighbor graph on [-n, n]^d with i.i.d. edge weights.  Each
// edge's weight comes from its own derived stream keyed by the edge index, so
// one edge can be redrawn (or coupled against a fresh seed) without touching
// any other draw.
struct LatticeBox {
  int radius = 0;
  int dim = 0;
  WeightLaw law;
  std::uint64_t seed = 0;
  int side = 0;          // 2*radius + 1
  int vertex_count = 0;  // side^d
  std::vector<Edge> edges;
  std::vector<double> unit;  // the uniform behind each edge weight

  std::vector<int> coord(int id) const {
    std::vector<int> c(std::size_t(dim), 0);
    for (int i = 0; i < dim; ++i) {
      c[std::size_t(i)] = id % side - radius;
      id /= side;
    }
    return c;
  }

  int vertex_id(const std::vector<int>& c) const {
    int id = 0, stride = 1;
    for (int i = 0; i < dim; ++i) {
      const int digit = c[std::size_t(i)] + radius;
      if (digit < 0 || digit >= side)
        throw std::invalid_argument("vertex_id: coordinate outside the box");
      id += digit * stride;
      stride *= side;
    }
    return id;
  }

  WeightedGraph to_graph() const { return WeightedGraph{vertex_count, edges}; }
};

inline std::uint64_t lattice_edge_count(int radius, int dim) {
  std::uint64_t side = std::uint64_t(2 * radius + 1);
  std::uint64_t faces = 1;
  for (int i = 0; i + 1 < dim; ++i) faces *= side;
  return std::uint64_t(dim) * std::uint64_t(2 * radius) * faces;
}

inline LatticeBox build_lattice_box(int radius, int dim, const WeightLaw& law,
                                    std::uint64_t seed) {
  if (radius < 0) throw std::invalid_argument("build_lattice_box: negative radius");
  if (dim < 1) throw std::invalid_argument("build_lattice_box: dimension must be >= 1");
  double count = 1.0;
  for (int i = 0; i < dim; ++i) count *= double(2 * radius + 1);
  if (count > 16e6) throw std::invalid_argument("build_lattice_box: box too large");

  LatticeBox box;
  box.radius = radius;
  box.dim = dim;
  box.law = law;
  box.seed = seed;
  box.side = 2 * radius + 1;
  box.vertex_count = int(count);
  box.edges.reserve(std::size_t(lattice_edge_count(radius, dim)));

  const Rng root(seed);
  // Enumeration order fixes edge indices: vertices ascending, axes ascending,
  // each edge recorded from the lower vertex id to its +e_axis neighbor.
  std::vector<int> strides(std::size_t(dim), 0);
  strides[0] = 1;
  for (int i = 1; i < dim; ++i)
    strides[std::size_t(i)] = strides[std::size_t(i - 1)] * box.side;
  for (int id = 0; id < box.vertex_count; ++id) {
    int rem = id;
    for (int axis = 0; axis < dim; ++axis) {
      const int digit = rem % box.side;
      rem /= box.side;
      if (digit + 1 >= box.side) continue;
      const std::uint64_t j = box.edges.size();
      Rng stream = root.derive(j);
      const double u = stream.next_unit();
      box.unit.push_back(u);
      box.edges.push_back({id, id + strides[std::size_t(axis)], law.quantile(u)});
    }
  }
  return box;
}

// The weight edge j takes when redrawn from a fresh seed (same per-edge
// stream discipline as construction).
inline double resampled_weight(const LatticeBox& box, std::size_t edge_index,
                               std::uint64_t fresh_seed) {
  if (edge_index >= box.edges.size())
    throw std::invalid_argument("resampled_weight: edge index out of range");
  Rng stream = Rng(fresh_seed).derive(edge_index);
  return box.law.quantile(stream.next_unit());
}

// Threshold for the openness coupling: edge open at level p iff its weight is
// at most quantile(p).
inline double open_threshold(const WeightLaw& law, double p) { return law.quantile(p); }

}  // namespace mstlab
