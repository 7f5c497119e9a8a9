#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "mstlab/rng.hpp"

namespace mstlab {

// A point in R^d; dimension is carried by the coordinate vector.
struct Point {
  std::vector<double> x;

  Point() = default;
  explicit Point(std::vector<double> coords) : x(std::move(coords)) {}

  int dim() const { return int(x.size()); }
  double& operator[](int i) { return x[std::size_t(i)]; }
  double operator[](int i) const { return x[std::size_t(i)]; }
  bool operator==(const Point& o) const { return x == o.x; }
  bool operator<(const Point& o) const { return x < o.x; }
};

inline Point point(double a, double b) { return Point({a, b}); }
inline Point point(double a, double b, double c) { return Point({a, b, c}); }

inline double dist2(const Point& p, const Point& q) {
  double s = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return s;
}

inline double dist(const Point& p, const Point& q) { return std::sqrt(dist2(p, q)); }

// Axis-aligned cube given by center and half-width (sup-norm ball), closed.
struct Box {
  Point center;
  double half_width = 0.0;

  Box() = default;
  Box(Point c, double h) : center(std::move(c)), half_width(h) {
    if (!(half_width >= 0.0)) throw std::invalid_argument("Box: negative half-width");
  }

  int dim() const { return center.dim(); }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= 2.0 * half_width;
    return v;
  }

  // Sup-norm distance from the center.
  double linf_from_center(const Point& p) const {
    double m = 0.0;
    for (int i = 0; i < dim(); ++i) m = std::max(m, std::abs(p[i] - center[i]));
    return m;
  }

  bool contains(const Point& p) const { return linf_from_center(p) <= half_width; }
};

inline Box box2(double cx, double cy, double h) { return Box(point(cx, cy), h); }
inline Box box3(double cx, double cy, double cz, double h) {
  return Box(point(cx, cy, cz), h);
}

// Box scaled/translated: same center, new half-width.
inline Box resized(const Box& b, double half_width) { return Box(b.center, half_width); }

// Euclidean distance from p to the box as a closed set (0 inside).
inline double dist_to_box(const Point& p, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    const double over = std::abs(p[i] - b.center[i]) - b.half_width;
    if (over > 0.0) s += over * over;
  }
  return std::sqrt(s);
}

// p within Euclidean distance r of the box (closed dilation B^(r)).
inline bool in_dilation(const Point& p, const Box& b, double r) {
  return dist_to_box(p, b) <= r;
}

// p inside the box and within r of its boundary (inner shell B_(r)).  For an
// interior point the Euclidean distance to the boundary is attained at the
// nearest face.
inline bool in_inner_shell(const Point& p, const Box& b, double r) {
  if (!b.contains(p)) return false;
  return b.half_width - b.linf_from_center(p) <= r;
}

// A point configuration together with its sampling domain.
struct Configuration {
  Box domain;
  std::vector<Point> points;

  int dim() const { return domain.dim(); }
  int size() const { return int(points.size()); }
};

// Homogeneous Poisson sample on the box: count ~ Poisson(intensity * volume),
// locations independent uniform.  Exact duplicates are redrawn so the result
// is a simple point set.
inline Configuration sample_poisson(const Box& domain, double intensity, Rng& rng) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw std::invalid_argument("sample_poisson: bad intensity");
  const double mean = intensity * domain.volume();
  if (mean > 2147483648.0)  // 2^31
    throw std::invalid_argument("sample_poisson: expected count exceeds 2^31");
  const std::uint64_t count = rng.poisson(mean);
  Configuration cfg;
  cfg.domain = domain;
  cfg.points.reserve(count);
  std::set<std::vector<double>> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    for (;;) {
      Point p;
      p.x.resize(std::size_t(domain.dim()));
      for (int k = 0; k < domain.dim(); ++k)
        p[k] = rng.uniform(domain.center[k] - domain.half_width,
                           domain.center[k] + domain.half_width);
      if (seen.insert(p.x).second) {
        cfg.points.push_back(std::move(p));
        break;
      }
    }
  }
  return cfg;
}

}  // namespace mstlab
