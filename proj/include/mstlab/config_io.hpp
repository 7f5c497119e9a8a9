#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mstlab/geometry.hpp"

namespace mstlab {

// %.17g: shortest text that round-trips an IEEE double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Text layout: "d count" header, then the domain (center coordinates and
// half-width), then one coordinate row per point.
inline void write_configuration(std::ostream& out, const Configuration& cfg) {
  out << cfg.dim() << ' ' << cfg.size() << '\n';
  for (int i = 0; i < cfg.dim(); ++i)
    out << format_double(cfg.domain.center[i]) << ' ';
  out << format_double(cfg.domain.half_width) << '\n';
  for (const Point& p : cfg.points) {
    for (int i = 0; i < cfg.dim(); ++i) {
      if (i) out << ' ';
      out << format_double(p[i]);
    }
    out << '\n';
  }
}

inline Configuration read_configuration(std::istream& in) {
  int d = 0, count = 0;
  if (!(in >> d >> count) || d < 1 || count < 0)
    throw std::invalid_argument("read_configuration: bad header");
  Point center;
  center.x.resize(std::size_t(d));
  for (int i = 0; i < d; ++i)
    if (!(in >> center[i])) throw std::invalid_argument("read_configuration: bad domain");
  double half = 0.0;
  if (!(in >> half) || !(half >= 0.0))
    throw std::invalid_argument("read_configuration: bad domain");
  Configuration cfg;
  cfg.domain = Box(center, half);
  cfg.points.reserve(std::size_t(count));
  for (int r = 0; r < count; ++r) {
    Point p;
    p.x.resize(std::size_t(d));
    for (int i = 0; i < d; ++i)
      if (!(in >> p[i])) throw std::invalid_argument("read_configuration: truncated row");
    if (!cfg.domain.contains(p))
      throw std::invalid_argument("read_configuration: point outside domain");
    cfg.points.push_back(std::move(p));
  }
  return cfg;
}

}  // namespace mstlab
