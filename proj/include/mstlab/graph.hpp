#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace mstlab {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

// Endpoints in canonical (min, max) order; used by deterministic comparators.
inline std::pair<int, int> normalized_ends(const Edge& e) {
  return e.u <= e.v ? std::pair{e.u, e.v} : std::pair{e.v, e.u};
}

struct WeightedGraph {
  int n = 0;
  std::vector<Edge> edges;
};

inline void validate_graph(const WeightedGraph& g) {
  if (g.n < 0) throw std::invalid_argument("graph: negative vertex count");
  for (const Edge& e : g.edges) {
    if (e.u < 0 || e.u >= g.n || e.v < 0 || e.v >= g.n)
      throw std::invalid_argument("graph: endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("graph: self loop");
    if (!std::isfinite(e.w)) throw std::invalid_argument("graph: non-finite weight");
  }
}

// Union-find with path halving and union by size.
struct DisjointSets {
  std::vector<int> parent;
  std::vector<int> size;
  int components;

  explicit DisjointSets(int n) : parent(std::size_t(n)), size(std::size_t(n), 1), components(n) {
    for (int i = 0; i < n; ++i) parent[std::size_t(i)] = i;
  }

  int find(int a) {
    while (parent[std::size_t(a)] != a) {
      parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
      a = parent[std::size_t(a)];
    }
    return a;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size[std::size_t(a)] < size[std::size_t(b)]) std::swap(a, b);
    parent[std::size_t(b)] = a;
    size[std::size_t(a)] += size[std::size_t(b)];
    --components;
    return true;
  }
};

// Edge-list text format: "n m" header then one "u v w" row per edge, weights
// printed with 17 significant digits so they round-trip exactly.
inline void write_graph(std::ostream& out, const WeightedGraph& g) {
  out << g.n << ' ' << g.edges.size() << '\n';
  char buf[40];
  for (const Edge& e : g.edges) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.u << ' ' << e.v << ' ' << buf << '\n';
  }
}

inline WeightedGraph read_graph(std::istream& in) {
  int n = 0;
  std::size_t m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("read_graph: bad header");
  WeightedGraph g;
  g.n = n;
  g.edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Edge e;
    if (!(in >> e.u >> e.v >> e.w)) throw std::invalid_argument("read_graph: truncated row");
    g.edges.push_back(e);
  }
  validate_graph(g);
  return g;
}

}  // namespace mstlab
