#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mstlab/geometry.hpp"
#include "mstlab/graph.hpp"
#include "mstlab/lattice.hpp"
#include "mstlab/parallel.hpp"
#include "mstlab/rng.hpp"
#include "mstlab/stats.hpp"

namespace mstlab {

// ---------------------------------------------------------------------------
// Continuum clusters.

// A partition of selected items (point indices or vertex ids); labels are
// dense, 0-based, in order of first appearance.
struct ClusterLabeling {
  std::vector<int> members;  // the items that were clustered
  std::vector<int> label;    // parallel to members
  int n_clusters = 0;

  std::vector<std::vector<int>> groups() const {
    std::vector<std::vector<int>> gs(std::size_t(n_clusters), std::vector<int>{});
    for (std::size_t i = 0; i < members.size(); ++i)
      gs[std::size_t(label[i])].push_back(members[i]);
    return gs;
  }
};

namespace detail {

inline std::uint64_t cell_key(const std::vector<long long>& c) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (long long v : c) h = mix64(h ^ std::uint64_t(v));
  return h;
}

}  // namespace detail

// Clusters among the selected points: two points chain when their distance is
// at most 2r (closed balls of radius r overlap or touch).  Neighbor search
// uses a cell grid of side 2r, so the work is near-linear for homogeneous
// input.
inline ClusterLabeling cluster_points(const std::vector<Point>& pts,
                                      const std::vector<int>& members, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("cluster_points: r must be positive");
  ClusterLabeling out;
  out.members = members;
  const int m = int(members.size());
  out.label.assign(std::size_t(m), -1);
  if (m == 0) return out;
  const int d = pts[std::size_t(members[0])].dim();
  const double cell = 2.0 * r;

  std::unordered_map<std::uint64_t, std::vector<int>> grid;
  grid.reserve(std::size_t(m) * 2);
  std::vector<long long> key(std::size_t(d), 0);
  auto cell_of = [&](const Point& p) {
    for (int i = 0; i < d; ++i)
      key[std::size_t(i)] = (long long)std::floor(p[i] / cell);
    return key;
  };
  for (int i = 0; i < m; ++i) {
    cell_of(pts[std::size_t(members[std::size_t(i)])]);
    grid[detail::cell_key(key)].push_back(i);
  }

  DisjointSets ds(m);
  std::vector<long long> nb(std::size_t(d), 0);
  const double r2 = cell * cell;
  for (int i = 0; i < m; ++i) {
    const Point& p = pts[std::size_t(members[std::size_t(i)])];
    cell_of(p);
    const std::vector<long long> base = key;
    // enumerate the 3^d neighborhood
    std::vector<int> offs(std::size_t(d), -1);
    for (;;) {
      for (int t = 0; t < d; ++t)
        nb[std::size_t(t)] = base[std::size_t(t)] + offs[std::size_t(t)];
      auto it = grid.find(detail::cell_key(nb));
      if (it != grid.end())
        for (int j : it->second)
          if (j < i &&
              dist2(p, pts[std::size_t(members[std::size_t(j)])]) <= r2)
            ds.unite(i, j);
      int axis = 0;
      while (axis < d && offs[std::size_t(axis)] == 1) {
        offs[std::size_t(axis)] = -1;
        ++axis;
      }
      if (axis == d) break;
      ++offs[std::size_t(axis)];
    }
  }

  std::unordered_map<int, int> canonical;
  for (int i = 0; i < m; ++i) {
    const int root = ds.find(i);
    auto [it, fresh] = canonical.try_emplace(root, out.n_clusters);
    if (fresh) ++out.n_clusters;
    out.label[std::size_t(i)] = it->second;
  }
  return out;
}

// Region algebra over boxes: the intersection of `include` minus the union of
// `exclude`; empty `include` means all of space.
struct PointRegion {
  std::vector<Box> include;
  std::vector<Box> exclude;

  bool contains(const Point& p) const {
    for (const Box& b : include)
      if (!b.contains(p)) return false;
    for (const Box& b : exclude)
      if (b.contains(p)) return false;
    return true;
  }
};

inline ClusterLabeling continuum_clusters(const Configuration& cfg,
                                          const PointRegion& region, double r) {
  std::vector<int> members;
  for (int i = 0; i < cfg.size(); ++i)
    if (region.contains(cfg.points[std::size_t(i)])) members.push_back(i);
  return cluster_points(cfg.points, members, r);
}

// ---------------------------------------------------------------------------
// Arm events.

// The inner target of an arm query: a box, optionally dilated, optionally
// augmented by closed balls.  dist() is the Euclidean distance to the union.
struct ContactSet {
  Box box;
  double dilation = 0.0;
  std::vector<std::pair<Point, double>> balls;

  double dist(const Point& p) const {
    double best = std::max(dist_to_box(p, box) - dilation, 0.0);
    for (const auto& [c, rad] : balls)
      best = std::min(best, std::max(mstlab::dist(p, c) - rad, 0.0));
    return best;
  }

  bool contains(const Point& p) const { return dist(p) == 0.0; }
};

enum class ArmVariant { touch, reach };

struct ArmQuery {
  ContactSet inner;           // K1
  Box outer;                  // K2
  double r = 1.0;
  int k = 2;
  ArmVariant variant = ArmVariant::touch;
  std::optional<Box> ambient; // restrict the cluster region to this box
};

// True when at least k disjoint r-clusters among the configuration's points
// in outer \ inner (and inside ambient, when given) each come within the
// contact tolerance of the inner set (r for touch, 2r for reach) and have a
// point in the inner 2r-shell of the outer box.
inline bool arm_event(const Configuration& cfg, const ArmQuery& q) {
  if (!(q.r > 0.0)) throw std::invalid_argument("arm_event: r must be positive");
  if (q.k < 1) throw std::invalid_argument("arm_event: k must be >= 1");
  std::vector<int> members;
  for (int i = 0; i < cfg.size(); ++i) {
    const Point& p = cfg.points[std::size_t(i)];
    if (!q.outer.contains(p)) continue;
    if (q.ambient && !q.ambient->contains(p)) continue;
    if (q.inner.contains(p)) continue;
    members.push_back(i);
  }
  const ClusterLabeling clusters = cluster_points(cfg.points, members, q.r);
  const double inner_tol = q.variant == ArmVariant::touch ? q.r : 2.0 * q.r;
  int qualifying = 0;
  for (const std::vector<int>& group : clusters.groups()) {
    bool touches_inner = false, touches_outer = false;
    for (int idx : group) {
      const Point& p = cfg.points[std::size_t(idx)];
      touches_inner = touches_inner || q.inner.dist(p) <= inner_tol;
      touches_outer = touches_outer || in_inner_shell(p, q.outer, 2.0 * q.r);
      if (touches_inner && touches_outer) break;
    }
    if (touches_inner && touches_outer && ++qualifying >= q.k) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lattice clusters and two-arm events.

// Cube in Z^d: center coordinates and sup-norm radius.
struct IBox {
  std::vector<int> center;
  int radius = 0;

  int linf(const std::vector<int>& v) const {
    int m = 0;
    for (std::size_t i = 0; i < center.size(); ++i)
      m = std::max(m, std::abs(v[i] - center[i]));
    return m;
  }
  bool contains(const std::vector<int>& v) const { return linf(v) <= radius; }
  // Inner vertex boundary wrt Z^d adjacency.
  bool on_boundary(const std::vector<int>& v) const { return linf(v) == radius; }
};

inline IBox centered_ibox(int dim, int radius) {
  return IBox{std::vector<int>(std::size_t(dim), 0), radius};
}

// Region for lattice clustering: drop one edge, drop all edges with both ends
// in minus_box, and/or keep only edges with both ends in every in_boxes cube.
// Member vertices follow the edge set: when edges are being removed, a vertex
// belongs to the region iff it keeps at least one incident structural edge.
struct LatticeRegion {
  std::optional<std::size_t> minus_edge;
  std::optional<IBox> minus_box;
  std::vector<IBox> in_boxes;
};

inline ClusterLabeling lattice_clusters(const LatticeBox& box, double p,
                                        const LatticeRegion& region) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("lattice_clusters: p outside [0,1]");
  const double threshold = box.law.quantile(p);
  std::vector<std::vector<int>> coords(std::size_t(box.vertex_count));
  for (int v = 0; v < box.vertex_count; ++v) coords[std::size_t(v)] = box.coord(v);

  auto edge_allowed = [&](std::size_t j) {
    if (region.minus_edge && *region.minus_edge == j) return false;
    const Edge& e = box.edges[j];
    for (const IBox& ib : region.in_boxes)
      if (!ib.contains(coords[std::size_t(e.u)]) ||
          !ib.contains(coords[std::size_t(e.v)]))
        return false;
    if (region.minus_box && region.minus_box->contains(coords[std::size_t(e.u)]) &&
        region.minus_box->contains(coords[std::size_t(e.v)]))
      return false;
    return true;
  };

  const bool edge_pruning = region.minus_edge || region.minus_box;
  std::vector<char> member(std::size_t(box.vertex_count), 0);
  if (!edge_pruning) {
    for (int v = 0; v < box.vertex_count; ++v) {
      bool in = true;
      for (const IBox& ib : region.in_boxes)
        if (!ib.contains(coords[std::size_t(v)])) {
          in = false;
          break;
        }
      member[std::size_t(v)] = in;
    }
  } else {
    for (std::size_t j = 0; j < box.edges.size(); ++j)
      if (edge_allowed(j)) {
        member[std::size_t(box.edges[j].u)] = 1;
        member[std::size_t(box.edges[j].v)] = 1;
      }
  }

  ClusterLabeling out;
  std::vector<int> member_index(std::size_t(box.vertex_count), -1);
  for (int v = 0; v < box.vertex_count; ++v)
    if (member[std::size_t(v)]) {
      member_index[std::size_t(v)] = int(out.members.size());
      out.members.push_back(v);
    }
  DisjointSets ds(int(out.members.size()));
  for (std::size_t j = 0; j < box.edges.size(); ++j) {
    if (box.edges[j].w > threshold) continue;  // closed edge
    if (!edge_allowed(j)) continue;
    ds.unite(member_index[std::size_t(box.edges[j].u)],
             member_index[std::size_t(box.edges[j].v)]);
  }
  out.label.assign(out.members.size(), -1);
  std::unordered_map<int, int> canonical;
  for (std::size_t i = 0; i < out.members.size(); ++i) {
    const int root = ds.find(int(i));
    auto [it, fresh] = canonical.try_emplace(root, out.n_clusters);
    if (fresh) ++out.n_clusters;
    out.label[i] = it->second;
  }
  return out;
}

// Site of a lattice two-arm query: either one edge or a small cube.
struct LatticeSite {
  std::optional<std::size_t> edge;  // index into box.edges
  std::optional<IBox> cube;
};

struct LatticeTwoArmQuery {
  LatticeSite site;
  IBox outer;
  double p = 0.5;
  bool remove_site_edge = true;       // edge variant: cluster in Q - {x,y}
  std::optional<IBox> ambient;        // "in Q3"
};

// Edge variant: the clusters containing the edge's endpoints are disjoint and
// both reach the boundary of the outer cube.  Cube variant: at least two
// disjoint clusters outside the site cube touch both its boundary and the
// outer boundary.
inline bool lattice_two_arm(const LatticeBox& box, const LatticeTwoArmQuery& q) {
  if (bool(q.site.edge) == bool(q.site.cube))
    throw std::invalid_argument("lattice_two_arm: site must be one edge or one cube");
  LatticeRegion region;
  region.in_boxes.push_back(q.outer);
  if (q.ambient) region.in_boxes.push_back(*q.ambient);

  if (q.site.edge) {
    if (*q.site.edge >= box.edges.size())
      throw std::invalid_argument("lattice_two_arm: edge index out of range");
    if (q.remove_site_edge) region.minus_edge = q.site.edge;
    const ClusterLabeling clusters = lattice_clusters(box, q.p, region);
    std::vector<int> member_index(std::size_t(box.vertex_count), -1);
    for (std::size_t i = 0; i < clusters.members.size(); ++i)
      member_index[std::size_t(clusters.members[i])] = int(i);
    const Edge& e = box.edges[*q.site.edge];
    if (member_index[std::size_t(e.u)] < 0 || member_index[std::size_t(e.v)] < 0)
      return false;
    const int cu = clusters.label[std::size_t(member_index[std::size_t(e.u)])];
    const int cv = clusters.label[std::size_t(member_index[std::size_t(e.v)])];
    if (cu == cv) return false;
    std::vector<char> reaches(std::size_t(clusters.n_clusters), 0);
    for (std::size_t i = 0; i < clusters.members.size(); ++i)
      if (q.outer.on_boundary(box.coord(clusters.members[i])))
        reaches[std::size_t(clusters.label[i])] = 1;
    return reaches[std::size_t(cu)] && reaches[std::size_t(cv)];
  }

  region.minus_box = q.site.cube;
  const ClusterLabeling clusters = lattice_clusters(box, q.p, region);
  std::vector<char> hits_site(std::size_t(clusters.n_clusters), 0);
  std::vector<char> hits_outer(std::size_t(clusters.n_clusters), 0);
  for (std::size_t i = 0; i < clusters.members.size(); ++i) {
    const std::vector<int> c = box.coord(clusters.members[i]);
    if (q.site.cube->on_boundary(c)) hits_site[std::size_t(clusters.label[i])] = 1;
    if (q.outer.on_boundary(c)) hits_outer[std::size_t(clusters.label[i])] = 1;
  }
  int qualifying = 0;
  for (int c = 0; c < clusters.n_clusters; ++c)
    if (hits_site[std::size_t(c)] && hits_outer[std::size_t(c)] && ++qualifying >= 2)
      return true;
  return false;
}

// ---------------------------------------------------------------------------
// Trifurcation boxes.

// K is a trifurcation box in M at level r when some r-cluster of M meets K
// and its part outside K splits into at least three disjoint r-clusters of
// M \ K, each with a point within 2r of M's boundary (from inside).
inline bool is_trifurcation_box(const Configuration& cfg, const Box& K, const Box& M,
                                double r) {
  if (!(r > 0.0)) throw std::invalid_argument("is_trifurcation_box: r must be positive");
  for (int i = 0; i < K.dim(); ++i)
    if (std::abs(K.center[i] - M.center[i]) + K.half_width > M.half_width + 1e-12)
      throw std::invalid_argument("is_trifurcation_box: K must lie inside M");

  std::vector<int> in_m, in_m_not_k;
  for (int i = 0; i < cfg.size(); ++i) {
    const Point& p = cfg.points[std::size_t(i)];
    if (!M.contains(p)) continue;
    in_m.push_back(i);
    if (!K.contains(p)) in_m_not_k.push_back(i);
  }
  const ClusterLabeling full = cluster_points(cfg.points, in_m, r);
  const ClusterLabeling outside = cluster_points(cfg.points, in_m_not_k, r);

  std::vector<int> full_label_of_point(std::size_t(cfg.size()), -1);
  for (std::size_t i = 0; i < full.members.size(); ++i)
    full_label_of_point[std::size_t(full.members[i])] = full.label[i];

  std::vector<char> cluster_meets_k(std::size_t(full.n_clusters), 0);
  for (std::size_t i = 0; i < full.members.size(); ++i)
    if (K.contains(cfg.points[std::size_t(full.members[i])]))
      cluster_meets_k[std::size_t(full.label[i])] = 1;

  // owner full-cluster of each outside-cluster, and its shell contact
  std::vector<int> owner(std::size_t(outside.n_clusters), -1);
  std::vector<char> shell(std::size_t(outside.n_clusters), 0);
  for (std::size_t i = 0; i < outside.members.size(); ++i) {
    const int point = outside.members[i];
    const int oc = outside.label[i];
    owner[std::size_t(oc)] = full_label_of_point[std::size_t(point)];
    if (in_inner_shell(cfg.points[std::size_t(point)], M, 2.0 * r))
      shell[std::size_t(oc)] = 1;
  }
  std::vector<int> branch_count(std::size_t(full.n_clusters), 0);
  for (int oc = 0; oc < outside.n_clusters; ++oc)
    if (shell[std::size_t(oc)] && owner[std::size_t(oc)] >= 0 &&
        cluster_meets_k[std::size_t(owner[std::size_t(oc)])])
      if (++branch_count[std::size_t(owner[std::size_t(oc)])] >= 3) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Walls.

enum class WallStatus { yes, no, inconclusive };

// Certifies (or refutes) the blocking condition: for every p1 on the inner
// box boundary and p2 on K-intersected outer box boundary, the lens
// K ∩ S(p1, 3D/4) ∩ S(p2, 3D/4) ∩ (B(x,b) \ B(x,a)), D = d(p1,p2), must hold
// a configuration point.  Both boundaries are sampled at spacing <= mesh;
// `yes` requires a witness inside lenses shrunk by 2*mesh (sound for the
// continuous quantifier), `no` requires an empty lens inflated by 2*mesh at
// some sampled pair (also sound, since sampled pairs are genuine boundary
// points); anything else is inconclusive.
inline WallStatus has_wall(const Configuration& cfg, const Point& x, double a,
                           double b, const Box& K, double mesh) {
  const int d = x.dim();
  if (!(b > a && a > 0.0)) throw std::invalid_argument("has_wall: need b > a > 0");
  if (!(mesh > 0.0)) throw std::invalid_argument("has_wall: mesh must be positive");
  if (K.dim() != d || cfg.dim() != d)
    throw std::invalid_argument("has_wall: dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (std::abs(x[i] - K.center[i]) + a > K.half_width + 1e-12)
      throw std::invalid_argument("has_wall: B(x,a) must lie inside K");

  const Box inner(x, a), outer(x, b);
  // candidate witnesses: configuration points in K and in the annulus
  std::vector<const Point*> witnesses;
  for (const Point& p : cfg.points)
    if (K.contains(p) && outer.contains(p) && !inner.contains(p))
      witnesses.push_back(&p);

  // boundary sample of a box, spacing <= mesh, corners included
  auto sample_boundary = [&](double radius, bool clip_to_k, std::vector<Point>& out) {
    for (int axis = 0; axis < d; ++axis)
      for (int sign = -1; sign <= 1; sign += 2) {
        const double plane = x[axis] + sign * radius;
        if (clip_to_k &&
            std::abs(plane - K.center[axis]) > K.half_width + 1e-12)
          continue;
        std::vector<double> lo(std::size_t(d), 0.0), hi(std::size_t(d), 0.0);
        bool empty = false;
        for (int j = 0; j < d; ++j) {
          if (j == axis) continue;
          lo[std::size_t(j)] = x[j] - radius;
          hi[std::size_t(j)] = x[j] + radius;
          if (clip_to_k) {
            lo[std::size_t(j)] = std::max(lo[std::size_t(j)], K.center[j] - K.half_width);
            hi[std::size_t(j)] = std::min(hi[std::size_t(j)], K.center[j] + K.half_width);
            if (lo[std::size_t(j)] > hi[std::size_t(j)]) empty = true;
          }
        }
        if (empty) continue;
        // iterate the (d-1)-dimensional grid on this face
        std::vector<int> steps(std::size_t(d), 0);
        std::vector<double> space(std::size_t(d), 0.0);
        for (int j = 0; j < d; ++j) {
          if (j == axis) continue;
          const double len = hi[std::size_t(j)] - lo[std::size_t(j)];
          steps[std::size_t(j)] = std::max(1, int(std::ceil(len / mesh)));
          space[std::size_t(j)] = len / steps[std::size_t(j)];
        }
        std::vector<int> at(std::size_t(d), 0);
        for (;;) {
          Point p;
          p.x.resize(std::size_t(d));
          p[axis] = plane;
          for (int j = 0; j < d; ++j) {
            if (j == axis) continue;
            p[j] = lo[std::size_t(j)] + at[std::size_t(j)] * space[std::size_t(j)];
          }
          out.push_back(std::move(p));
          int j = 0;
          while (j < d && (j == axis || at[std::size_t(j)] == steps[std::size_t(j)])) {
            if (j != axis) at[std::size_t(j)] = 0;
            ++j;
          }
          if (j == d) break;
          ++at[std::size_t(j)];
        }
      }
  };

  std::vector<Point> inner_pts, outer_pts;
  sample_boundary(a, false, inner_pts);
  sample_boundary(b, true, outer_pts);
  if (outer_pts.empty())
    throw std::invalid_argument("has_wall: K does not meet the outer boundary");

  auto lens_has_witness = [&](const Point& p1, const Point& p2, double rho) {
    if (!(rho > 0.0)) return false;
    const double rho2 = rho * rho;
    for (const Point* z : witnesses)
      if (dist2(*z, p1) <= rho2 && dist2(*z, p2) <= rho2) return true;
    return false;
  };

  bool uncertain = false;
  for (const Point& p1 : inner_pts)
    for (const Point& p2 : outer_pts) {
      const double rho = 0.75 * dist(p1, p2);
      if (lens_has_witness(p1, p2, rho - 2.0 * mesh)) continue;
      if (!lens_has_witness(p1, p2, rho + 2.0 * mesh)) return WallStatus::no;
      uncertain = true;
    }
  return uncertain ? WallStatus::inconclusive : WallStatus::yes;
}

// ---------------------------------------------------------------------------
// Arm probability tables.

struct ArmRow {
  int n = 0;
  double param = 0.0;
  int replicates = 0;
  int successes = 0;
  double phat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Monte Carlo estimate of an arm-event probability over a (size, parameter)
// grid.  The runner receives its own derived stream per replicate, so counts
// merge associatively and the table is independent of the thread count.
inline std::vector<ArmRow> estimate_arm_probability(
    const std::function<bool(int n, double param, Rng&)>& runner,
    const std::vector<int>& n_grid, const std::vector<double>& param_grid,
    int replicates, std::uint64_t seed, int threads = 1) {
  if (n_grid.empty() || param_grid.empty())
    throw std::invalid_argument("estimate_arm_probability: empty grid");
  if (replicates < 1)
    throw std::invalid_argument("estimate_arm_probability: need replicates >= 1");
  std::vector<ArmRow> rows;
  const Rng root(seed);
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni)
    for (std::size_t pi = 0; pi < param_grid.size(); ++pi) {
      std::vector<char> hits(std::size_t(replicates), 0);
      parallel_for(std::size_t(replicates), threads, [&](std::size_t rep) {
        Rng stream = root.derive(ni, pi, rep);
        hits[rep] = runner(n_grid[ni], param_grid[pi], stream) ? 1 : 0;
      });
      ArmRow row;
      row.n = n_grid[ni];
      row.param = param_grid[pi];
      row.replicates = replicates;
      for (char h : hits) row.successes += h;
      row.phat = double(row.successes) / double(replicates);
      const Interval ci =
          wilson_interval(std::size_t(row.successes), std::size_t(replicates));
      row.ci_lo = ci.lo;
      row.ci_hi = ci.hi;
      rows.push_back(row);
    }
  return rows;
}

}  // namespace mstlab
