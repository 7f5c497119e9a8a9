#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mstlab/euclidean.hpp"
#include "mstlab/geometry.hpp"
#include "mstlab/lattice.hpp"
#include "mstlab/mst.hpp"
#include "mstlab/rng.hpp"
#include "mstlab/stein.hpp"

namespace mstlab {

// Resampling blocks = edges of a lattice box; f = total length of the minimum
// spanning tree of the box under the given weight law.  Each selected edge
// swaps its weight for an independent fresh draw from the same law.
inline ModelFactory lattice_edge_model_factory(int radius, int dim, WeightLaw law) {
  if (radius < 0 || dim < 1)
    throw std::invalid_argument("lattice_edge_model_factory: bad geometry");
  return [radius, dim, law](std::uint64_t base_seed,
                            std::uint64_t fresh_seed) -> ResamplingModel {
    auto box = std::make_shared<LatticeBox>(build_lattice_box(radius, dim, law, base_seed));
    auto fresh = std::make_shared<std::vector<double>>();
    fresh->reserve(box->edges.size());
    for (std::size_t j = 0; j < box->edges.size(); ++j)
      fresh->push_back(resampled_weight(*box, j, fresh_seed));
    ResamplingModel model;
    model.n_blocks = int(box->edges.size());
    model.eval = [box, fresh](const std::vector<std::uint8_t>& pick) {
      WeightedGraph g;
      g.n = box->vertex_count;
      g.edges.reserve(box->edges.size());
      for (std::size_t j = 0; j < box->edges.size(); ++j) {
        const auto& e = box->edges[j];
        g.edges.push_back({e.u, e.v, pick[j] ? (*fresh)[j] : e.w});
      }
      return kruskal_mst(g).total_weight();
    };
    return model;
  };
}

// Resampling blocks = congruent axis-aligned cells tiling a cube; f = total
// length of the Euclidean minimum spanning tree of a Poisson sample.  Each
// selected cell swaps its points for an independent fresh Poisson draw.
inline ModelFactory poisson_cell_model_factory(double half_width, double intensity,
                                               int dim, int cells_per_axis) {
  if (!(half_width > 0.0) || !(intensity >= 0.0) || dim < 1 || cells_per_axis < 1)
    throw std::invalid_argument("poisson_cell_model_factory: bad parameters");
  return [half_width, intensity, dim, cells_per_axis](
             std::uint64_t base_seed, std::uint64_t fresh_seed) -> ResamplingModel {
    const int c = cells_per_axis;
    std::size_t n_cells = 1;
    for (int a = 0; a < dim; ++a) n_cells *= std::size_t(c);
    const double h = half_width / double(c);

    auto cell_box = [=](std::size_t id) {
      Point center;
      center.x.resize(std::size_t(dim));
      std::size_t rest = id;
      for (int a = 0; a < dim; ++a) {
        const int i = int(rest % std::size_t(c));
        rest /= std::size_t(c);
        center.x[std::size_t(a)] = -half_width + (2.0 * i + 1.0) * h;
      }
      return Box{center, h};
    };

    auto base_pts = std::make_shared<std::vector<std::vector<Point>>>();
    auto fresh_pts = std::make_shared<std::vector<std::vector<Point>>>();
    base_pts->reserve(n_cells);
    fresh_pts->reserve(n_cells);
    const Rng base_root(base_seed), fresh_root(fresh_seed);
    for (std::size_t id = 0; id < n_cells; ++id) {
      const Box cell = cell_box(id);
      Rng b = base_root.derive(id), f = fresh_root.derive(id);
      base_pts->push_back(sample_poisson(cell, intensity, b).points);
      fresh_pts->push_back(sample_poisson(cell, intensity, f).points);
    }

    ResamplingModel model;
    model.n_blocks = int(n_cells);
    model.eval = [base_pts, fresh_pts](const std::vector<std::uint8_t>& pick) {
      std::vector<Point> pts;
      for (std::size_t id = 0; id < base_pts->size(); ++id) {
        const auto& src = pick[id] ? (*fresh_pts)[id] : (*base_pts)[id];
        pts.insert(pts.end(), src.begin(), src.end());
      }
      if (pts.size() < 2) return 0.0;
      return euclidean_mst(pts).total_weight();
    };
    return model;
  };
}

}  // namespace mstlab
