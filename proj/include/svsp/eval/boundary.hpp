#pragma once

#include <filesystem>
#include <vector>

#include "svsp/distill/policy.hpp"

namespace svsp {

struct GridAxis {
  std::size_t dim = 0;
  double low = -1.0;
  double high = 1.0;
};

// resolution x resolution serving-node map on the plane spanned by two state
// dimensions, all others held at fill_value. Cell (ix, iy) sits at
// low + (high - low)·i/(resolution - 1); rows are stored y-major.
struct BoundaryGrid {
  GridAxis x;
  GridAxis y;
  std::size_t resolution = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::size_t> node;  // node[iy * resolution + ix]

  std::size_t at(std::size_t ix, std::size_t iy) const { return node[iy * resolution + ix]; }
};

BoundaryGrid boundary_grid(const DistilledPolicy& policy, GridAxis x, GridAxis y, std::size_t resolution,
                           double fill_value = 0.0);

// Comma-separated x,y,node with a header row.
void save_grid(const BoundaryGrid& grid, const std::filesystem::path& path);

}  // namespace svsp
