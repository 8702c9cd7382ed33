#include "svsp/eval/boundary.hpp"

#include <cmath>

#include "core/json_util.hpp"
#include "svsp/core/dataset.hpp"
#include "svsp/core/error.hpp"

namespace svsp {
namespace {

std::vector<double> axis_points(const GridAxis& axis, std::size_t resolution) {
  std::vector<double> pts(resolution);
  const double span = axis.high - axis.low;
  for (std::size_t i = 0; i < resolution; ++i)
    pts[i] = axis.low + span * static_cast<double>(i) / static_cast<double>(resolution - 1);
  return pts;
}

}  // namespace

BoundaryGrid boundary_grid(const DistilledPolicy& policy, GridAxis x, GridAxis y, std::size_t resolution,
                           double fill_value) {
  if (x.dim == y.dim) throw InputError("boundary_grid: the two dimensions must differ");
  if (x.dim >= policy.state_dim || y.dim >= policy.state_dim)
    throw InputError("boundary_grid: dimension out of range for state_dim " + std::to_string(policy.state_dim));
  if (resolution < 2) throw InputError("boundary_grid: resolution must be >= 2");
  for (const auto* a : {&x, &y})
    if (!std::isfinite(a->low) || !std::isfinite(a->high) || !(a->low < a->high))
      throw InputError("boundary_grid: each range needs low < high");
  if (!std::isfinite(fill_value)) throw InputError("boundary_grid: fill value must be finite");

  BoundaryGrid grid{x, y, resolution, axis_points(x, resolution), axis_points(y, resolution),
                    std::vector<std::size_t>(resolution * resolution)};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t iy = 0; iy < static_cast<std::ptrdiff_t>(resolution); ++iy) {
    Vector s(policy.state_dim, fill_value);
    s[y.dim] = grid.ys[iy];
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      s[x.dim] = grid.xs[ix];
      grid.node[static_cast<std::size_t>(iy) * resolution + ix] = route_node(policy, s);
    }
  }
  return grid;
}

void save_grid(const BoundaryGrid& grid, const std::filesystem::path& path) {
  std::string out = "x,y,node\n";
  out.reserve(out.size() + grid.node.size() * 48);
  for (std::size_t iy = 0; iy < grid.resolution; ++iy)
    for (std::size_t ix = 0; ix < grid.resolution; ++ix)
      out += format_double(grid.xs[ix]) + "," + format_double(grid.ys[iy]) + "," + std::to_string(grid.at(ix, iy)) +
             "\n";
  detail::write_text(path, out, "grid file");
}

}  // namespace svsp
