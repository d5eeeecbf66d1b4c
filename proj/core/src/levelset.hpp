#pragma once

#include <array>
#include <functional>
#include <vector>

namespace lamespec::detail {

/// Polyline extracted from a level set, in (unwrapped) grid coordinates.
struct GridChain {
  std::vector<std::array<double, 2>> pts;
  bool closed = false;
};

/// Marching-squares extraction of the zero level set of a scalar field
/// sampled at the nodes of an nx-by-ny cell grid. When `wrap` is set the grid
/// is a torus (nodes nx*ny, coordinates mod nx / mod ny); otherwise nodes are
/// (nx+1)*(ny+1). Nodes with mask == 0 are excluded and the adjacent cells
/// are skipped, producing open chain ends next to the masked region.
/// Crossings are refined along grid edges by `refine_iters` bisections of f,
/// which is evaluated in grid coordinates. Values >= 0 count as positive.
std::vector<GridChain> extract_level_set(
    int nx, int ny, bool wrap, const std::vector<double>& vals,
    const std::vector<unsigned char>& mask,
    const std::function<double(double, double)>& f, int refine_iters);

}  // namespace lamespec::detail
