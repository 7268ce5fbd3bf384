#pragma once

#include <array>
#include <vector>

#include "pslab/geometry.hpp"

namespace pslab::detail {

/// Incremental Bowyer-Watson triangulation of points inside an axis-aligned
/// rectangle. `corners` index the four rectangle corners (counter-clockwise);
/// every other point must lie in the closed rectangle. Points are inserted in
/// the given order, so the result is deterministic. Throws GenerationError on
/// duplicate points or a non-star-shaped cavity.
std::vector<std::array<int, 3>> triangulate_rectangle(const std::vector<Point>& points,
                                                      const std::array<int, 4>& corners);

}  // namespace pslab::detail
