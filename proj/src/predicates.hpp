#pragma once

#include "pslab/geometry.hpp"

namespace pslab::detail {

/// Sign of the orientation determinant of (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact for all finite double inputs.
int orient2d(Point a, Point b, Point c);

/// +1 if d lies strictly inside the circumcircle of the counter-clockwise
/// triangle (a, b, c), -1 if strictly outside, 0 if cocircular. Exact.
int incircle(Point a, Point b, Point c, Point d);

}  // namespace pslab::detail
