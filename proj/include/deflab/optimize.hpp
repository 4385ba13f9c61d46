#pragma once

#include "deflab/common.hpp"

#include <vector>

namespace deflab {

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
RealVector project_to_simplex(const RealVector& v);

/// Minimum-norm point of the convex hull of the columns of `points` (Wolfe's
/// algorithm). Returns the barycentric weights, one per column.
RealVector min_norm_hull_weights(const RealMatrix& points, double tol = 1e-13);

} // namespace deflab
