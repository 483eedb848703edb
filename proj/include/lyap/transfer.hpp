#pragma once

#include "matrix.hpp"

namespace lyap {

/// Schrodinger transfer matrix [[a, -1], [1, 0]]; det = 1 exactly.
inline RealSquareMatrix transfer(double a) { return RealSquareMatrix{{a, -1.0}, {1.0, 0.0}}; }

}  // namespace lyap
