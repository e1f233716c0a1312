#pragma once

#include "marginlab/dataset.hpp"

namespace marginlab {

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LPResult {
    LPStatus status = LPStatus::IterationLimit;
    Vector x;            // primal solution (original variables)
    double objective = 0.0;
};

/// Dense two-phase simplex with Bland's rule:
///   maximize c'x  subject to  A x <= b,  x >= 0.
/// Sized for desk-scale problems (hundreds of rows/columns).
LPResult simplex_maximize(const Matrix& A, const Vector& b, const Vector& c,
                          long max_iterations = 200000);

}  // namespace marginlab
