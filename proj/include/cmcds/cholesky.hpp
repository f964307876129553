#pragma once

#include <cmath>
#include <string>

#include "cmcds/errors.hpp"
#include "cmcds/matrix.hpp"

namespace cmcds {

/// Lower-triangular C with C C' = Q for a symmetric unit-diagonal Q.
/// Positive-semidefinite inputs are completed with a pivot tolerance: a pivot
/// within `pivotTolerance` of zero yields a zero column instead of failing.
/// A pivot below -pivotTolerance means Q is indefinite.
inline Matrix choleskyLower(const Matrix& q, double pivotTolerance = 1e-12) {
    requireCorrelationMatrix(q);
    const std::size_t n = q.rows();
    Matrix c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = q(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= c(j, k) * c(j, k);
        if (d < -pivotTolerance)
            throw NumericalError("correlation matrix is indefinite: pivot " + std::to_string(d) +
                                 " at column " + std::to_string(j));
        c(j, j) = d > pivotTolerance ? std::sqrt(d) : 0.0;
        for (std::size_t i = j + 1; i < n; ++i) {
            if (c(j, j) == 0.0) {
                c(i, j) = 0.0;
                continue;
            }
            double s = q(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= c(i, k) * c(j, k);
            c(i, j) = s / c(j, j);
        }
    }
    return c;
}

} // namespace cmcds
