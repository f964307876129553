#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cmcds/errors.hpp"

namespace cmcds {

/// Small dense row-major matrix; just enough for correlation blocks and
/// Cholesky factors.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    bool empty() const { return data_.empty(); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Correlation matrix with a common off-diagonal value.
    static Matrix flatCorrelation(std::size_t n, double rho) {
        Matrix m(n, n, rho);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline void requireCorrelationMatrix(const Matrix& q, double tol = 1e-12) {
    if (q.rows() != q.cols())
        throw ValidationError("correlation matrix must be square");
    for (std::size_t i = 0; i < q.rows(); ++i) {
        if (std::abs(q(i, i) - 1.0) > tol)
            throw ValidationError("correlation matrix diagonal entry != 1 at " +
                                  std::to_string(i));
        for (std::size_t j = 0; j < i; ++j) {
            if (std::abs(q(i, j) - q(j, i)) > tol)
                throw ValidationError("correlation matrix not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            if (q(i, j) < -1.0 - tol || q(i, j) > 1.0 + tol)
                throw ValidationError("correlation entry outside [-1,1]");
        }
    }
}

} // namespace cmcds
