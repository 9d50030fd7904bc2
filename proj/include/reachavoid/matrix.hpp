#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace reachavoid {

// Dense row-major matrix of doubles. The storage for network weights,
// minibatches and gradients.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const;
};

// C := alpha * op(A) * op(B) + beta * C, where op is optional transpose.
// C must already have the result shape.
void gemm(bool trans_a, bool trans_b, double alpha, const Matrix& a,
          const Matrix& b, double beta, Matrix& c);

// Convenience product A * B.
Matrix matmul(const Matrix& a, const Matrix& b);

// Mean squared error between two equal-length vectors.
double mse(std::span<const double> prediction, std::span<const double> target);

}  // namespace reachavoid
