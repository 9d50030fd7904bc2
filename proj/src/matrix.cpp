#include "reachavoid/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "reachavoid/error.hpp"

#ifdef RA_HAVE_CBLAS
#include <cblas.h>
#endif

namespace reachavoid {

namespace {

// The library parallelizes at the episode/seed level; the BLAS backend must
// not spawn its own threads underneath that.
[[maybe_unused]] const bool blas_single_threaded = [] {
#ifdef RA_HAVE_CBLAS
    ::setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
#endif
    return true;
}();

void check_gemm_shapes(bool trans_a, bool trans_b, const Matrix& a,
                       const Matrix& b, const Matrix& c) {
    const std::size_t am = trans_a ? a.cols : a.rows;
    const std::size_t ak = trans_a ? a.rows : a.cols;
    const std::size_t bk = trans_b ? b.cols : b.rows;
    const std::size_t bn = trans_b ? b.rows : b.cols;
    if (ak != bk || c.rows != am || c.cols != bn) {
        throw ShapeError("gemm: incompatible shapes " + std::to_string(a.rows) +
                         "x" + std::to_string(a.cols) + (trans_a ? "^T" : "") +
                         " * " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols) + (trans_b ? "^T" : "") +
                         " -> " + std::to_string(c.rows) + "x" +
                         std::to_string(c.cols));
    }
}

#ifndef RA_HAVE_CBLAS
// Fallback kernel when no CBLAS is available at build time.
void gemm_plain(bool trans_a, bool trans_b, double alpha, const Matrix& a,
                const Matrix& b, double beta, Matrix& c) {
    const std::size_t m = c.rows, n = c.cols;
    const std::size_t k = trans_a ? a.rows : a.cols;
    for (double& v : c.data) v *= beta;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av =
                alpha * (trans_a ? a.at(p, i) : a.at(i, p));
            if (av == 0.0) continue;
            double* crow = c.row(i);
            if (!trans_b) {
                const double* brow = b.row(p);
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
            } else {
                for (std::size_t j = 0; j < n; ++j) crow[j] += av * b.at(j, p);
            }
        }
    }
}
#endif

}  // namespace

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void gemm(bool trans_a, bool trans_b, double alpha, const Matrix& a,
          const Matrix& b, double beta, Matrix& c) {
    check_gemm_shapes(trans_a, trans_b, a, b, c);
#ifdef RA_HAVE_CBLAS
    const std::size_t k = trans_a ? a.rows : a.cols;
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(c.rows),
                static_cast<int>(c.cols), static_cast<int>(k), alpha,
                a.data.data(), static_cast<int>(a.cols), b.data.data(),
                static_cast<int>(b.cols), beta, c.data.data(),
                static_cast<int>(c.cols));
#else
    gemm_plain(trans_a, trans_b, alpha, a, b, beta, c);
#endif
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    gemm(false, false, 1.0, a, b, 0.0, c);
    return c;
}

double mse(std::span<const double> prediction, std::span<const double> target) {
    if (prediction.size() != target.size()) {
        throw ShapeError("mse: length mismatch " +
                         std::to_string(prediction.size()) + " vs " +
                         std::to_string(target.size()));
    }
    if (prediction.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(prediction.size());
}

}  // namespace reachavoid
