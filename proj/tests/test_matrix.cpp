#include <cmath>
#include <vector>

#include "doctest.h"
#include "reachavoid/error.hpp"
#include "reachavoid/matrix.hpp"
#include "reachavoid/rng.hpp"

namespace {

using reachavoid::Matrix;
using reachavoid::Rng;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
    return m;
}

// Reference product via the textbook triple loop, no blocking, no BLAS.
Matrix naive_gemm(bool trans_a, bool trans_b, double alpha, const Matrix& a,
                  const Matrix& b, double beta, const Matrix& c_in) {
    const std::size_t m = trans_a ? a.cols : a.rows;
    const std::size_t k = trans_a ? a.rows : a.cols;
    const std::size_t n = trans_b ? b.rows : b.cols;
    Matrix c = c_in;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double av = trans_a ? a.at(p, i) : a.at(i, p);
                const double bv = trans_b ? b.at(j, p) : b.at(p, j);
                acc += av * bv;
            }
            c.at(i, j) = alpha * acc + beta * c.at(i, j);
        }
    }
    return c;
}

void check_close(const Matrix& got, const Matrix& want, double tol) {
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got.data[i] == doctest::Approx(want.data[i]).epsilon(tol));
    }
}

}  // namespace

TEST_CASE("gemm matches the naive triple loop for all transpose modes") {
    Rng rng(42);
    const std::size_t shapes[][3] = {
        {1, 1, 1}, {2, 3, 4}, {5, 1, 7}, {8, 8, 8}, {13, 27, 9}, {64, 300, 30},
    };
    for (const auto& s : shapes) {
        const std::size_t m = s[0], k = s[1], n = s[2];
        for (const bool ta : {false, true}) {
            for (const bool tb : {false, true}) {
                const Matrix a = ta ? random_matrix(k, m, rng)
                                    : random_matrix(m, k, rng);
                const Matrix b = tb ? random_matrix(n, k, rng)
                                    : random_matrix(k, n, rng);
                const Matrix c0 = random_matrix(m, n, rng);

                Matrix c = c0;
                reachavoid::gemm(ta, tb, 1.0, a, b, 0.0, c);
                check_close(c, naive_gemm(ta, tb, 1.0, a, b, 0.0, c0), 1e-12);

                c = c0;
                reachavoid::gemm(ta, tb, -0.5, a, b, 2.0, c);
                check_close(c, naive_gemm(ta, tb, -0.5, a, b, 2.0, c0), 1e-12);
            }
        }
    }
}

TEST_CASE("gemm with beta zero overwrites stale values in C") {
    Matrix a(2, 2);
    a.data = {1.0, 2.0, 3.0, 4.0};
    Matrix b(2, 2);
    b.data = {5.0, 6.0, 7.0, 8.0};
    Matrix c(2, 2);
    c.data = {1e300, -1e300, 1e300, -1e300};
    reachavoid::gemm(false, false, 1.0, a, b, 0.0, c);
    CHECK(c.at(0, 0) == doctest::Approx(19.0));
    CHECK(c.at(0, 1) == doctest::Approx(22.0));
    CHECK(c.at(1, 0) == doctest::Approx(43.0));
    CHECK(c.at(1, 1) == doctest::Approx(50.0));
}

TEST_CASE("matmul equals gemm with identity scaling") {
    Rng rng(7);
    const Matrix a = random_matrix(6, 11, rng);
    const Matrix b = random_matrix(11, 4, rng);
    const Matrix got = reachavoid::matmul(a, b);
    Matrix want(6, 4);
    reachavoid::gemm(false, false, 1.0, a, b, 0.0, want);
    check_close(got, want, 1e-15);
}

TEST_CASE("gemm rejects mismatched shapes") {
    Matrix a(2, 3);
    Matrix b(4, 5);
    Matrix c(2, 5);
    CHECK_THROWS_AS(reachavoid::gemm(false, false, 1.0, a, b, 0.0, c),
                    reachavoid::ShapeError);

    Matrix b2(3, 5);
    Matrix c_bad(2, 4);
    CHECK_THROWS_AS(reachavoid::gemm(false, false, 1.0, a, b2, 0.0, c_bad),
                    reachavoid::ShapeError);

    // Transposed operands must be checked against their effective shape.
    Matrix at(3, 2);
    Matrix c2(2, 5);
    CHECK_NOTHROW(reachavoid::gemm(true, false, 1.0, at, b2, 0.0, c2));
    CHECK_THROWS_AS(reachavoid::gemm(true, true, 1.0, at, b2, 0.0, c2),
                    reachavoid::ShapeError);
}

TEST_CASE("mse matches the loop definition") {
    const std::vector<double> p = {1.0, 2.0, -3.0, 0.5};
    const std::vector<double> t = {0.0, 2.5, -2.0, 0.5};
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    CHECK(reachavoid::mse(p, t) == doctest::Approx(acc / 4.0).epsilon(1e-15));
    CHECK(reachavoid::mse(t, t) == doctest::Approx(0.0));
    CHECK_THROWS_AS(reachavoid::mse(p, std::vector<double>{1.0}),
                    reachavoid::ShapeError);
}

TEST_CASE("all_finite flags NaN and infinity") {
    Matrix m(2, 2);
    m.data = {0.0, 1.0, -1.0, 2.0};
    CHECK(m.all_finite());
    m.at(1, 1) = std::nan("");
    CHECK_FALSE(m.all_finite());
    m.at(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(m.all_finite());
}
