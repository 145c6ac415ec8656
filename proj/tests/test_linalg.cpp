#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netgain/linalg.hpp"

#include "support.hpp"

using namespace netgain;
using Catch::Approx;

TEST_CASE("positive definiteness via Cholesky pivots", "[linalg]") {
    CHECK(is_positive_definite(Matrix::identity(2), 1e-12));
    CHECK_FALSE(is_positive_definite(-1.0 * Matrix::identity(2), 1e-12));
    CHECK(is_positive_definite(Matrix{{2, 1}, {1, 2}}, 1e-12));   // eigenvalues {3, 1}
    CHECK_FALSE(is_positive_definite(Matrix{{1, 2}, {2, 1}}, 1e-12));  // eigenvalues {3, -1}
    CHECK_THROWS_AS(is_positive_definite(Matrix(2, 3), 1e-12), DimensionError);
    CHECK_THROWS_AS(is_positive_definite(Matrix{{1, 5}, {-5, 1}}, 1e-12), InvalidInputError);
}

TEST_CASE("discrete Lyapunov solve", "[linalg]") {
    const Matrix p0 = solve_discrete_lyapunov(Matrix(2, 2), Matrix::identity(2));
    CHECK((p0 - Matrix::identity(2)).max_abs() < 1e-14);

    const Matrix p1 = solve_discrete_lyapunov(Matrix{{0.5}}, Matrix{{1.0}});
    CHECK(p1(0, 0) == Approx(4.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix{{1.0}}, Matrix{{1.0}}), NoSolutionError);
    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix(2, 3), Matrix::identity(2)), DimensionError);
    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix(3, 3), Matrix::identity(2)), DimensionError);
    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix(51, 51), Matrix::identity(51)),
                    UnsupportedSizeError);
}

TEST_CASE("lyapunov solutions of Schur matrices are positive definite", "[linalg][property]") {
    testsupport::Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const Matrix a = testsupport::random_with_norm(rng, n, rng.uniform(0.05, 0.95));
        const Matrix p = solve_discrete_lyapunov(a, Matrix::identity(n));
        CHECK(is_positive_definite(p, 1e-12 * std::max(1.0, p.max_abs())));
        const Matrix resid = a.transpose() * p * a - p + Matrix::identity(n);
        CHECK(resid.max_abs() <= 1e-8 * 2.0);
    }
}

TEST_CASE("spectral norm", "[linalg]") {
    CHECK(spectral_norm(Matrix::identity(3)) == Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix{{0, 2}, {0, 0}}) == Approx(2.0).epsilon(1e-12));

    testsupport::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = testsupport::random_matrix(rng, 4, 4);
        const double direct = spectral_norm(a);
        const double via_eig = std::sqrt(sym_eig_range(a.transpose() * a).lambda_max);
        CHECK(direct == Approx(via_eig).epsilon(1e-9));

        const double c = rng.uniform(-3.0, 3.0);
        CHECK(spectral_norm(c * a) == Approx(std::fabs(c) * direct).epsilon(1e-9).margin(1e-12));
    }
}

TEST_CASE("symmetric eigenvalue range", "[linalg]") {
    const auto d = sym_eig_range(Matrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
    CHECK(d.lambda_min == Approx(1.0));
    CHECK(d.lambda_max == Approx(3.0));

    const auto flip = sym_eig_range(Matrix{{0, 1}, {1, 0}});
    CHECK(flip.lambda_min == Approx(-1.0));
    CHECK(flip.lambda_max == Approx(1.0));

    CHECK_THROWS_AS(sym_eig_range(Matrix{{0, 1}, {-1, 0}}), InvalidInputError);

    testsupport::Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(2, 6);
        const Matrix a = testsupport::random_matrix(rng, n, n);
        const Matrix s = a.transpose() * a;
        const auto r = sym_eig_range(s);
        CHECK(r.lambda_min >= -1e-12 * std::max(1.0, s.max_abs()));  // Gram matrices are PSD

        // quadratic-form sandwich on random unit vectors
        for (int k = 0; k < 5; ++k) {
            const Vec x = testsupport::random_unit_vec(rng, n);
            const double q = dot(x, s * x);
            CHECK(q >= r.lambda_min - 1e-9 * std::max(1.0, std::fabs(r.lambda_min)));
            CHECK(q <= r.lambda_max + 1e-9 * std::max(1.0, std::fabs(r.lambda_max)));
        }
    }
}

TEST_CASE("linear solve", "[linalg]") {
    const Vec x0 = solve_linear(Matrix::identity(2), Vec{3.0, 4.0});
    CHECK(x0[0] == 3.0);
    CHECK(x0[1] == 4.0);

    const Vec x1 = solve_linear(Matrix{{2, 0}, {0, 4}}, Vec{2.0, 4.0});
    CHECK(x1[0] == Approx(1.0));
    CHECK(x1[1] == Approx(1.0));

    // Hilbert 4x4 against a constructed right-hand side
    Matrix h(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) h(i, j) = 1.0 / (i + j + 1);
    const Vec ones(4, 1.0);
    const Vec x = solve_linear(h, h * ones);
    for (double xi : x) CHECK(xi == Approx(1.0).margin(1e-6));

    CHECK_THROWS_AS(solve_linear(Matrix{{1, 1}, {1, 1}}, Vec{1.0, 2.0}), SingularMatrixError);
    CHECK_THROWS_AS(solve_linear(Matrix::identity(2), Vec{1.0}), DimensionError);
}

TEST_CASE("determinant", "[linalg]") {
    CHECK(determinant(Matrix::identity(4)) == Approx(1.0));
    CHECK(determinant(Matrix{{-0.5, 0.5}, {-0.5, -0.5}}) == Approx(0.5).epsilon(1e-12));
    CHECK(determinant(Matrix{{1, 2}, {1, 2}}) == 0.0);

    testsupport::Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = testsupport::random_matrix(rng, 4, 4);
        const Matrix b = testsupport::random_matrix(rng, 4, 4);
        const double dab = determinant(a * b);
        const double prod = determinant(a) * determinant(b);
        CHECK(dab == Approx(prod).epsilon(1e-8).margin(1e-12));
    }
}
