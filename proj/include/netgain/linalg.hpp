#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "netgain/errors.hpp"
#include "netgain/matrix.hpp"
#include "netgain/tolerances.hpp"

namespace netgain {

/// Extremal eigenvalues of a symmetric matrix.
struct SymEigRange {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

namespace detail {

inline void require_square(const Matrix& a, const char* who) {
    if (!a.is_square()) throw DimensionError(std::string(who) + ": matrix must be square");
}

inline double symmetry_defect(const Matrix& s) {
    double d = 0.0;
    for (int i = 0; i < s.rows(); ++i)
        for (int j = i + 1; j < s.cols(); ++j) d = std::max(d, std::fabs(s(i, j) - s(j, i)));
    return d;
}

inline void require_symmetric(const Matrix& s, double rel, const char* who) {
    require_square(s, who);
    if (symmetry_defect(s) > rel * std::max(1.0, s.max_abs()))
        throw InvalidInputError(std::string(who) + ": matrix is not symmetric");
}

/// Cyclic Jacobi eigenvalue iteration. Rotates until the off-diagonal
/// Frobenius mass drops below offdiag_rel times the input norm. Returns all
/// eigenvalues (unsorted); accumulates eigenvectors as columns of *vectors
/// when requested.
inline Vec jacobi_eigenvalues(const Matrix& s_in, double offdiag_rel, Matrix* vectors = nullptr) {
    const int n = s_in.rows();
    Matrix a = s_in;
    // work on the symmetrized input so tiny defects cannot bias the sweep
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = m;
        }
    if (vectors) *vectors = Matrix::identity(n);

    const double stop = offdiag_rel * std::max(a.frobenius_norm(), 1e-300);
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
        if (std::sqrt(off) <= stop) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * apq, a(q, q) - a(p, p));
                const double c = std::cos(theta);
                const double s = std::sin(theta);

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.5 * (a(p, q) + a(q, p));
                if (vectors) {
                    for (int k = 0; k < n; ++k) {
                        const double vkp = (*vectors)(k, p);
                        const double vkq = (*vectors)(k, q);
                        (*vectors)(k, p) = c * vkp - s * vkq;
                        (*vectors)(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    return a.diag();
}

/// Kronecker product, column-major vec convention.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (int p = 0; p < b.rows(); ++p)
                for (int q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

/// Partial-pivot LU factorization, reusable across right-hand sides.
class LuFactor {
public:
    LuFactor(const Matrix& m, double pivot_floor) : lu_(m), perm_(static_cast<std::size_t>(m.rows())) {
        require_square(m, "LuFactor");
        const int n = lu_.rows();
        for (int i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::fabs(lu_(r, col)) > std::fabs(lu_(piv, col))) piv = r;
            if (std::fabs(lu_(piv, col)) < pivot_floor)
                throw SingularMatrixError("LuFactor: singular matrix");
            if (piv != col) {
                for (int j = 0; j < n; ++j) std::swap(lu_(col, j), lu_(piv, j));
                std::swap(perm_[static_cast<std::size_t>(col)], perm_[static_cast<std::size_t>(piv)]);
            }
            for (int r = col + 1; r < n; ++r) {
                const double f = lu_(r, col) / lu_(col, col);
                lu_(r, col) = f;
                if (f == 0.0) continue;
                for (int j = col + 1; j < n; ++j) lu_(r, j) -= f * lu_(col, j);
            }
        }
    }

    [[nodiscard]] Vec solve(const Vec& b) const {
        const int n = lu_.rows();
        if (static_cast<int>(b.size()) != n) throw DimensionError("LuFactor: rhs length mismatch");
        Vec x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= lu_(i, j) * x[static_cast<std::size_t>(j)];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[static_cast<std::size_t>(i)] -= lu_(i, j) * x[static_cast<std::size_t>(j)];
            x[static_cast<std::size_t>(i)] /= lu_(i, i);
        }
        return x;
    }

private:
    Matrix lu_;
    std::vector<int> perm_;
};

}  // namespace detail

/// True iff the (symmetrized) input admits a Cholesky factorization whose
/// pivots all exceed tol.
inline bool is_positive_definite(const Matrix& s, double tol,
                                 const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_symmetric(s, cfg.symmetry_rel, "is_positive_definite");
    if (tol < 0) throw InvalidInputError("is_positive_definite: tol must be nonnegative");
    const int n = s.rows();
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double pivot = s(j, j);
        for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > tol)) return false;
        l(j, j) = std::sqrt(pivot);
        for (int i = j + 1; i < n; ++i) {
            double v = 0.5 * (s(i, j) + s(j, i));
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return true;
}

/// Solves Mx = b by Gaussian elimination with partial pivoting.
inline Vec solve_linear(const Matrix& m_in, const Vec& b_in,
                        const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(m_in, "solve_linear");
    const int n = m_in.rows();
    if (static_cast<int>(b_in.size()) != n)
        throw DimensionError("solve_linear: rhs length mismatch");

    Matrix m = m_in;
    Vec b = b_in;
    const double pivot_floor = cfg.solve_pivot_rel * std::max(m.max_abs(), 1e-300);

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
        if (std::fabs(m(piv, col)) < pivot_floor)
            throw SingularMatrixError("solve_linear: singular matrix");
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(m(col, j), m(piv, j));
            std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(piv)]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    Vec x(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / m(i, i);
    }
    return x;
}

/// Determinant by pivoted elimination. Returns 0 exactly when a pivot column
/// is entirely below the pivot floor.
inline double determinant(const Matrix& a_in) {
    detail::require_square(a_in, "determinant");
    Matrix m = a_in;
    const int n = m.rows();
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(piv, col))) piv = r;
        if (m(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (int j = col; j < n; ++j) std::swap(m(col, j), m(piv, j));
            det = -det;
        }
        det *= m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return det;
}

/// Extremal eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
inline SymEigRange sym_eig_range(const Matrix& s, const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_symmetric(s, cfg.symmetry_rel, "sym_eig_range");
    if (s.rows() == 0) throw DimensionError("sym_eig_range: empty matrix");
    Vec ev = detail::jacobi_eigenvalues(s, cfg.jacobi_offdiag_rel);
    auto [mn, mx] = std::minmax_element(ev.begin(), ev.end());
    return {*mn, *mx};
}

/// Induced 2-norm: sqrt of the largest eigenvalue of A'A.
inline double spectral_norm(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Matrix g = a.transpose() * a;
    const double lmax = sym_eig_range(g, cfg).lambda_max;
    return std::sqrt(std::max(lmax, 0.0));
}

/// Solves A'PA - P = -Q for symmetric Q through the Kronecker vectorization
/// of the n^2-dimensional linear system. Throws NoSolutionError when the
/// vectorized system is singular (A has an eigenvalue pair with product 1).
inline Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q,
                                      const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "solve_discrete_lyapunov");
    detail::require_symmetric(q, cfg.symmetry_rel, "solve_discrete_lyapunov");
    if (a.rows() != q.rows())
        throw DimensionError("solve_discrete_lyapunov: A and Q sizes differ");
    const int n = a.rows();
    if (n > 50) throw UnsupportedSizeError("solve_discrete_lyapunov: n > 50");

    const Matrix at = a.transpose();
    Matrix k = detail::kron(at, at);
    for (int i = 0; i < n * n; ++i) k(i, i) -= 1.0;

    // column-major vec
    Vec rhs(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(j) * n + i] = -q(i, j);

    Vec x;
    try {
        x = solve_linear(k, rhs, cfg);
    } catch (const SingularMatrixError&) {
        throw NoSolutionError("solve_discrete_lyapunov: no unique solution");
    }

    Matrix p(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) p(i, j) = x[static_cast<std::size_t>(j) * n + i];
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double m = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = p(j, i) = m;
        }

    const Matrix resid = at * p * a - p + q;
    if (resid.max_abs() > cfg.lyap_residual_rel * (1.0 + q.max_abs()))
        throw NoSolutionError("solve_discrete_lyapunov: residual too large");
    return p;
}

}  // namespace netgain
