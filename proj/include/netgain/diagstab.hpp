#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "netgain/errors.hpp"
#include "netgain/linalg.hpp"
#include "netgain/matrix.hpp"
#include "netgain/tolerances.hpp"

namespace netgain {

/// Witness for discrete-time diagonal stability: a positive diagonal D with
/// A'DA - D negative definite. Valid iff margin < 0; d is normalized so that
/// max d_i = 1 and the verdict can be re-checked from (A, d) alone.
struct DtdsCertificate {
    Vec d;
    double margin = 0.0;
};

/// Continuous-time counterpart: positive diagonal D with DB + B'D negative
/// definite.
struct CtdsCertificate {
    Vec d;
    double margin = 0.0;
};

/// A = diag(delta) + u v' with |delta_i| < 1 and v >= 0 entrywise.
struct RankOnePerturbation {
    Vec delta;
    Vec u;
    Vec v;
};

/// Diagnostics accompanying the rank-one diagonal-stability verdict.
struct RankOneReport {
    bool dtds = false;
    bool schur = false;
    bool unit_eigenvalue = false;  ///< v'(I-Delta)^{-1}u hit 1; A cannot be Schur
    double c = 0.0;
    double sum = 0.0;
    Matrix a;
};

/// lambda_max(A'DA - D) for D = diag(d); the quantity a certificate asserts
/// to be negative.
inline double dtds_margin(const Matrix& a, const Vec& d,
                          const Tolerances& cfg = Tolerances::defaults()) {
    const int n = a.rows();
    if (static_cast<int>(d.size()) != n) throw DimensionError("dtds_margin: d length mismatch");
    Matrix da(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) da(i, j) = d[static_cast<std::size_t>(i)] * a(i, j);
    Matrix m = a.transpose() * da;
    for (int i = 0; i < n; ++i) m(i, i) -= d[static_cast<std::size_t>(i)];
    return sym_eig_range(m, cfg).lambda_max;
}

/// lambda_max(DB + B'D) for D = diag(d).
inline double ctds_margin(const Matrix& b, const Vec& d,
                          const Tolerances& cfg = Tolerances::defaults()) {
    const int n = b.rows();
    if (static_cast<int>(d.size()) != n) throw DimensionError("ctds_margin: d length mismatch");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = d[static_cast<std::size_t>(i)] * b(i, j) + b(j, i) * d[static_cast<std::size_t>(j)];
    return sym_eig_range(m, cfg).lambda_max;
}

/// Schur stability test through solvability of A'PA - P = -I with P positive
/// definite. Inputs within ~1e-9 of the stability boundary may be classified
/// either way.
inline bool is_schur(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "is_schur");
    if (a.rows() == 0) return true;
    try {
        const Matrix p = solve_discrete_lyapunov(a, Matrix::identity(a.rows()), cfg);
        return is_positive_definite(p, cfg.pd_pivot * std::max(1.0, p.max_abs()), cfg);
    } catch (const NoSolutionError&) {
        return false;
    }
}

/// Largest |c| such that (cA)'P(cA) - P remains negative definite:
/// sqrt(lambda_min(P) / lambda_max(A'PA)).
inline double scaling_margin(const Matrix& a, const Matrix& p,
                             const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "scaling_margin");
    if (a.max_abs() == 0.0)
        throw DegenerateInputError("scaling_margin: zero matrix has unbounded margin");
    detail::require_symmetric(p, cfg.symmetry_rel, "scaling_margin");
    if (!is_positive_definite(p, cfg.pd_pivot * std::max(1.0, p.max_abs()), cfg))
        throw InvalidInputError("scaling_margin: P must be positive definite");
    const double num = sym_eig_range(p, cfg).lambda_min;
    const double den = sym_eig_range(a.transpose() * p * a, cfg).lambda_max;
    return std::sqrt(num / den);
}

/// Closed-form 2x2 diagonal-stability test: |det A| < 1,
/// |a11 + a22| < 1 + det A and |a11 - a22| < 1 - det A, all strict.
inline bool dtds_2x2(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    if (a.rows() != 2 || a.cols() != 2) throw DimensionError("dtds_2x2: expected a 2x2 matrix");
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double t = cfg.strict;
    return std::fabs(det) < 1.0 - t && std::fabs(a(0, 0) + a(1, 1)) < 1.0 + det - t &&
           std::fabs(a(0, 0) - a(1, 1)) < 1.0 - det - t;
}

/// Spectral radius of an entrywise-nonnegative matrix. Power iteration with a
/// small diagonal shift (which makes the dominant root strictly dominant);
/// falls back to bisection over scaled Schur tests when the iteration has not
/// settled after the iteration budget.
inline double spectral_radius_nonnegative(const Matrix& b,
                                          const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(b, "spectral_radius_nonnegative");
    const int n = b.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (b(i, j) < 0.0)
                throw InvalidInputError("spectral_radius_nonnegative: negative entry");
    if (b.max_abs() == 0.0) return 0.0;

    const double shift = 1e-3 * (1.0 + b.max_abs());
    Vec x(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    int settled = 0;
    for (int it = 0; it < cfg.power_max_iters; ++it) {
        Vec y = b * x;
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += shift * x[static_cast<std::size_t>(i)];
        const double ny = norm2(y);
        if (ny == 0.0) return 0.0;  // unreachable with the shift, kept for safety
        const double next = ny;
        for (double& yi : y) yi /= ny;
        x = std::move(y);
        if (std::fabs(next - lambda) <= cfg.power_tol * std::max(1.0, next)) {
            if (++settled >= 3) return next - shift;
        } else {
            settled = 0;
        }
        lambda = next;
    }

    // bisection on r: b/r is Schur iff rho(b) < r
    double hi = std::max(spectral_norm(b, cfg), 1e-12);
    double lo = 0.0;
    hi *= 1.0 + 1e-6;
    for (int it = 0; it < 80 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (is_schur((1.0 / mid) * b, cfg))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Spectral radius of a general real matrix via bisection over scaled Schur
/// tests. Used to measure stability margins; accuracy degrades to ~1e-3 for
/// defective eigenvalues, where the Lyapunov solve refuses near the boundary.
inline double spectral_radius(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "spectral_radius");
    if (a.max_abs() == 0.0) return 0.0;
    double hi = std::max(spectral_norm(a, cfg), 1e-12) * (1.0 + 1e-6);
    double lo = 0.0;
    for (int it = 0; it < 100 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (is_schur((1.0 / mid) * a, cfg))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Sufficient test: |A| Schur implies A is diagonally stable. A false result
/// refutes only when A is entrywise nonnegative.
inline bool dtds_nonnegative_route(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "dtds_nonnegative_route");
    return spectral_radius_nonnegative(a.cwise_abs(), cfg) < 1.0 - cfg.strict;
}

/// Searches for a nonsingular diagonal Omega making Omega A Omega^{-1}
/// symmetric. Requires a_ij and a_ji to vanish together and their product to
/// be positive on every nonzero pair; the log-ratios are then propagated over
/// a spanning forest of the nonzero pattern and every remaining pair is
/// verified. Returns the diagonal of Omega (first vertex of each component
/// fixed to 1), or absent.
inline std::optional<Vec> symmetrizer(const Matrix& a,
                                      const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "symmetrizer");
    const int n = a.rows();
    const double zero_tol = cfg.strict * std::max(1.0, a.max_abs());

    auto nonzero = [&](int i, int j) { return std::fabs(a(i, j)) > zero_tol; };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (nonzero(i, j) != nonzero(j, i)) return std::nullopt;
            if (nonzero(i, j) && a(i, j) * a(j, i) <= 0.0) return std::nullopt;
        }

    Vec t(static_cast<std::size_t>(n), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int root = 0; root < n; ++root) {
        if (seen[static_cast<std::size_t>(root)]) continue;
        seen[static_cast<std::size_t>(root)] = 1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (int j = 0; j < n; ++j) {
                if (j == i || !nonzero(i, j) || seen[static_cast<std::size_t>(j)]) continue;
                t[static_cast<std::size_t>(j)] =
                    t[static_cast<std::size_t>(i)] + std::log(a(i, j) / a(j, i));
                seen[static_cast<std::size_t>(j)] = 1;
                q.push(j);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i || !nonzero(i, j)) continue;
            const double want = std::log(a(i, j) / a(j, i));
            if (std::fabs(t[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(i)] - want) > 1e-9)
                return std::nullopt;
        }

    Vec omega(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) omega[static_cast<std::size_t>(i)] = std::exp(0.5 * t[static_cast<std::size_t>(i)]);
    return omega;
}

// ---------------------------------------------------------------------------
// Diagonal-scaling searches
// ---------------------------------------------------------------------------

namespace detail {

/// Deterministic uniform generator; avoids the implementation-defined
/// std::uniform_real_distribution so results are identical across platforms.
class SearchRng {
public:
    explicit SearchRng(std::uint64_t seed) : state_(seed) {}

    double canonical() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        double u1 = canonical();
        while (u1 <= 0.0) u1 = canonical();
        const double u2 = canonical();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         double tol, double* arg_out) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    if (arg_out) *arg_out = x;
    return fx;
}

/// Expands per-block log-coordinates to a full diagonal.
inline Vec expand_blocks(const Vec& theta, const std::vector<int>& blocks) {
    Vec full;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        full.insert(full.end(), static_cast<std::size_t>(blocks[b]), theta[b]);
    return full;
}

/// Cyclic coordinate golden-section descent inside [-box, box]^k, followed by
/// golden-section line searches along seeded random directions to escape
/// coordinate-aligned kinks of the (convex) objective.
class CoordinateSearch {
public:
    CoordinateSearch(std::function<double(const Vec&)> objective, int dims, const Tolerances& cfg)
        : f_(std::move(objective)), dims_(dims), cfg_(cfg) {}

    double descend(Vec& theta, int sweeps) const {
        double best = f_(theta);
        for (int s = 0; s < sweeps; ++s) {
            const double before = best;
            for (int i = 0; i < dims_; ++i) {
                Vec probe = theta;
                double x = 0.0;
                const double fx = golden_min(
                    [&](double xi) {
                        probe[static_cast<std::size_t>(i)] = xi;
                        return f_(probe);
                    },
                    -cfg_.search_box, cfg_.search_box, cfg_.golden_tol, &x);
                if (fx < best) {
                    theta[static_cast<std::size_t>(i)] = x;
                    best = fx;
                }
            }
            if (before - best < cfg_.search_stall) break;
        }
        return best;
    }

    double polish(Vec& theta, double best, SearchRng& rng, int directions) const {
        for (int k = 0; k < directions; ++k) {
            Vec w(static_cast<std::size_t>(dims_));
            double nw = 0.0;
            for (double& wi : w) {
                wi = rng.gaussian();
                nw += wi * wi;
            }
            nw = std::sqrt(nw);
            if (nw == 0.0) continue;
            for (double& wi : w) wi /= nw;

            // stay inside the box along theta + t*w
            double t_lo = -cfg_.search_box, t_hi = cfg_.search_box;
            for (int i = 0; i < dims_; ++i) {
                const double wi = w[static_cast<std::size_t>(i)];
                if (wi == 0.0) continue;
                const double lo = (-cfg_.search_box - theta[static_cast<std::size_t>(i)]) / wi;
                const double hi = (cfg_.search_box - theta[static_cast<std::size_t>(i)]) / wi;
                t_lo = std::max(t_lo, std::min(lo, hi));
                t_hi = std::min(t_hi, std::max(lo, hi));
            }
            if (t_hi <= t_lo) continue;

            double t = 0.0;
            const double ft = golden_min(
                [&](double ti) {
                    Vec probe = theta;
                    for (int i = 0; i < dims_; ++i)
                        probe[static_cast<std::size_t>(i)] += ti * w[static_cast<std::size_t>(i)];
                    return f_(probe);
                },
                t_lo, t_hi, cfg_.golden_tol, &t);
            if (ft < best) {
                for (int i = 0; i < dims_; ++i)
                    theta[static_cast<std::size_t>(i)] += t * w[static_cast<std::size_t>(i)];
                best = ft;
            }
        }
        return best;
    }

    /// Full schedule: descent from theta0 plus a direction polish; hint
    /// starts and a few seeded restarts engage only while the result stays
    /// above `good_enough`.
    double run(Vec& theta, const std::vector<Vec>& hints, double good_enough) const {
        SearchRng rng(0x5ca1ab1eULL);
        Vec best_theta = theta;
        double best = descend(best_theta, cfg_.search_sweeps);
        best = polish(best_theta, best, rng, 30);
        if (best >= good_enough) {
            for (const Vec& h : hints) {
                Vec th = h;
                for (double& x : th) x = std::clamp(x, -cfg_.search_box, cfg_.search_box);
                double fh = descend(th, cfg_.search_sweeps);
                fh = polish(th, fh, rng, 15);
                if (fh < best) {
                    best = fh;
                    best_theta = th;
                }
            }
        }
        for (int r = 0; r < 4 && best >= good_enough; ++r) {
            Vec th(static_cast<std::size_t>(dims_));
            for (double& x : th) x = rng.uniform(-3.0, 3.0);
            double fr = descend(th, cfg_.search_sweeps / 2);
            fr = polish(th, fr, rng, 15);
            if (fr < best) {
                best = fr;
                best_theta = th;
            }
        }
        theta = best_theta;
        return best;
    }

private:
    std::function<double(const Vec&)> f_;
    int dims_;
    const Tolerances& cfg_;
};

/// ||D^{1/2} A D^{-1/2}|| with d = exp(expanded theta).
inline double scaled_norm_objective(const Matrix& a, const Vec& theta_full,
                                    const Tolerances& cfg) {
    const int n = a.rows();
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = a(i, j) * std::exp(0.5 * (theta_full[static_cast<std::size_t>(i)] -
                                                theta_full[static_cast<std::size_t>(j)]));
    return spectral_norm(m, cfg);
}

/// In-place strict Cholesky; true iff all pivots are positive. Clobbers m.
inline bool cholesky_strict_inplace(Matrix& m) {
    const int n = m.rows();
    for (int j = 0; j < n; ++j) {
        double pivot = m(j, j);
        for (int k = 0; k < j; ++k) pivot -= m(j, k) * m(j, k);
        if (!(pivot > 0.0)) return false;
        const double r = std::sqrt(pivot);
        m(j, j) = r;
        for (int i = j + 1; i < n; ++i) {
            double v = 0.5 * (m(i, j) + m(j, i));
            for (int k = 0; k < j; ++k) v -= m(i, k) * m(j, k);
            m(i, j) = v / r;
        }
    }
    return true;
}

/// Fills scratch with D - A'DA; positive definiteness of this matrix is the
/// certificate condition.
inline void fill_dtds_gram(const Matrix& a, const Vec& d, Matrix& scratch) {
    const int n = a.rows();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += a(k, i) * d[static_cast<std::size_t>(k)] * a(k, j);
            const double v = (i == j ? d[static_cast<std::size_t>(i)] : 0.0) - s;
            scratch(i, j) = scratch(j, i) = v;
        }
}

/// Fills scratch with -(DB + B'D).
inline void fill_ctds_gram(const Matrix& b, const Vec& d, Matrix& scratch) {
    const int n = b.rows();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            scratch(i, j) = -(d[static_cast<std::size_t>(i)] * b(i, j) +
                              b(j, i) * d[static_cast<std::size_t>(j)]);
}

inline std::vector<int> resolve_blocks(int n, const std::optional<std::vector<int>>& block_sizes,
                                       const char* who) {
    if (!block_sizes) return std::vector<int>(static_cast<std::size_t>(n), 1);
    int total = 0;
    for (int b : *block_sizes) {
        if (b <= 0) throw InvalidInputError(std::string(who) + ": block sizes must be positive");
        total += b;
    }
    if (total != n) throw DimensionError(std::string(who) + ": block sizes must sum to n");
    return *block_sizes;
}

/// Power-iteration Perron scaling hint: d_i = y_i / x_i from the left/right
/// dominant vectors of |A| + shift. Only meaningful when |A| is Schur, but
/// harmless as a warm start otherwise.
inline std::optional<Vec> perron_hint(const Matrix& a, const Tolerances& cfg) {
    const int n = a.rows();
    const Matrix b = a.cwise_abs();
    if (b.max_abs() == 0.0) return std::nullopt;
    const double shift = 1e-3 * (1.0 + b.max_abs());
    const Matrix bt = b.transpose();
    Vec x(static_cast<std::size_t>(n), 1.0), y(static_cast<std::size_t>(n), 1.0);
    for (int it = 0; it < 200; ++it) {
        Vec nx = b * x, ny = bt * y;
        for (int i = 0; i < n; ++i) {
            nx[static_cast<std::size_t>(i)] += shift * x[static_cast<std::size_t>(i)];
            ny[static_cast<std::size_t>(i)] += shift * y[static_cast<std::size_t>(i)];
        }
        const double sx = norm2(nx), sy = norm2(ny);
        if (sx == 0.0 || sy == 0.0) return std::nullopt;
        for (int i = 0; i < n; ++i) {
            x[static_cast<std::size_t>(i)] = nx[static_cast<std::size_t>(i)] / sx;
            y[static_cast<std::size_t>(i)] = ny[static_cast<std::size_t>(i)] / sy;
        }
    }
    Vec theta(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)], yi = y[static_cast<std::size_t>(i)];
        if (xi < 1e-8 || yi < 1e-8) return std::nullopt;
        theta[static_cast<std::size_t>(i)] =
            std::clamp(std::log(yi / xi), -cfg.search_box, cfg.search_box);
    }
    return theta;
}

}  // namespace detail

/// Feasibility search for a diagonal-stability certificate: minimizes the
/// scaled norm ||D^{1/2} A D^{-1/2}|| over D = diag(exp theta) by cyclic
/// coordinate golden-section descent in log-space (theta tied within blocks
/// when block_sizes is given). Certifies when the optimum drops below
/// 1 - cert_gap; a returned certificate is always re-validated through the
/// eigenvalue margin. Absence means "no certificate found", not a refutation.
/// best_norm, when given, receives the best scaled norm reached (also on
/// failure), which measures how close the instance sits to the threshold.
inline std::optional<DtdsCertificate> dtds_search(
    const Matrix& a, const std::optional<std::vector<int>>& block_sizes = std::nullopt,
    const Tolerances& cfg = Tolerances::defaults(), double* best_norm = nullptr) {
    detail::require_square(a, "dtds_search");
    const int n = a.rows();
    const std::vector<int> blocks = detail::resolve_blocks(n, block_sizes, "dtds_search");
    if (best_norm) *best_norm = std::numeric_limits<double>::infinity();
    if (!is_schur(a, cfg)) return std::nullopt;

    const int k = static_cast<int>(blocks.size());
    auto objective = [&](const Vec& theta) {
        return detail::scaled_norm_objective(a, detail::expand_blocks(theta, blocks), cfg);
    };

    std::vector<Vec> hints;
    const bool plain_diag = (k == n);
    if (plain_diag) {
        if (auto omega = symmetrizer(a, cfg)) {
            Vec h(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] = 2.0 * std::log((*omega)[static_cast<std::size_t>(i)]);
            hints.push_back(std::move(h));
        }
        if (auto h = detail::perron_hint(a, cfg)) hints.push_back(std::move(*h));
    }

    Vec theta(static_cast<std::size_t>(k), 0.0);
    detail::CoordinateSearch search(objective, k, cfg);
    const double f_star = search.run(theta, hints, 1.0 - cfg.cert_gap);
    if (best_norm) *best_norm = f_star;
    if (f_star >= 1.0 - cfg.cert_gap) return std::nullopt;

    Vec d = detail::expand_blocks(theta, blocks);
    double dmax = -std::numeric_limits<double>::infinity();
    for (double& x : d) {
        x = std::exp(x);
        dmax = std::max(dmax, x);
    }
    for (double& x : d) x /= dmax;

    DtdsCertificate cert{std::move(d), 0.0};
    cert.margin = dtds_margin(a, cert.d, cfg);
    if (!(cert.margin < 0.0)) return std::nullopt;
    return cert;
}

/// Brute-force ground truth for small problems: exhaustive log-space grid
/// with one diagonal entry pinned by scale invariance. Supports at most 4
/// free parameters; used in tests as an oracle up to grid resolution.
inline std::optional<DtdsCertificate> dtds_oracle(
    const Matrix& a, const std::optional<std::vector<int>>& block_sizes = std::nullopt,
    const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "dtds_oracle");
    const int n = a.rows();
    const std::vector<int> blocks = detail::resolve_blocks(n, block_sizes, "dtds_oracle");
    const int k = static_cast<int>(blocks.size());
    const int free_dims = k - 1;
    if (free_dims > 4) throw UnsupportedSizeError("dtds_oracle: more than 4 free parameters");

    constexpr int kGridPoints = 201;
    Vec grid(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) grid[static_cast<std::size_t>(i)] = -10.0 + 20.0 * i / (kGridPoints - 1);

    Vec theta(static_cast<std::size_t>(k), 0.0);  // last coordinate pinned at log d = 0
    std::vector<int> idx(static_cast<std::size_t>(std::max(free_dims, 1)), 0);
    Matrix scratch(n, n);

    const auto try_point = [&]() -> std::optional<DtdsCertificate> {
        Vec d = detail::expand_blocks(theta, blocks);
        double dmax = 0.0;
        for (double& x : d) {
            x = std::exp(x);
            dmax = std::max(dmax, x);
        }
        detail::fill_dtds_gram(a, d, scratch);
        if (detail::cholesky_strict_inplace(scratch)) {
            for (double& x : d) x /= dmax;
            DtdsCertificate cert{std::move(d), 0.0};
            cert.margin = dtds_margin(a, cert.d, cfg);
            return cert;
        }
        return std::nullopt;
    };

    if (free_dims == 0) return try_point();

    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
        for (int i = 0; i < free_dims; ++i)
            theta[static_cast<std::size_t>(i)] = grid[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        if (auto cert = try_point()) return cert;
        int pos = 0;
        while (pos < free_dims && ++idx[static_cast<std::size_t>(pos)] == kGridPoints) {
            idx[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == free_dims) break;
    }
    return std::nullopt;
}

/// Cayley map (A + I)(A - I)^{-1}, bridging discrete- and continuous-time
/// diagonal stability. Requires 1 not to be an eigenvalue of A.
inline Matrix bilinear_transform(const Matrix& a, const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(a, "bilinear_transform");
    const int n = a.rows();
    Matrix m = a;
    for (int i = 0; i < n; ++i) m(i, i) -= 1.0;

    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row = std::max(row, std::fabs(m(i, j)));
        scale *= row;
    }
    if (std::fabs(determinant(m)) <= cfg.unit_eig_det_rel * scale)
        throw UnitEigenvalueError("bilinear_transform: 1 is an eigenvalue of A");

    Matrix ap = a;
    for (int i = 0; i < n; ++i) ap(i, i) += 1.0;

    // solve M' X = (A + I)' column by column, then transpose
    const Matrix mt = m.transpose();
    const Matrix apt = ap.transpose();
    Matrix result(n, n);
    for (int j = 0; j < n; ++j) {
        Vec rhs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = apt(i, j);
        Vec col = solve_linear(mt, rhs, cfg);
        for (int i = 0; i < n; ++i) result(j, i) = col[static_cast<std::size_t>(i)];
    }
    return result;
}

/// Continuous-time certificate search: minimizes lambda_max(DB + B'D) over
/// trace-normalized D = diag(exp theta) by the same coordinate scheme.
/// Certifies when the optimum is below -cert_gap * ||B||. best_margin, when
/// given, receives the best trace-normalized objective value reached.
inline std::optional<CtdsCertificate> ctds_search(const Matrix& b,
                                                  const Tolerances& cfg = Tolerances::defaults(),
                                                  double* best_margin = nullptr) {
    detail::require_square(b, "ctds_search");
    const int n = b.rows();
    const double norm_b = spectral_norm(b, cfg);
    if (best_margin) *best_margin = std::numeric_limits<double>::infinity();
    if (norm_b == 0.0) return std::nullopt;

    auto objective = [&](const Vec& theta) {
        Vec d(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            d[static_cast<std::size_t>(i)] = std::exp(theta[static_cast<std::size_t>(i)]);
            sum += d[static_cast<std::size_t>(i)];
        }
        for (double& x : d) x *= static_cast<double>(n) / sum;
        return ctds_margin(b, d, cfg);
    };

    Vec theta(static_cast<std::size_t>(n), 0.0);
    detail::CoordinateSearch search(objective, n, cfg);
    const double threshold = -cfg.cert_gap * norm_b;
    const double g_star = search.run(theta, {}, threshold);
    if (best_margin) *best_margin = g_star;
    if (g_star >= threshold) return std::nullopt;

    Vec d(static_cast<std::size_t>(n));
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)] = std::exp(theta[static_cast<std::size_t>(i)]);
        dmax = std::max(dmax, d[static_cast<std::size_t>(i)]);
    }
    for (double& x : d) x /= dmax;

    CtdsCertificate cert{std::move(d), 0.0};
    cert.margin = ctds_margin(b, cert.d, cfg);
    if (!(cert.margin < 0.0)) return std::nullopt;
    return cert;
}

/// Grid counterpart of ctds_search for cross-checking at n <= 4.
inline std::optional<CtdsCertificate> ctds_oracle(const Matrix& b,
                                                  const Tolerances& cfg = Tolerances::defaults()) {
    detail::require_square(b, "ctds_oracle");
    const int n = b.rows();
    if (n - 1 > 4) throw UnsupportedSizeError("ctds_oracle: more than 4 free parameters");

    constexpr int kGridPoints = 201;
    Vec theta(static_cast<std::size_t>(n), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(std::max(n - 1, 1)), 0);
    const int free_dims = n - 1;
    Matrix scratch(n, n);

    const auto try_point = [&]() -> std::optional<CtdsCertificate> {
        Vec d(static_cast<std::size_t>(n));
        double dmax = 0.0;
        for (int i = 0; i < n; ++i) {
            d[static_cast<std::size_t>(i)] = std::exp(theta[static_cast<std::size_t>(i)]);
            dmax = std::max(dmax, d[static_cast<std::size_t>(i)]);
        }
        detail::fill_ctds_gram(b, d, scratch);
        if (detail::cholesky_strict_inplace(scratch)) {
            for (double& x : d) x /= dmax;
            CtdsCertificate cert{std::move(d), 0.0};
            cert.margin = ctds_margin(b, cert.d, cfg);
            return cert;
        }
        return std::nullopt;
    };

    if (free_dims == 0) return try_point();
    while (true) {
        for (int i = 0; i < free_dims; ++i)
            theta[static_cast<std::size_t>(i)] = -10.0 + 20.0 * idx[static_cast<std::size_t>(i)] / (kGridPoints - 1);
        if (auto cert = try_point()) return cert;
        int pos = 0;
        while (pos < free_dims && ++idx[static_cast<std::size_t>(pos)] == kGridPoints) {
            idx[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == free_dims) break;
    }
    return std::nullopt;
}

/// Exact diagonal-stability test for A = diag(delta) + u v' with |delta_i| < 1
/// and v >= 0: A is diagonally stable iff it is Schur and
/// sum_i [c u_i v_i]_+ / (1 - delta_i^2) < 1 with
/// c = -2 / (1 + v'(Delta - I)^{-1} u).
inline RankOneReport rank_one_perturbation_dtds(const RankOnePerturbation& p,
                                                const Tolerances& cfg = Tolerances::defaults()) {
    const std::size_t n = p.delta.size();
    if (p.u.size() != n || p.v.size() != n)
        throw DimensionError("rank_one_perturbation_dtds: length mismatch");
    for (double di : p.delta)
        if (!(std::fabs(di) < 1.0))
            throw InvalidInputError("rank_one_perturbation_dtds: requires |delta_i| < 1");
    for (double vi : p.v)
        if (vi < 0.0) throw InvalidInputError("rank_one_perturbation_dtds: requires v >= 0");

    RankOneReport rep;
    rep.a = Matrix(static_cast<int>(n), static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            rep.a(static_cast<int>(i), static_cast<int>(j)) = p.u[i] * p.v[j];
        rep.a(static_cast<int>(i), static_cast<int>(i)) += p.delta[i];
    }

    // v'(I - Delta)^{-1} u, the resolvent term; (Delta - I)^{-1} is diagonal
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += p.v[i] * p.u[i] / (1.0 - p.delta[i]);

    if (std::fabs(t - 1.0) <= cfg.rank_one_unit_eig) {
        rep.unit_eigenvalue = true;
        return rep;  // 1 is an eigenvalue of A: not Schur, not diagonally stable
    }
    rep.schur = is_schur(rep.a, cfg);
    if (!rep.schur) return rep;

    rep.c = -2.0 / (1.0 - t);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += std::max(rep.c * p.u[i] * p.v[i], 0.0) / (1.0 - p.delta[i] * p.delta[i]);
    rep.sum = sum;
    rep.dtds = sum < 1.0 - cfg.strict;
    return rep;
}

/// Exact test for the pure rank-one matrix u v': diagonally stable iff
/// |v|'|u| < 1.
inline bool rank_one_dtds(const Vec& u, const Vec& v,
                          const Tolerances& cfg = Tolerances::defaults()) {
    if (u.size() != v.size()) throw DimensionError("rank_one_dtds: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::fabs(u[i]) * std::fabs(v[i]);
    return s < 1.0 - cfg.strict;
}

}  // namespace netgain
