#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netgain/diagstab.hpp"
#include "netgain/errors.hpp"
#include "netgain/linalg.hpp"
#include "netgain/matrix.hpp"
#include "netgain/smallgain.hpp"
#include "netgain/tolerances.hpp"

namespace netgain {

/// Discrete-time state-space realization x+ = Fx + Gu, y = Hx + Ju. A zero
/// state dimension (empty F) models a purely static gain.
struct LtiSystem {
    Matrix f;  ///< state transition, nx x nx
    Matrix g;  ///< input map, nx x m
    Matrix h;  ///< output map, m x nx
    Matrix j;  ///< feedthrough, m x m

    [[nodiscard]] int state_dim() const { return f.rows(); }
    [[nodiscard]] int io_dim() const { return j.rows(); }

    void validate() const {
        if (!f.is_square()) throw DimensionError("LtiSystem: F must be square");
        if (!j.is_square()) throw DimensionError("LtiSystem: J must be square");
        const int nx = f.rows();
        const int m = j.rows();
        if (g.rows() != nx || g.cols() != m) throw DimensionError("LtiSystem: G must be nx x m");
        if (h.rows() != m || h.cols() != nx) throw DimensionError("LtiSystem: H must be m x nx");
    }

    [[nodiscard]] static LtiSystem pure_gain(Matrix gain) {
        const int m = gain.rows();
        return LtiSystem{Matrix(0, 0), Matrix(0, m), Matrix(m, 0), std::move(gain)};
    }

    /// SISO one-pole lag y(z) = b / (z - a) u(z).
    [[nodiscard]] static LtiSystem one_pole(double a, double b) {
        return LtiSystem{Matrix{{a}}, Matrix{{b}}, Matrix{{1.0}}, Matrix{{0.0}}};
    }
};

/// Recorded input/output trajectories with running truncated L2 norms.
struct SignalLog {
    int horizon = 0;
    std::vector<Vec> v;
    std::vector<Vec> y;
    Vec norm_v;  ///< ||v||_T for T = 1..horizon, nondecreasing
    Vec norm_y;
};

/// Outcome of the seeded bound-validation runs.
struct EmpiricalReport {
    int trials = 0;
    int horizon = 0;
    double max_ratio = 0.0;  ///< largest observed ||y||_T / ||v||_T
    int violations = 0;      ///< steps where the certified bound failed
    double rho = 0.0;
    double beta = 0.0;
};

namespace detail {

inline Matrix block_diag(const std::vector<Matrix>& blocks) {
    int r = 0, c = 0;
    for (const auto& b : blocks) {
        r += b.rows();
        c += b.cols();
    }
    Matrix out(r, c);
    int ro = 0, co = 0;
    for (const auto& b : blocks) {
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j) out(ro + i, co + j) = b(i, j);
        ro += b.rows();
        co += b.cols();
    }
    return out;
}

/// sigma_max of the complex transfer matrix H (e^{iw} I - F)^{-1} G + J,
/// computed entirely in real arithmetic through the 2nx-dimensional
/// augmented system.
inline double transfer_norm_at(const LtiSystem& sys, double omega, const Tolerances& cfg) {
    const int nx = sys.state_dim();
    const int m = sys.io_dim();
    if (nx == 0) return spectral_norm(sys.j, cfg);

    const double c = std::cos(omega);
    const double s = std::sin(omega);
    Matrix k(2 * nx, 2 * nx);
    for (int i = 0; i < nx; ++i) {
        for (int jj = 0; jj < nx; ++jj) {
            k(i, jj) = -sys.f(i, jj);
            k(nx + i, nx + jj) = -sys.f(i, jj);
        }
        k(i, i) += c;
        k(nx + i, nx + i) += c;
        k(i, nx + i) = -s;
        k(nx + i, i) = s;
    }
    const LuFactor lu(k, 1e-14 * std::max(1.0, k.max_abs()));

    Matrix xr(nx, m), xi(nx, m);
    for (int col = 0; col < m; ++col) {
        Vec rhs(static_cast<std::size_t>(2 * nx), 0.0);
        for (int i = 0; i < nx; ++i) rhs[static_cast<std::size_t>(i)] = sys.g(i, col);
        const Vec sol = lu.solve(rhs);
        for (int i = 0; i < nx; ++i) {
            xr(i, col) = sol[static_cast<std::size_t>(i)];
            xi(i, col) = sol[static_cast<std::size_t>(nx + i)];
        }
    }
    const Matrix tr = sys.h * xr + sys.j;
    const Matrix ti = sys.h * xi;

    // real embedding [[Tr, -Ti], [Ti, Tr]] shares the singular values of T
    Matrix z(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int jj = 0; jj < m; ++jj) {
            z(i, jj) = tr(i, jj);
            z(m + i, m + jj) = tr(i, jj);
            z(i, m + jj) = -ti(i, jj);
            z(m + i, jj) = ti(i, jj);
        }
    return spectral_norm(z, cfg);
}

inline double grid_gain(const LtiSystem& sys, int points, const Tolerances& cfg) {
    double best = 0.0;
    for (int k = 0; k < points; ++k) {
        const double omega = 3.141592653589793 * k / (points - 1);
        best = std::max(best, transfer_norm_at(sys, omega, cfg));
    }
    return best;
}

}  // namespace detail

/// Frequency-grid lower bound on the L2 gain of a realization: the largest
/// transfer-matrix singular value over a uniform grid on [0, pi], with the
/// grid doubled until the estimate moves by less than gain_refine_rel.
/// Returns (gamma, 0): the zero-state response carries no bias term.
inline std::pair<double, double> l2_gain(const LtiSystem& sys, int grid_points,
                                         const Tolerances& cfg = Tolerances::defaults()) {
    sys.validate();
    if (grid_points < 512) throw InvalidInputError("l2_gain: grid_points must be at least 512");
    if (sys.state_dim() == 0) return {spectral_norm(sys.j, cfg), 0.0};
    if (!is_schur(sys.f, cfg)) throw UnstableSubsystemError("l2_gain: F is not Schur");

    int points = grid_points;
    double gamma = detail::grid_gain(sys, points, cfg);
    for (int round = 0; round < 6; ++round) {
        points *= 2;
        const double refined = std::max(gamma, detail::grid_gain(sys, points, cfg));
        const bool settled = std::fabs(refined - gamma) <= cfg.gain_refine_rel * std::max(refined, 1e-12);
        gamma = refined;
        if (settled) break;
    }
    return {gamma, 0.0};
}

/// Bias admissible for a nonzero initial state: the L2 norm of the free
/// output response, sqrt(x0' Wo x0) with Wo the observability gramian.
inline double initial_state_bias(const LtiSystem& sys, const Vec& x0,
                                 const Tolerances& cfg = Tolerances::defaults()) {
    sys.validate();
    if (static_cast<int>(x0.size()) != sys.state_dim())
        throw DimensionError("initial_state_bias: x0 length mismatch");
    if (sys.state_dim() == 0) return 0.0;
    if (!is_schur(sys.f, cfg)) throw UnstableSubsystemError("initial_state_bias: F is not Schur");
    const Matrix wo = solve_discrete_lyapunov(sys.f, sys.h.transpose() * sys.h, cfg);
    return std::sqrt(std::max(dot(x0, wo * x0), 0.0));
}

/// Steps the interconnected network: per step solve the static loop
/// y = H x + J (v + A y), then u = v + A y and x+ = F x + G u. The loop
/// matrix I - J_blk A must be nonsingular (the numeric stand-in for
/// well-posedness). Initial state is zero unless x0 is given.
inline SignalLog simulate(const NetworkSpec& net, const std::vector<LtiSystem>& realizations,
                          const std::vector<Vec>& v, int horizon,
                          const Tolerances& cfg = Tolerances::defaults(), const Vec& x0 = {}) {
    net.validate();
    if (realizations.size() != net.subsystems.size())
        throw DimensionError("simulate: one realization per subsystem required");
    for (std::size_t i = 0; i < realizations.size(); ++i) {
        realizations[i].validate();
        if (realizations[i].io_dim() != net.subsystems[i].m)
            throw DimensionError("simulate: realization I/O dimension mismatch");
    }
    if (horizon <= 0) throw InvalidInputError("simulate: horizon must be positive");
    if (static_cast<int>(v.size()) < horizon)
        throw DimensionError("simulate: input signal shorter than horizon");

    std::vector<Matrix> fs, gs, hs, js;
    for (const auto& r : realizations) {
        fs.push_back(r.f);
        gs.push_back(r.g);
        hs.push_back(r.h);
        js.push_back(r.j);
    }
    const Matrix f_blk = detail::block_diag(fs);
    const Matrix g_blk = detail::block_diag(gs);
    const Matrix h_blk = detail::block_diag(hs);
    const Matrix j_blk = detail::block_diag(js);
    const int m = net.total_dim();
    const int nx = f_blk.rows();

    Matrix loop = Matrix::identity(m) - j_blk * net.a;
    std::optional<detail::LuFactor> lu;
    try {
        lu.emplace(loop, cfg.loop_pivot_rel * std::max(1.0, loop.max_abs()));
    } catch (const SingularMatrixError&) {
        throw NotWellPosedError("simulate: static loop matrix is singular");
    }

    Vec x = x0;
    if (x.empty()) x.assign(static_cast<std::size_t>(nx), 0.0);
    if (static_cast<int>(x.size()) != nx) throw DimensionError("simulate: x0 length mismatch");

    SignalLog log;
    log.horizon = horizon;
    log.v.reserve(static_cast<std::size_t>(horizon));
    log.y.reserve(static_cast<std::size_t>(horizon));
    log.norm_v.reserve(static_cast<std::size_t>(horizon));
    log.norm_y.reserve(static_cast<std::size_t>(horizon));

    double sum_v = 0.0, sum_y = 0.0;
    for (int k = 0; k < horizon; ++k) {
        const Vec& vk = v[static_cast<std::size_t>(k)];
        if (static_cast<int>(vk.size()) != m) throw DimensionError("simulate: input width mismatch");

        Vec rhs = h_blk * x;
        const Vec jv = j_blk * vk;
        for (int i = 0; i < m; ++i) rhs[static_cast<std::size_t>(i)] += jv[static_cast<std::size_t>(i)];
        const Vec y = lu->solve(rhs);

        Vec u = net.a * y;
        for (int i = 0; i < m; ++i) u[static_cast<std::size_t>(i)] += vk[static_cast<std::size_t>(i)];

        Vec x_next = f_blk * x;
        const Vec gu = g_blk * u;
        for (int i = 0; i < nx; ++i) x_next[static_cast<std::size_t>(i)] += gu[static_cast<std::size_t>(i)];
        x = std::move(x_next);

        sum_v += dot(vk, vk);
        sum_y += dot(y, y);
        log.v.push_back(vk);
        log.y.push_back(y);
        log.norm_v.push_back(std::sqrt(sum_v));
        log.norm_y.push_back(std::sqrt(sum_y));
    }
    return log;
}

namespace detail {

/// Direction of largest closed-loop DC amplification, used as the
/// deterministic stress input. Falls back to the first basis vector when the
/// DC loop is singular.
inline Vec worst_static_direction(const NetworkSpec& net, const std::vector<LtiSystem>& reals,
                                  const Tolerances& cfg) {
    const int m = net.total_dim();
    Vec e1(static_cast<std::size_t>(m), 0.0);
    e1[0] = 1.0;
    try {
        std::vector<Matrix> dcs;
        for (const auto& r : reals) {
            if (r.state_dim() == 0) {
                dcs.push_back(r.j);
                continue;
            }
            const int nx = r.state_dim();
            Matrix imf = Matrix::identity(nx) - r.f;
            const LuFactor lu(imf, 1e-14 * std::max(1.0, imf.max_abs()));
            Matrix x(nx, r.io_dim());
            for (int col = 0; col < r.io_dim(); ++col) {
                Vec rhs(static_cast<std::size_t>(nx));
                for (int i = 0; i < nx; ++i) rhs[static_cast<std::size_t>(i)] = r.g(i, col);
                const Vec sol = lu.solve(rhs);
                for (int i = 0; i < nx; ++i) x(i, col) = sol[static_cast<std::size_t>(i)];
            }
            dcs.push_back(r.h * x + r.j);
        }
        const Matrix t_blk = block_diag(dcs);
        Matrix loop = Matrix::identity(m) - t_blk * net.a;
        const LuFactor lu(loop, 1e-12 * std::max(1.0, loop.max_abs()));
        Matrix closed(m, m);
        for (int col = 0; col < m; ++col) {
            Vec rhs(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) rhs[static_cast<std::size_t>(i)] = t_blk(i, col);
            const Vec sol = lu.solve(rhs);
            for (int i = 0; i < m; ++i) closed(i, col) = sol[static_cast<std::size_t>(i)];
        }
        const Matrix gram = closed.transpose() * closed;
        Vec w(static_cast<std::size_t>(m), 1.0 / std::sqrt(static_cast<double>(m)));
        for (int it = 0; it < 300; ++it) {
            Vec nw = gram * w;
            const double nn = norm2(nw);
            if (nn < 1e-300) return e1;
            for (double& wi : nw) wi /= nn;
            w = std::move(nw);
        }
        return w;
    } catch (const Error&) {
        return e1;
    }
}

}  // namespace detail

/// Runs seeded random trials plus an impulse trial and a worst-direction
/// static trial, asserting the certified bound ||y||_T <= rho ||v||_T + beta
/// at every recorded horizon. Throws ConfigurationError when a realized gain
/// exceeds its declared gamma (the certificate premise would be void).
inline EmpiricalReport empirical_bound_check(const NetworkSpec& net,
                                             const std::vector<LtiSystem>& realizations,
                                             const GainBound& bound, int trials, int horizon,
                                             std::uint64_t seed,
                                             const Tolerances& cfg = Tolerances::defaults()) {
    net.validate();
    for (std::size_t i = 0; i < realizations.size(); ++i) {
        const double realized = l2_gain(realizations[i], 512, cfg).first;
        if (realized > net.subsystems[i].gamma + 1e-6)
            throw ConfigurationError("empirical_bound_check: realized gain " +
                                     format_shortest(realized) + " exceeds declared gamma " +
                                     format_shortest(net.subsystems[i].gamma));
    }

    const int m = net.total_dim();
    EmpiricalReport report;
    report.horizon = horizon;
    report.rho = bound.rho;
    report.beta = bound.beta;

    std::vector<std::vector<Vec>> inputs;
    {
        std::vector<Vec> impulse(static_cast<std::size_t>(horizon), Vec(static_cast<std::size_t>(m), 0.0));
        impulse[0][0] = 1.0;
        inputs.push_back(std::move(impulse));

        const Vec w = detail::worst_static_direction(net, realizations, cfg);
        inputs.emplace_back(static_cast<std::size_t>(horizon), w);

        detail::SearchRng rng(seed);
        for (int t = 0; t < trials; ++t) {
            std::vector<Vec> v(static_cast<std::size_t>(horizon), Vec(static_cast<std::size_t>(m), 0.0));
            for (int k = 0; k < horizon; ++k)
                for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
            inputs.push_back(std::move(v));
        }
    }

    for (const auto& v : inputs) {
        const SignalLog log = simulate(net, realizations, v, horizon, cfg);
        for (int k = 0; k < horizon; ++k) {
            const double nv = log.norm_v[static_cast<std::size_t>(k)];
            const double ny = log.norm_y[static_cast<std::size_t>(k)];
            if (ny > bound.rho * nv + bound.beta + 1e-9 * nv) ++report.violations;
            if (nv > 0.0) report.max_ratio = std::max(report.max_ratio, ny / nv);
        }
        ++report.trials;
    }
    return report;
}

}  // namespace netgain
