#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "netgain/diagstab.hpp"
#include "netgain/errors.hpp"
#include "netgain/linalg.hpp"
#include "netgain/matrix.hpp"
#include "netgain/tolerances.hpp"

namespace netgain {

/// Finite L2 gain description of one sub-system: ||y||_T <= gamma ||u||_T + beta
/// on m input/output channels.
struct SubsystemGain {
    double gamma = 1.0;
    double beta = 0.0;
    int m = 1;
};

/// Rank-one interconnection u_i = v_i + s_i y_i + k_i (g'y): per-channel
/// self-gain plus a broadcast weighted average of all outputs.
struct RankOneInterconnection {
    Vec s;
    Vec k;
    Vec g;
};

/// A network of finite-gain sub-systems coupled through the interconnection
/// matrix A (u = v + A y), partitioned in blocks A_ij of size m_i x m_j.
struct NetworkSpec {
    std::vector<SubsystemGain> subsystems;
    Matrix a;
    std::optional<RankOneInterconnection> rank_one;

    [[nodiscard]] int total_dim() const {
        int m = 0;
        for (const auto& s : subsystems) m += s.m;
        return m;
    }

    [[nodiscard]] std::vector<int> block_sizes() const {
        std::vector<int> b;
        b.reserve(subsystems.size());
        for (const auto& s : subsystems) b.push_back(s.m);
        return b;
    }

    [[nodiscard]] bool is_siso() const {
        return std::all_of(subsystems.begin(), subsystems.end(),
                           [](const SubsystemGain& s) { return s.m == 1; });
    }

    /// Gamma = diag(gamma_1 I_{m_1}, ..., gamma_n I_{m_n}).
    [[nodiscard]] Matrix gain_matrix() const {
        Vec d;
        d.reserve(static_cast<std::size_t>(total_dim()));
        for (const auto& s : subsystems) d.insert(d.end(), static_cast<std::size_t>(s.m), s.gamma);
        return Matrix::diagonal(d);
    }

    void validate() const {
        if (subsystems.empty()) throw InvalidInputError("network: no subsystems");
        for (const auto& s : subsystems) {
            if (!(s.gamma > 0.0)) throw InvalidInputError("network: gamma must be positive");
            if (s.beta < 0.0) throw InvalidInputError("network: beta must be nonnegative");
            if (s.m < 1) throw InvalidInputError("network: m must be at least 1");
        }
        const int m = total_dim();
        if (a.rows() != m || a.cols() != m)
            throw DimensionError("network: A must be " + std::to_string(m) + "x" + std::to_string(m));
        if (rank_one) {
            const std::size_t n = subsystems.size();
            if (rank_one->s.size() != n || rank_one->k.size() != n || rank_one->g.size() != n)
                throw DimensionError("network: rank_one vectors must have one entry per subsystem");
        }
    }
};

/// Certified input-to-output bound ||y||_T <= rho ||v||_T + beta, together
/// with the constants it was assembled from.
struct GainBound {
    double rho = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double s = 0.0;
    double r = 0.0;
    double d_min = 0.0;
    double d_max = 0.0;
    DtdsCertificate certificate;
};

namespace detail {

/// Bound constants for a fixed epsilon. sigma0 is the certified scaled norm
/// of Gamma A. Returns false when s would be nonpositive.
struct BoundParts {
    double s = 0.0;
    double r = 0.0;
    double rho = 0.0;
    double beta = 0.0;
};

inline bool assemble_bound(const NetworkSpec& net, const Vec& block_d, double sigma0,
                           double epsilon, BoundParts& out) {
    const double stretch = std::sqrt(1.0 + epsilon);
    out.s = 1.0 - stretch * sigma0;
    if (!(out.s > 0.0)) return false;

    double gamma_max = 0.0;
    for (const auto& sub : net.subsystems) gamma_max = std::max(gamma_max, sub.gamma);

    double d_min = block_d[0], d_max = block_d[0];
    for (double d : block_d) {
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }

    double r2 = 0.0;
    for (std::size_t i = 0; i < net.subsystems.size(); ++i) {
        const double bi = net.subsystems[i].beta;
        const double qi2 = ((1.0 + epsilon) * bi * bi + epsilon * epsilon) / epsilon;
        r2 += block_d[i] * qi2;
    }
    out.r = std::sqrt(r2);
    out.rho = stretch * gamma_max * std::sqrt(d_max / d_min) / out.s;
    out.beta = out.r / (out.s * std::sqrt(d_min));
    return true;
}

}  // namespace detail

/// Certifies finite-gain L2 stability of the network: requires Gamma A to be
/// block-diagonally stable, then extracts an explicit (rho, beta) bound.
/// epsilon is chosen by golden-section minimization of rho + beta over
/// log10(epsilon) in [-12, 2] subject to s > 0; with all beta_i = 0 this
/// drives epsilon to the lower cap. Absence means the sufficient condition
/// was not certified.
inline std::optional<GainBound> verify_network(const NetworkSpec& net,
                                               const Tolerances& cfg = Tolerances::defaults()) {
    net.validate();
    const Matrix ga = net.gain_matrix() * net.a;
    auto cert = dtds_search(ga, net.block_sizes(), cfg);
    if (!cert) return std::nullopt;

    // per-subsystem d values (constant within each block by construction)
    Vec block_d;
    block_d.reserve(net.subsystems.size());
    {
        std::size_t pos = 0;
        for (const auto& sub : net.subsystems) {
            block_d.push_back(cert->d[pos]);
            pos += static_cast<std::size_t>(sub.m);
        }
    }

    // certified scaled norm of Gamma A under this D
    Vec theta(cert->d.size());
    for (std::size_t i = 0; i < cert->d.size(); ++i) theta[i] = std::log(cert->d[i]);
    const double sigma0 = detail::scaled_norm_objective(ga, theta, cfg);
    if (!(sigma0 < 1.0)) return std::nullopt;

    const auto objective = [&](double log10_eps) {
        detail::BoundParts parts;
        if (!detail::assemble_bound(net, block_d, sigma0, std::pow(10.0, log10_eps), parts))
            return std::numeric_limits<double>::infinity();
        return parts.rho + parts.beta;
    };
    double log10_eps = -12.0;
    detail::golden_min(objective, -12.0, 2.0, 1e-9, &log10_eps);

    GainBound bound;
    bound.epsilon = std::pow(10.0, log10_eps);
    detail::BoundParts parts;
    if (!detail::assemble_bound(net, block_d, sigma0, bound.epsilon, parts)) {
        // fall back to the cap; s > 0 is guaranteed there since sigma0 < 1
        bound.epsilon = 1e-12;
        if (!detail::assemble_bound(net, block_d, sigma0, bound.epsilon, parts)) return std::nullopt;
    }
    bound.s = parts.s;
    bound.r = parts.r;
    bound.rho = parts.rho;
    bound.beta = parts.beta;
    bound.d_min = *std::min_element(cert->d.begin(), cert->d.end());
    bound.d_max = *std::max_element(cert->d.begin(), cert->d.end());
    bound.certificate = std::move(*cert);
    return bound;
}

/// Report of the five sufficient conditions for SISO networks. Each item that
/// evaluates true certifies finite-gain L2 stability on its own.
struct ChecklistReport {
    bool gains_le_one_and_a_dtds = false;  ///< all gamma_i <= 1 and A diagonally stable
    bool nonnegative_and_schur = false;    ///< A >= 0 entrywise and Gamma A Schur
    bool identical_symmetric_schur = false;///< identical sub-systems, A symmetric, Gamma A Schur
    bool triangular_schur = false;         ///< A triangular and Gamma A Schur
    bool rank_one_route = false;           ///< rank-one interconnection test
    bool rank_one_present = false;

    [[nodiscard]] bool any() const {
        return gains_le_one_and_a_dtds || nonnegative_and_schur || identical_symmetric_schur ||
               triangular_schur || rank_one_route;
    }
};

/// Verdict plus the underlying rank-one diagnostic.
struct RankOneAnalysis {
    bool stable = false;
    RankOneReport report;
};

/// Applies the exact rank-one criterion to a SISO network interconnected as
/// u_i = v_i + s_i y_i + k_i (g'y): delta_i = gamma_i s_i, u = Gamma k, v = g.
inline RankOneAnalysis analyze_rank_one(const std::vector<SubsystemGain>& gains,
                                        const RankOneInterconnection& conn,
                                        const Tolerances& cfg = Tolerances::defaults()) {
    const std::size_t n = gains.size();
    if (conn.s.size() != n || conn.k.size() != n || conn.g.size() != n)
        throw DimensionError("analyze_rank_one: vector lengths must match subsystem count");
    for (const auto& g : gains)
        if (g.m != 1) throw UnsupportedShapeError("analyze_rank_one: requires SISO sub-systems");

    RankOnePerturbation p;
    p.delta.resize(n);
    p.u.resize(n);
    p.v = conn.g;
    for (std::size_t i = 0; i < n; ++i) {
        p.delta[i] = gains[i].gamma * conn.s[i];
        if (!(std::fabs(p.delta[i]) < 1.0))
            throw PreconditionError("analyze_rank_one: requires |gamma_i s_i| < 1");
        p.u[i] = gains[i].gamma * conn.k[i];
        if (conn.g[i] < 0.0)
            throw InvalidInputError("analyze_rank_one: averaging weights must be nonnegative");
    }

    RankOneAnalysis out;
    out.report = rank_one_perturbation_dtds(p, cfg);
    out.stable = out.report.dtds;
    return out;
}

/// Evaluates the five SISO sufficient conditions. Conditions whose
/// preconditions fail (e.g. |gamma_i s_i| >= 1 on the rank-one route) simply
/// report false.
inline ChecklistReport checklist(const NetworkSpec& net,
                                 const Tolerances& cfg = Tolerances::defaults()) {
    net.validate();
    if (!net.is_siso()) throw UnsupportedShapeError("checklist: requires all m_i = 1");

    ChecklistReport rep;
    const Matrix& a = net.a;
    const int n = a.rows();
    const Matrix ga = net.gain_matrix() * a;
    const double zero_tol = cfg.strict * std::max(1.0, a.max_abs());

    bool gains_le_one = true;
    for (const auto& s : net.subsystems) gains_le_one &= s.gamma <= 1.0 + cfg.strict;
    if (gains_le_one) rep.gains_le_one_and_a_dtds = dtds_search(a, std::nullopt, cfg).has_value();

    bool nonneg = true;
    for (int i = 0; i < n && nonneg; ++i)
        for (int j = 0; j < n; ++j) nonneg &= a(i, j) >= -zero_tol;
    if (nonneg) rep.nonnegative_and_schur = is_schur(ga, cfg);

    bool identical = true;
    for (const auto& s : net.subsystems)
        identical &= s.gamma == net.subsystems[0].gamma && s.beta == net.subsystems[0].beta;
    const bool symmetric = detail::symmetry_defect(a) <= cfg.symmetry_rel * std::max(1.0, a.max_abs());
    if (identical && symmetric) rep.identical_symmetric_schur = is_schur(ga, cfg);

    bool upper = true, lower = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i > j) upper &= std::fabs(a(i, j)) <= zero_tol;
            if (i < j) lower &= std::fabs(a(i, j)) <= zero_tol;
        }
    if (upper || lower) rep.triangular_schur = is_schur(ga, cfg);

    rep.rank_one_present = net.rank_one.has_value();
    if (net.rank_one) {
        try {
            rep.rank_one_route = analyze_rank_one(net.subsystems, *net.rank_one, cfg).stable;
        } catch (const Error&) {
            rep.rank_one_route = false;
        }
    }
    return rep;
}

/// Two-subsystem feedback test: the three closed-form inequalities on
/// Gamma A, equivalent to its 2x2 diagonal stability.
inline bool two_gain_feedback(const Matrix& a, double gamma1, double gamma2,
                              const Tolerances& cfg = Tolerances::defaults()) {
    if (a.rows() != 2 || a.cols() != 2)
        throw DimensionError("two_gain_feedback: expected a 2x2 matrix");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
        throw InvalidInputError("two_gain_feedback: gains must be positive");
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double gg = gamma1 * gamma2;
    const double t = cfg.strict;
    return gg * std::fabs(det) < 1.0 - t &&
           std::fabs(gamma1 * a(0, 0) + gamma2 * a(1, 1)) < 1.0 + gg * det - t &&
           std::fabs(gamma1 * a(0, 0) - gamma2 * a(1, 1)) < 1.0 - gg * det - t;
}

/// One grid point of the stability-region comparison.
struct RegionRow {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    bool standard = false;  ///< classic loop condition gamma1 + gamma2 < 1
    bool dtds = false;      ///< diagonal-stability condition on Gamma A
};

/// Sweeps (gamma1, gamma2) over (0, 1.2]^2 in steps of grid_step, comparing
/// the classic small-gain region with the diagonal-stability region. Rows are
/// ordered by gamma1, then gamma2.
inline std::vector<RegionRow> region_sweep(const Matrix& a, double grid_step,
                                           const Tolerances& cfg = Tolerances::defaults()) {
    if (a.rows() != 2 || a.cols() != 2)
        throw DimensionError("region_sweep: expected a 2x2 matrix");
    if (!(grid_step > 0.0) || grid_step > 0.5)
        throw InvalidInputError("region_sweep: step must lie in (0, 0.5]");

    std::vector<RegionRow> rows;
    const int count = static_cast<int>(std::floor(1.2 / grid_step + 1e-9));
    rows.reserve(static_cast<std::size_t>(count) * static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
        const double g1 = i * grid_step;
        for (int j = 1; j <= count; ++j) {
            const double g2 = j * grid_step;
            RegionRow row;
            row.gamma1 = g1;
            row.gamma2 = g2;
            row.standard = g1 + g2 < 1.0 - cfg.strict;
            row.dtds = two_gain_feedback(a, g1, g2, cfg);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace netgain
