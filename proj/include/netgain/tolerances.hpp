#pragma once

namespace netgain {

/// Central numeric tolerance record. Every comparison against 0 or 1 in the
/// library goes through one of these knobs; no routine hard-codes its own.
struct Tolerances {
    // -- linear algebra kernel --
    double symmetry_rel = 1e-10;       ///< allowed relative symmetry defect
    double pd_pivot = 1e-12;           ///< Cholesky pivot floor (absolute)
    double lyap_residual_rel = 1e-8;   ///< discrete Lyapunov residual bound
    double jacobi_offdiag_rel = 1e-12; ///< Jacobi off-diagonal stopping mass
    double solve_pivot_rel = 1e-12;    ///< elimination pivot floor, relative
    double solve_residual_rel = 1e-9;  ///< linear solve residual bound

    // -- stability verdicts --
    double strict = 1e-12;         ///< slack for strict closed-form inequalities
    double cert_gap = 1e-9;        ///< scaled-norm search certifies at f < 1 - cert_gap
    double unit_eig_det_rel = 1e-10; ///< |det(A - I)| gate for the bilinear transform
    double rank_one_unit_eig = 1e-10; ///< v'(I-Delta)^{-1}u == 1 detection band
    double schur_boundary = 1e-9;  ///< documented fuzziness band of is_schur

    // -- spectral radius of nonnegative matrices --
    double power_tol = 1e-12;
    int power_max_iters = 500;

    // -- diagonal-scaling searches --
    int search_sweeps = 50;        ///< cyclic coordinate sweeps
    double search_box = 10.0;      ///< per-coordinate log-space interval half-width
    double search_stall = 1e-10;   ///< stop when a sweep improves less than this
    double golden_tol = 1e-8;      ///< golden-section interval width target

    // -- simulation / gain estimation --
    double loop_pivot_rel = 1e-10; ///< well-posedness pivot threshold
    double gain_refine_rel = 1e-4; ///< frequency-grid doubling convergence

    static const Tolerances& defaults() {
        static const Tolerances t{};
        return t;
    }
};

}  // namespace netgain
