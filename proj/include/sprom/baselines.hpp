#pragma once

#include <vector>

#include "sprom/integrate.hpp"
#include "sprom/modal.hpp"

namespace sprom {

/// Time-domain Galerkin ROM on the leading W-orthonormal POD modes.
struct PodGalerkinRom {
    Mat basis;          // N_x x r
    LtiSystem reduced;  // (Phi^* W A Phi, Phi^* W B, C Phi)
};

PodGalerkinRom pod_galerkin(const LtiSystem& sys, const Weight& w,
                            const PodBasis& state_pod, int r);

/// Integrates the reduced equations with the same adaptive integrator as the
/// full-order path and lifts the result back to state space.
Trajectory pod_galerkin_solve(const PodGalerkinRom& rom, const Weight& w,
                              const Vec& q0, const ForcingSignal& f,
                              const FrequencyGrid& grid,
                              const IntegrateOptions& opts = {});

/// Balanced truncation with forcing whitening, computed in the W^{1/2}
/// coordinate frame so the observability Gramian measures the W-norm of the
/// full state.
struct BalancedTruncationRom {
    Mat lift;           // N_x x r, balanced -> state
    Mat project;        // N_x x r, state -> balanced via project^* (x)
    LtiSystem reduced;  // balanced (A_r, B_r, I)
    RealVec hankel;     // descending Hankel singular values (full set)
    Mat gram_c_r;       // reduced controllability Gramian (diagnostics)
    Mat gram_o_r;       // reduced observability Gramian
};

BalancedTruncationRom balanced_truncation(const LtiSystem& sys, const Weight& w,
                                          const RealMat& forcing_cov, int r);

Trajectory balanced_truncation_solve(const BalancedTruncationRom& rom,
                                     const Vec& q0, const ForcingSignal& f,
                                     const FrequencyGrid& grid,
                                     const IntegrateOptions& opts = {});

/// Dense continuous-time Lyapunov solve A X + X A^* + Q = 0 by complex Schur
/// reduction and triangular back-substitution.
Mat lyapunov_solve(const Mat& a, const Mat& q);

/// Mean normalized squared W-norm error of reference trajectories projected
/// onto a basis: sum ||q - P q||_W^2 / sum ||q||_W^2 over all snapshots.
double projection_error_pod(const Mat& modes, const Weight& w,
                            const std::vector<Trajectory>& refs);

double projection_error_spod(const SpodBasisSet& basis, const std::vector<int>& r_k,
                             const Weight& w, const std::vector<Trajectory>& refs);

/// Per-time-step squared W-norm of the difference, averaged over the
/// ensemble, normalized by the ensemble-and-time mean squared W-norm of the
/// reference.
RealVec error_vs_time(const std::vector<Mat>& approx,
                      const std::vector<Trajectory>& refs, const Weight& w);

/// Scalar mean normalized squared error (time average of error_vs_time).
double mean_error(const std::vector<Mat>& approx,
                  const std::vector<Trajectory>& refs, const Weight& w);

}  // namespace sprom
