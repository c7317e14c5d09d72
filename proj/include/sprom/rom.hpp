#pragma once

#include <cstdint>
#include <vector>

#include "sprom/forcing.hpp"
#include "sprom/modal.hpp"

namespace sprom {

/// Per-frequency POD of the realizations g_k^i = (i omega_k I - A) qhat_k^i.
/// These live in the unit-weight geometry.
struct GForceSpectra {
    std::vector<Mat> modes;
    std::vector<RealVec> energies;
};

GForceSpectra gforce_spectra(const BlockedSpectra& blocks, const LtiSystem& sys);

struct RomOptions {
    int r = 10;
    int r_d = 0;  // modes used for operator approximation; 0 = all available
    int p = 0;    // intermediary basis rank; 0 = identity-complete bypass
    bool exact_e = false;      // build E_k from resolvent solves (small dense only)
    double pinv_cut = 1e-12;   // relative cutoff for pseudo-inverses
};

/// Precomputed online operators. In the identity-complete bypass (p == 0 at
/// build time) Phi is the complete W-orthonormal basis W^{-1/2}, realized by
/// diagonal scalings instead of a stored matrix.
struct RomOperatorBundle {
    FrequencyGrid grid;
    std::vector<int> r_k;
    int r_d = 0;
    int p = 0;  // effective intermediary dimension (N_x in the bypass)
    bool phi_identity = false;
    std::uint64_t seed = 0;  // provenance of the training data

    std::vector<Mat> E;     // r_k x N_f
    std::vector<Mat> H;     // r_k x p
    std::vector<Mat> T;     // p x r_k
    std::vector<Mat> CPsi;  // N_y x r_k (empty when C is the identity)
    std::vector<Mat> PsiR;  // N_x x r_k, retained modes for reconstruction
    Mat phi;                // N_x x p (empty in the bypass)
    Mat wphi;               // W Phi, for the reduced initial condition
    RealVec w_sqrt;         // sqrt of the diagonal weight (bypass scalings)
    bool c_is_identity = true;

    int n_omega() const { return grid.n_omega; }
    int nx() const { return PsiR.empty() ? 0 : static_cast<int>(PsiR.front().rows()); }
};

/// Algorithm 1: offline precomputation of E_k, H_k, T_k, C Psi_k from the
/// blocked training spectra.
RomOperatorBundle offline(const BlockedSpectra& blocks, const LtiSystem& sys,
                          const Weight& w, const RomOptions& opts);

/// Same, reusing an already computed SPOD basis (and returning it for DEIM).
RomOperatorBundle offline_from_basis(const SpodBasisSet& basis,
                                     const BlockedSpectra& blocks,
                                     const LtiSystem& sys, const Weight& w,
                                     const RomOptions& opts);

struct SolveReport {
    std::vector<Vec> coeffs;  // a_k per frequency, length r_k
    Mat yhat;                 // N_y x n_omega
    Mat y;                    // inverse DFT of yhat
    Mat state;                // N_x x n_omega when requested, else empty
    double t_fft = 0.0, t_coeff = 0.0, t_ifft = 0.0;
    double deim_residual = -1.0;  // forcing reconstruction diagnostic (DEIM only)

    double online_seconds() const { return t_fft + t_coeff + t_ifft; }
};

/// Algorithm 2: FFT of the forcing, reduced initial condition, one
/// forcing-sum accumulation pass, per-frequency coefficient assembly,
/// observable inverse FFT.
SolveReport online(const RomOperatorBundle& bundle, const Vec& q0,
                   const ForcingSignal& f, bool want_state = false);

/// Hyper-reduction operators: shared greedy sample points for the forcing,
/// initial condition, and forcing-sum vectors plus the per-frequency K
/// matrices they induce.
struct DeimBundle {
    int p_d = 0;
    std::vector<int> points_f;    // rows of f sampled (sorted ascending)
    std::vector<int> points_q0;   // entries of q0 sampled
    std::vector<int> points_fs;   // entries of the forcing sum sampled
    std::vector<Mat> Kf;          // r_k x p_d
    std::vector<Mat> Kq0;         // r_k x p_d
    std::vector<Mat> Kfs;         // r_k x p_d
    std::vector<Mat> Tfs;         // p_d x r_l
    double max_condition = 0.0;   // worst conditioning of the (P^T U) factors
    Mat u_f_time;                 // N_f x p_d forcing basis (residual diagnostic)
};

/// Greedy DEIM point selection (residual-argmax recursion) on a mode basis;
/// returns the selected row indices in selection order.
std::vector<int> deim_points(const Mat& modes);

DeimBundle build_deim(const RomOperatorBundle& bundle, const SpodBasisSet& basis,
                      const BlockedSpectra& blocks, const LtiSystem& sys,
                      const Weight& w, int p_d, double pinv_cut = 1e-12);

/// Algorithm 2 consuming only the sampled entries of f and q0.
SolveReport online_deim(const RomOperatorBundle& bundle, const DeimBundle& deim,
                        const Vec& q0, const ForcingSignal& f,
                        bool want_state = false, bool diagnostics = false);

}  // namespace sprom
