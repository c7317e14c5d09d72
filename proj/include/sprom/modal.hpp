#pragma once

#include <string>
#include <vector>

#include "sprom/integrate.hpp"
#include "sprom/lti.hpp"

namespace sprom {

enum class WindowKind { None, Hann };

/// Per-frequency data matrices from Welch segmentation: column i of qhat[k]
/// is the k-th DFT coefficient of block i.
struct BlockedSpectra {
    std::vector<Mat> qhat;  // n_omega entries, each N_x x r_d
    std::vector<Mat> fhat;  // forcing blocks (empty when no forcing stored)
    Mat snapshots;          // time-domain state samples for space-only POD
    Mat forcing_snapshots;  // time-domain forcing samples (DEIM point selection)
    Mat block_ics;          // block-start states (one column per block)
    FrequencyGrid grid;
    int r_d = 0;
    int stride = 0;
    WindowKind window = WindowKind::None;
};

/// Splits one long trajectory into overlapping length-n_omega blocks and
/// DFTs each. target_blocks > 0 overrides the overlap fraction: the stride is
/// solved from the requested count and the list truncated to exactly that
/// many blocks.
BlockedSpectra segment_blocks(const Trajectory& traj, int n_omega,
                              double overlap = 0.5,
                              WindowKind window = WindowKind::None,
                              int target_blocks = 0, int snapshot_cap = 2000);

struct SpodBasisSet {
    std::vector<Mat> modes;         // per k: N_x x n_k, W-orthonormal columns
    std::vector<RealVec> energies;  // per k: descending
    FrequencyGrid grid;
    int r_d = 0;

    int n_omega() const { return static_cast<int>(modes.size()); }
    double total_energy() const;
};

/// Method of snapshots per frequency: SVD of W^{1/2} Q_k / sqrt(r_d); modes
/// are W^{-1/2} U and energies the squared singular values.
SpodBasisSet spod(const BlockedSpectra& blocks, const Weight& w);

/// Retained counts r_k: how many modes at each frequency rank among the
/// n_omega * r most energetic overall. Ties at the threshold are admitted in
/// ascending frequency order, so sum_k r_k == n_omega * r exactly.
std::vector<int> retention(const SpodBasisSet& basis, int r);

struct PodBasis {
    Mat modes;        // N_x x n, W-orthonormal
    RealVec energies; // descending
};

/// Space-only POD by the method of snapshots (same estimator convention).
PodBasis pod(const Mat& snapshots, const Weight& w);

struct SpaceTimePod {
    Mat modes;        // (N_x * N_t) x n, orthonormal under W (x) dt I
    RealVec energies;
    int n_t = 0;
    double dt = 0.0;
};

/// Small-scale space-time POD of whole trajectories; guarded to
/// N_x * N_t <= 2^15.
SpaceTimePod spacetime_pod(const std::vector<Trajectory>& ensemble, const Weight& w);

/// Degrees of freedom needed to reach the target captured-energy fraction.
/// Space-only POD pays its mode count at every time step.
int spod_dofs(const SpodBasisSet& basis, double target);
int pod_dofs(const PodBasis& basis, double target, int n_omega);
int spacetime_dofs(const SpaceTimePod& basis, double target);

/// Trajectory reconstruction through the retained SPOD modes: DFT, project
/// per frequency, inverse DFT.
Mat spod_project(const SpodBasisSet& basis, const std::vector<int>& r_k,
                 const Weight& w, const Mat& states);

/// Snapshot-wise projection onto the leading space-only POD modes.
Mat pod_project(const Mat& modes, const Weight& w, const Mat& states);

}  // namespace sprom
