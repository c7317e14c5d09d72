#include "sprom/modal.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sprom/fft.hpp"

namespace sprom {

BlockedSpectra segment_blocks(const Trajectory& traj, int n_omega, double overlap,
                              WindowKind window, int target_blocks,
                              int snapshot_cap) {
    const int n_total = traj.nt();
    const int nx = traj.nx();
    if (n_omega <= 0 || n_total < n_omega)
        throw ValidationError("segment blocks: trajectory shorter than one block");

    int stride;
    int n_blocks;
    if (target_blocks > 1) {
        stride = std::max(1, (n_total - n_omega) / (target_blocks - 1));
        int available = (n_total - n_omega) / stride + 1;
        if (available < target_blocks)
            throw ValidationError("segment blocks: requested block count not reachable");
        n_blocks = target_blocks;
    } else if (target_blocks == 1) {
        stride = n_omega;
        n_blocks = 1;
    } else {
        if (overlap < 0.0 || overlap >= 1.0)
            throw ValidationError("segment blocks: overlap must be in [0, 1)");
        stride = std::max(1, static_cast<int>(std::lround(n_omega * (1.0 - overlap))));
        n_blocks = (n_total - n_omega) / stride + 1;
    }

    RealVec win = RealVec::Ones(n_omega);
    if (window == WindowKind::Hann) {
        for (int j = 0; j < n_omega; ++j)
            win(j) = 0.5 * (1.0 - std::cos(2.0 * kPi * j / n_omega));
        win /= std::sqrt(win.squaredNorm() / n_omega);  // energy correction
    }

    BlockedSpectra out;
    out.grid = FrequencyGrid{n_omega, traj.dt};
    out.r_d = n_blocks;
    out.stride = stride;
    out.window = window;
    out.qhat.assign(n_omega, Mat(nx, n_blocks));
    const bool with_forcing = traj.forcings.size() > 0;
    const int nf = with_forcing ? static_cast<int>(traj.forcings.rows()) : 0;
    if (with_forcing) out.fhat.assign(n_omega, Mat(nf, n_blocks));
    out.block_ics.resize(nx, n_blocks);

    std::vector<Mat> q_spec(n_blocks), f_spec(with_forcing ? n_blocks : 0);
    parallel_for(n_blocks, [&](std::size_t b) {
        int start = static_cast<int>(b) * stride;
        Mat block = traj.states.middleCols(start, n_omega);
        if (window == WindowKind::Hann)
            block = block * win.cast<Complex>().asDiagonal();
        q_spec[b] = fft::forward(block);
        if (with_forcing) {
            Mat fb = traj.forcings.middleCols(start, n_omega);
            if (window == WindowKind::Hann)
                fb = fb * win.cast<Complex>().asDiagonal();
            f_spec[b] = fft::forward(fb);
        }
    });
    for (int b = 0; b < n_blocks; ++b) {
        out.block_ics.col(b) = traj.states.col(b * stride);
        for (int k = 0; k < n_omega; ++k) {
            out.qhat[k].col(b) = q_spec[b].col(k);
            if (with_forcing) out.fhat[k].col(b) = f_spec[b].col(k);
        }
    }

    // Thinned snapshot matrices for the space-only POD paths.
    int snap_stride = std::max(1, n_total / std::max(1, snapshot_cap));
    int n_snap = (n_total - 1) / snap_stride + 1;
    out.snapshots.resize(nx, n_snap);
    for (int s = 0; s < n_snap; ++s)
        out.snapshots.col(s) = traj.states.col(s * snap_stride);
    if (with_forcing) {
        out.forcing_snapshots.resize(nf, n_snap);
        for (int s = 0; s < n_snap; ++s)
            out.forcing_snapshots.col(s) = traj.forcings.col(s * snap_stride);
    }

    return out;
}

double SpodBasisSet::total_energy() const {
    double total = 0.0;
    for (const auto& e : energies) total += e.sum();
    return total;
}

namespace {

// Shared method-of-snapshots kernel: SVD of W^{1/2} X / sqrt(m).
void snapshot_pod(const Mat& x, const Weight& w, Mat& modes, RealVec& energies) {
    const double m = static_cast<double>(x.cols());
    Mat scaled = w.apply_sqrt(x) / std::sqrt(m);
    Eigen::BDCSVD<Mat> svd(scaled, Eigen::ComputeThinU);
    modes = w.apply_inv_sqrt(svd.matrixU());
    energies = svd.singularValues().array().square();
}

}  // namespace

SpodBasisSet spod(const BlockedSpectra& blocks, const Weight& w) {
    if (blocks.r_d < 1) throw ValidationError("spod: need at least one block");
    const int n_omega = blocks.grid.n_omega;
    SpodBasisSet basis;
    basis.grid = blocks.grid;
    basis.r_d = blocks.r_d;
    basis.modes.resize(n_omega);
    basis.energies.resize(n_omega);
    parallel_for(n_omega, [&](std::size_t k) {
        snapshot_pod(blocks.qhat[k], w, basis.modes[k], basis.energies[k]);
    });
    return basis;
}

PodBasis pod(const Mat& snapshots, const Weight& w) {
    if (snapshots.cols() < 1) throw ValidationError("pod: empty snapshot matrix");
    PodBasis basis;
    snapshot_pod(snapshots, w, basis.modes, basis.energies);
    return basis;
}

std::vector<int> retention(const SpodBasisSet& basis, int r) {
    const int n_omega = basis.n_omega();
    std::vector<int> r_k(n_omega, 0);
    if (r <= 0) return r_k;
    const long budget = static_cast<long>(n_omega) * r;

    struct Entry {
        double energy;
        int k;
        int l;
    };
    std::vector<Entry> entries;
    for (int k = 0; k < n_omega; ++k)
        for (int l = 0; l < basis.energies[k].size(); ++l)
            entries.push_back({basis.energies[k](l), k, l});
    if (static_cast<long>(entries.size()) < budget)
        throw ValidationError("retention: n_omega * r exceeds the available mode count");

    // Descending energy; exact ties resolved by mode level, then ascending
    // frequency, so the retained set (and sum r_k = n_omega r) is
    // deterministic and a flat spectrum retains r modes at every frequency.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.energy != b.energy) return a.energy > b.energy;
        if (a.l != b.l) return a.l < b.l;
        return a.k < b.k;
    });
    for (long i = 0; i < budget; ++i) ++r_k[entries[static_cast<std::size_t>(i)].k];
    return r_k;
}

SpaceTimePod spacetime_pod(const std::vector<Trajectory>& ensemble, const Weight& w) {
    if (ensemble.empty()) throw ValidationError("space-time pod: empty ensemble");
    const int nx = ensemble.front().nx();
    const int nt = ensemble.front().nt();
    if (static_cast<long>(nx) * nt > (1L << 15))
        throw ValidationError("space-time pod: N_x * N_t exceeds the 2^15 size guard");

    const int m = static_cast<int>(ensemble.size());
    Mat stacked(static_cast<Eigen::Index>(nx) * nt, m);
    for (int i = 0; i < m; ++i) {
        if (ensemble[i].nx() != nx || ensemble[i].nt() != nt)
            throw ValidationError("space-time pod: inconsistent trajectory shapes");
        stacked.col(i) = ensemble[i].states.reshaped();
    }
    // Space-time weight: W on each snapshot slot, dt for the time quadrature.
    RealVec w_st(static_cast<Eigen::Index>(nx) * nt);
    const double dt = ensemble.front().dt;
    for (int j = 0; j < nt; ++j)
        w_st.segment(static_cast<Eigen::Index>(j) * nx, nx) = w.diag() * dt;
    Weight big(w_st);

    SpaceTimePod out;
    out.n_t = nt;
    out.dt = dt;
    Mat modes;
    snapshot_pod(stacked, big, modes, out.energies);
    out.modes = std::move(modes);
    return out;
}

namespace {

int modes_for_fraction(RealVec energies, double target) {
    if (target <= 0.0) return 0;
    std::sort(energies.data(), energies.data() + energies.size(),
              std::greater<double>());
    double total = energies.sum();
    if (total <= 0.0) return 0;
    double acc = 0.0;
    for (int i = 0; i < energies.size(); ++i) {
        acc += energies(i);
        if (acc >= target * total) return i + 1;
    }
    return static_cast<int>(energies.size());
}

}  // namespace

int spod_dofs(const SpodBasisSet& basis, double target) {
    long count = 0;
    for (const auto& e : basis.energies) count += e.size();
    RealVec all(count);
    long at = 0;
    for (const auto& e : basis.energies) {
        all.segment(at, e.size()) = e;
        at += e.size();
    }
    return modes_for_fraction(std::move(all), target);
}

int pod_dofs(const PodBasis& basis, double target, int n_omega) {
    return modes_for_fraction(basis.energies, target) * n_omega;
}

int spacetime_dofs(const SpaceTimePod& basis, double target) {
    return modes_for_fraction(basis.energies, target);
}

Mat spod_project(const SpodBasisSet& basis, const std::vector<int>& r_k,
                 const Weight& w, const Mat& states) {
    const int n_omega = basis.n_omega();
    if (states.cols() != n_omega)
        throw ValidationError("spod projection: trajectory length must equal n_omega");
    Mat qhat = fft::forward(states);
    Mat projected = Mat::Zero(states.rows(), n_omega);
    for (int k = 0; k < n_omega; ++k) {
        int rk = r_k[static_cast<std::size_t>(k)];
        if (rk == 0) continue;
        auto psi = basis.modes[k].leftCols(rk);
        projected.col(k) = psi * (psi.adjoint() * w.apply(qhat.col(k)));
    }
    return fft::inverse(projected);
}

Mat pod_project(const Mat& modes, const Weight& w, const Mat& states) {
    if (modes.cols() == 0) return Mat::Zero(states.rows(), states.cols());
    return modes * (modes.adjoint() * w.apply(states));
}

}  // namespace sprom
