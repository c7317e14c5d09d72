#include "sprom/rom.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "sprom/fft.hpp"

namespace sprom {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

GForceSpectra gforce_spectra(const BlockedSpectra& blocks, const LtiSystem& sys) {
    const int n_omega = blocks.grid.n_omega;
    GForceSpectra g;
    g.modes.resize(n_omega);
    g.energies.resize(n_omega);
    parallel_for(static_cast<std::size_t>(n_omega), [&](std::size_t k) {
        const Mat& qk = blocks.qhat[k];
        Mat gk = kI * blocks.grid.omega(static_cast<int>(k)) * qk - sys.A().apply(qk);
        Eigen::BDCSVD<Mat> svd(gk / std::sqrt(static_cast<double>(blocks.r_d)),
                               Eigen::ComputeThinU);
        g.modes[k] = svd.matrixU();
        g.energies[k] = svd.singularValues().array().square();
    });
    return g;
}

namespace {

// E_k = Lambda_k^r (L_k Psi_k^r)^* Psi_k^g Lambda_k^{g-1} Psi_k^{g*} B, with
// g-modes below the relative pseudo-inverse cutoff dropped.
Mat build_e_data(const SpodBasisSet& basis, const GForceSpectra& g,
                 const LtiSystem& sys, const FrequencyGrid& grid, int k, int r_k,
                 double pinv_cut) {
    if (r_k == 0) return Mat(0, sys.nf());
    auto psi_r = basis.modes[k].leftCols(r_k);
    RealVec lam_r = basis.energies[k].head(r_k);

    const RealVec& ge = g.energies[k];
    double gmax = ge.size() ? ge.maxCoeff() : 0.0;
    int kept = 0;
    while (kept < ge.size() && ge(kept) > pinv_cut * gmax) ++kept;
    if (kept == 0) return Mat::Zero(r_k, sys.nf());
    auto psi_g = g.modes[k].leftCols(kept);

    Mat l_psi = kI * grid.omega(k) * psi_r - sys.A().apply(Mat(psi_r));
    Mat x = l_psi.adjoint() * psi_g;                       // r_k x kept
    x = lam_r.cast<Complex>().asDiagonal() * x;
    x = x * ge.head(kept).cwiseInverse().cast<Complex>().asDiagonal();
    Mat gb = sys.B().apply_adjoint(psi_g).adjoint();       // kept x N_f
    return x * gb;
}

Mat build_e_exact(const SpodBasisSet& basis, const LtiSystem& sys,
                  const ResolventCache& res, const Weight& w, int k, int r_k) {
    if (r_k == 0) return Mat(0, sys.nf());
    auto psi_r = basis.modes[k].leftCols(r_k);
    Mat rb = res.solve(k, sys.B().dense());
    return psi_r.adjoint() * w.apply(rb);
}

}  // namespace

RomOperatorBundle offline_from_basis(const SpodBasisSet& basis,
                                     const BlockedSpectra& blocks,
                                     const LtiSystem& sys, const Weight& w,
                                     const RomOptions& opts) {
    const int n_omega = basis.n_omega();
    const int nx = sys.nx();
    if (n_omega != blocks.grid.n_omega)
        throw ValidationError("offline: basis and blocks disagree on the grid");

    RomOperatorBundle bundle;
    bundle.grid = basis.grid;
    bundle.r_k = retention(basis, opts.r);
    int max_rk = *std::max_element(bundle.r_k.begin(), bundle.r_k.end());

    int available = nx;
    for (const auto& m : basis.modes)
        available = std::min(available, static_cast<int>(m.cols()));
    int r_d = opts.r_d > 0 ? opts.r_d : available;
    if (r_d > available)
        throw ValidationError("offline: r_d exceeds the available mode count");
    if (r_d < max_rk)
        throw ValidationError("offline: r_d must be at least the largest retained count");
    bundle.r_d = r_d;

    // Intermediary basis.
    if (opts.p <= 0) {
        if (w.is_diagonal()) {
            bundle.phi_identity = true;
            bundle.p = nx;
            bundle.w_sqrt = w.sqrt_diag();
        } else {
            bundle.p = nx;
            bundle.phi = w.apply_inv_sqrt(Mat::Identity(nx, nx));
        }
    } else {
        PodBasis state_pod = pod(blocks.snapshots, w);
        if (opts.p > state_pod.modes.cols())
            throw ValidationError("offline: p exceeds the available state POD rank");
        bundle.phi = state_pod.modes.leftCols(opts.p);
        bundle.p = opts.p;
    }
    if (!bundle.phi_identity) bundle.wphi = w.apply(bundle.phi);
    const Mat& wphi = bundle.wphi;

    bundle.c_is_identity = sys.C().is_identity();
    GForceSpectra gspec;
    if (!opts.exact_e) gspec = gforce_spectra(blocks, sys);
    std::unique_ptr<ResolventCache> res;
    if (opts.exact_e) {
        if (nx > 1024)
            throw ValidationError("offline: exact E path is dense-only (N_x <= 1024)");
        res = std::make_unique<ResolventCache>(sys, bundle.grid);
    }

    bundle.E.resize(n_omega);
    bundle.H.resize(n_omega);
    bundle.T.resize(n_omega);
    bundle.PsiR.resize(n_omega);
    if (!bundle.c_is_identity) bundle.CPsi.resize(n_omega);

    const double dt = bundle.grid.dt;
    parallel_for(static_cast<std::size_t>(n_omega), [&](std::size_t ks) {
        const int k = static_cast<int>(ks);
        const int r_k = bundle.r_k[ks];
        auto psi_rd = basis.modes[k].leftCols(r_d);
        bundle.PsiR[ks] = basis.modes[k].leftCols(r_k);

        bundle.E[ks] = opts.exact_e
                           ? build_e_exact(basis, sys, *res, w, k, r_k)
                           : build_e_data(basis, gspec, sys, bundle.grid, k, r_k,
                                          opts.pinv_cut);

        // Reduced correction operators, all at size r_d x r_d.
        Mat a_tilde = psi_rd.adjoint() * w.apply(sys.A().apply(Mat(psi_rd)));
        Mat e_dt = expm_action(a_tilde, dt);
        Mat e_t = matrix_power(e_dt, bundle.grid.n_omega);
        Complex phase = std::polar(1.0, -bundle.grid.omega(k) * dt);
        Mat m1 = Mat::Identity(r_d, r_d) - phase * e_dt;
        Eigen::PartialPivLU<Mat> lu(m1);
        if (lu.matrixLU().diagonal().array().abs().minCoeff() == 0.0) {
            std::ostringstream msg;
            msg << "offline: singular reduced correction factor at frequency " << k;
            throw NumericalError(msg.str());
        }
        Mat proj = bundle.phi_identity
                       ? Mat(bundle.w_sqrt.cast<Complex>().asDiagonal() * psi_rd).adjoint()
                       : Mat(psi_rd.adjoint() * wphi);
        Mat f_tilde = lu.solve((Mat::Identity(r_d, r_d) - e_t) * proj);
        bundle.H[ks] = f_tilde.topRows(r_k);

        bundle.T[ks] = bundle.phi_identity
                           ? Mat(bundle.w_sqrt.cast<Complex>().asDiagonal() *
                                 bundle.PsiR[ks])
                           : Mat(wphi.adjoint() * bundle.PsiR[ks]);
        if (!bundle.c_is_identity) bundle.CPsi[ks] = sys.C().apply(bundle.PsiR[ks]);
    });
    return bundle;
}

RomOperatorBundle offline(const BlockedSpectra& blocks, const LtiSystem& sys,
                          const Weight& w, const RomOptions& opts) {
    SpodBasisSet basis = spod(blocks, w);
    return offline_from_basis(basis, blocks, sys, w, opts);
}

namespace {

Vec reduced_ic(const RomOperatorBundle& bundle, const Vec& q0) {
    if (bundle.phi_identity)
        return bundle.w_sqrt.cast<Complex>().asDiagonal() * q0;
    return bundle.wphi.adjoint() * q0;  // Phi^* W q0
}

void check_online_inputs(const RomOperatorBundle& bundle, const Vec& q0,
                         const ForcingSignal& f, int expected_rows) {
    if (f.nt() != bundle.grid.n_omega)
        throw ValidationError("online: forcing length does not match the bundle grid");
    if (std::abs(f.dt - bundle.grid.dt) > 1e-12 * bundle.grid.dt)
        throw ValidationError("online: forcing sample spacing does not match");
    if (q0.size() != bundle.nx())
        throw ValidationError("online: q0 dimension mismatch");
    if (expected_rows >= 0 && f.nf() != expected_rows)
        throw ValidationError("online: forcing row count mismatch");
}

SolveReport assemble_observable(const RomOperatorBundle& bundle,
                                std::vector<Vec> coeffs, double t_fft,
                                double t_coeff, bool want_state) {
    const int n_omega = bundle.n_omega();
    const int nx = bundle.nx();
    const int ny = bundle.c_is_identity
                       ? nx
                       : static_cast<int>(bundle.CPsi.front().rows());
    auto t2 = std::chrono::steady_clock::now();
    Mat yhat = Mat::Zero(ny, n_omega);
    for (int k = 0; k < n_omega; ++k) {
        if (bundle.r_k[static_cast<std::size_t>(k)] == 0) continue;
        if (bundle.c_is_identity)
            yhat.col(k) = bundle.PsiR[static_cast<std::size_t>(k)] *
                          coeffs[static_cast<std::size_t>(k)];
        else
            yhat.col(k) = bundle.CPsi[static_cast<std::size_t>(k)] *
                          coeffs[static_cast<std::size_t>(k)];
    }
    SolveReport report;
    report.y = fft::inverse(yhat);
    report.t_ifft = seconds_since(t2);
    report.yhat = std::move(yhat);
    report.t_fft = t_fft;
    report.t_coeff = t_coeff;

    if (want_state) {
        if (bundle.c_is_identity) {
            report.state = report.y;
        } else {
            Mat state_hat = Mat::Zero(nx, n_omega);
            for (int k = 0; k < n_omega; ++k) {
                if (bundle.r_k[static_cast<std::size_t>(k)] == 0) continue;
                state_hat.col(k) = bundle.PsiR[static_cast<std::size_t>(k)] *
                                   coeffs[static_cast<std::size_t>(k)];
            }
            report.state = fft::inverse(state_hat);
        }
    }
    report.coeffs = std::move(coeffs);
    return report;
}

}  // namespace

SolveReport online(const RomOperatorBundle& bundle, const Vec& q0,
                   const ForcingSignal& f, bool want_state) {
    check_online_inputs(bundle, q0, f,
                        bundle.E.empty() ? -1 : static_cast<int>(bundle.E.front().cols()));
    const int n_omega = bundle.n_omega();

    auto t0 = std::chrono::steady_clock::now();
    Mat fhat = fft::forward(f.samples);
    double t_fft = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    Vec a0 = reduced_ic(bundle, q0);
    Vec fs_acc = Vec::Zero(bundle.p);
    std::vector<Vec> coeffs(static_cast<std::size_t>(n_omega));
    const double inv_n = 1.0 / static_cast<double>(n_omega);
    for (int k = 0; k < n_omega; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (bundle.r_k[ks] == 0) {
            coeffs[ks] = Vec(0);
            continue;
        }
        coeffs[ks] = bundle.E[ks] * fhat.col(k);
        fs_acc.noalias() += inv_n * (bundle.T[ks] * coeffs[ks]);
    }
    Vec d = a0 - fs_acc;
    for (int k = 0; k < n_omega; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (bundle.r_k[ks] == 0) continue;
        coeffs[ks] += bundle.H[ks] * d;
    }
    double t_coeff = seconds_since(t1);

    return assemble_observable(bundle, std::move(coeffs), t_fft, t_coeff, want_state);
}

// ---------------------------------------------------------------------------
// DEIM

std::vector<int> deim_points(const Mat& modes) {
    const int n = static_cast<int>(modes.rows());
    const int m = static_cast<int>(modes.cols());
    if (m == 0 || n == 0) throw ValidationError("deim: empty mode basis");
    if (m > n) throw ValidationError("deim: more modes than rows to sample");
    std::vector<int> points;
    points.reserve(static_cast<std::size_t>(m));
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    auto argmax_free = [&](const Vec& v) {
        int best = -1;
        double best_val = -1.0;
        for (int i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            double a = std::abs(v(i));
            if (a > best_val) {
                best_val = a;
                best = i;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        return best;
    };
    points.push_back(argmax_free(modes.col(0)));
    for (int j = 1; j < m; ++j) {
        Mat gathered(j, j);
        Vec rhs(j);
        for (int i = 0; i < j; ++i) {
            for (int c = 0; c < j; ++c)
                gathered(i, c) = modes(points[static_cast<std::size_t>(i)], c);
            rhs(i) = modes(points[static_cast<std::size_t>(i)], j);
        }
        Vec c = gathered.partialPivLu().solve(rhs);
        Vec resid = modes.col(j) - modes.leftCols(j) * c;
        points.push_back(argmax_free(resid));
    }
    return points;
}

namespace {

Mat gather_rows(const Mat& m, const std::vector<int>& rows) {
    Mat out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Vec gather_entries(const Vec& v, const std::vector<int>& rows) {
    Vec out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

// Least-squares interpolation factor U (P^T U)^+ with conditioning report.
// Rectangular (oversampled) selections are handled by the QR pseudo-inverse.
struct InterpFactor {
    Mat lift;  // U (P^T U)^+   (n x p_d)
    double condition = 0.0;
};

InterpFactor interpolation_factor(const Mat& u, const std::vector<int>& points) {
    Mat pu = gather_rows(u, points);
    Eigen::JacobiSVD<Mat> svd(pu, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    InterpFactor f;
    f.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!std::isfinite(f.condition))
        throw NumericalError("deim: singular interpolation factor");
    // (P^T U)^+ = V S^{-1} U^* ; lift = U * pinv.
    Mat pinv = svd.matrixV() *
               svd.singularValues().cwiseInverse().cast<Complex>().asDiagonal() *
               svd.matrixU().adjoint();
    f.lift = u * pinv;
    return f;
}

int pod_rank(const RealVec& energies, double cut) {
    if (energies.size() == 0) return 0;
    double emax = energies.maxCoeff();
    int r = 0;
    while (r < energies.size() && energies(r) > cut * emax) ++r;
    return r;
}

}  // namespace

DeimBundle build_deim(const RomOperatorBundle& bundle, const SpodBasisSet& basis,
                      const BlockedSpectra& blocks, const LtiSystem& sys,
                      const Weight& w, int p_d, double pinv_cut) {
    if (blocks.forcing_snapshots.size() == 0)
        throw ValidationError("deim: training blocks carry no forcing data");
    const int n_omega = bundle.n_omega();
    const int nx = sys.nx();

    DeimBundle deim;

    // Shared sample points from the time-domain forcing POD.
    PodBasis f_pod = pod(blocks.forcing_snapshots, Weight::identity(sys.nf()));
    int f_rank = pod_rank(f_pod.energies, pinv_cut);
    if (p_d > f_rank) p_d = f_rank;  // ensemble rank guard
    deim.p_d = p_d;
    deim.points_f = deim_points(f_pod.modes.leftCols(p_d));
    std::sort(deim.points_f.begin(), deim.points_f.end());

    // State-space points from the block initial conditions and forcing sums.
    PodBasis q0_pod = pod(blocks.block_ics, Weight::identity(nx));
    int q0_modes = std::min(p_d, pod_rank(q0_pod.energies, pinv_cut));
    deim.points_q0 = deim_points(q0_pod.modes.leftCols(q0_modes));
    std::sort(deim.points_q0.begin(), deim.points_q0.end());

    // Forcing sums of every training block: (1/N) sum_l Psi_l^r E_l fhat_l^i.
    Mat fs = Mat::Zero(nx, blocks.r_d);
    for (int l = 0; l < n_omega; ++l) {
        const auto ls = static_cast<std::size_t>(l);
        if (bundle.r_k[ls] == 0) continue;
        fs.noalias() += bundle.PsiR[ls] * (bundle.E[ls] * blocks.fhat[ls]);
    }
    fs /= static_cast<double>(n_omega);
    PodBasis fs_pod = pod(fs, Weight::identity(nx));
    int fs_modes = std::min(p_d, pod_rank(fs_pod.energies, pinv_cut));
    deim.points_fs = deim_points(fs_pod.modes.leftCols(fs_modes));
    std::sort(deim.points_fs.begin(), deim.points_fs.end());

    InterpFactor q0_factor =
        interpolation_factor(q0_pod.modes.leftCols(q0_modes), deim.points_q0);
    InterpFactor fs_factor =
        interpolation_factor(fs_pod.modes.leftCols(fs_modes), deim.points_fs);
    InterpFactor f_time_factor =
        interpolation_factor(f_pod.modes.leftCols(p_d), deim.points_f);
    deim.u_f_time = f_time_factor.lift;
    deim.max_condition = std::max({q0_factor.condition, fs_factor.condition,
                                   f_time_factor.condition});

    deim.Kf.resize(n_omega);
    deim.Kq0.resize(n_omega);
    deim.Kfs.resize(n_omega);
    deim.Tfs.resize(n_omega);

    const int r_d = bundle.r_d;
    const double dt = bundle.grid.dt;
    std::vector<double> conditions(static_cast<std::size_t>(n_omega), 0.0);
    parallel_for(static_cast<std::size_t>(n_omega), [&](std::size_t ks) {
        const int k = static_cast<int>(ks);
        const int r_k = bundle.r_k[ks];
        auto psi_rd = basis.modes[k].leftCols(r_d);

        // Per-frequency forcing basis; the shared sampling P_f is reused.
        const Mat& fk = blocks.fhat[ks];
        Eigen::BDCSVD<Mat> svd(fk / std::sqrt(static_cast<double>(blocks.r_d)),
                               Eigen::ComputeThinU);
        RealVec fe = svd.singularValues().array().square();
        int kept = pod_rank(fe, pinv_cut);
        kept = std::min(kept, deim.p_d);
        InterpFactor fk_factor =
            interpolation_factor(svd.matrixU().leftCols(kept), deim.points_f);
        conditions[ks] = fk_factor.condition;
        deim.Kf[ks] = r_k == 0 ? Mat(0, deim.p_d) : Mat(bundle.E[ks] * fk_factor.lift);

        // F_k = P_k Ftilde_k Psi_k^{rd*} W applied to the two lifted bases.
        Mat a_tilde = psi_rd.adjoint() * w.apply(sys.A().apply(Mat(psi_rd)));
        Mat e_dt = expm_action(a_tilde, dt);
        Mat e_t = matrix_power(e_dt, bundle.grid.n_omega);
        Complex phase = std::polar(1.0, -bundle.grid.omega(k) * dt);
        Eigen::PartialPivLU<Mat> lu(Mat::Identity(r_d, r_d) - phase * e_dt);
        Mat w_psi_rd = w.apply(psi_rd);
        auto apply_f = [&](const Mat& lifted) -> Mat {
            Mat reduced = w_psi_rd.adjoint() * lifted;
            Mat full = lu.solve((Mat::Identity(r_d, r_d) - e_t) * reduced);
            return full.topRows(r_k);
        };
        deim.Kq0[ks] = r_k == 0 ? Mat(0, static_cast<Eigen::Index>(deim.points_q0.size()))
                                : apply_f(q0_factor.lift);
        deim.Kfs[ks] = r_k == 0 ? Mat(0, static_cast<Eigen::Index>(deim.points_fs.size()))
                                : apply_f(fs_factor.lift);
        deim.Tfs[ks] = gather_rows(bundle.PsiR[ks], deim.points_fs);
    });
    for (double c : conditions) deim.max_condition = std::max(deim.max_condition, c);
    return deim;
}

SolveReport online_deim(const RomOperatorBundle& bundle, const DeimBundle& deim,
                        const Vec& q0, const ForcingSignal& f, bool want_state,
                        bool diagnostics) {
    check_online_inputs(bundle, q0, f, -1);
    const int n_omega = bundle.n_omega();

    auto t0 = std::chrono::steady_clock::now();
    Mat f_sampled(static_cast<Eigen::Index>(deim.points_f.size()), f.nt());
    for (std::size_t i = 0; i < deim.points_f.size(); ++i)
        f_sampled.row(static_cast<Eigen::Index>(i)) = f.samples.row(deim.points_f[i]);
    Mat fhat_sampled = fft::forward(f_sampled);
    double t_fft = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    Vec q0_sampled = gather_entries(q0, deim.points_q0);
    Vec fs_acc = Vec::Zero(static_cast<Eigen::Index>(deim.points_fs.size()));
    std::vector<Vec> coeffs(static_cast<std::size_t>(n_omega));
    const double inv_n = 1.0 / static_cast<double>(n_omega);
    for (int k = 0; k < n_omega; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (bundle.r_k[ks] == 0) {
            coeffs[ks] = Vec(0);
            continue;
        }
        coeffs[ks] = deim.Kf[ks] * fhat_sampled.col(k);
        fs_acc.noalias() += inv_n * (deim.Tfs[ks] * coeffs[ks]);
    }
    for (int k = 0; k < n_omega; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (bundle.r_k[ks] == 0) continue;
        coeffs[ks] += deim.Kq0[ks] * q0_sampled - deim.Kfs[ks] * fs_acc;
    }
    double t_coeff = seconds_since(t1);

    SolveReport report =
        assemble_observable(bundle, std::move(coeffs), t_fft, t_coeff, want_state);
    if (diagnostics) {
        Mat recon = deim.u_f_time * f_sampled;
        report.deim_residual = (recon - f.samples).norm() / f.samples.norm();
    }
    return report;
}

}  // namespace sprom
