#include "sprom/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace sprom {

PodGalerkinRom pod_galerkin(const LtiSystem& sys, const Weight& w,
                            const PodBasis& state_pod, int r) {
    if (r > state_pod.modes.cols())
        throw ValidationError("pod-galerkin: r exceeds the available POD rank");
    PodGalerkinRom rom;
    rom.basis = state_pod.modes.leftCols(r);
    Mat a_r = rom.basis.adjoint() * w.apply(sys.A().apply(rom.basis));
    Mat b_r = rom.basis.adjoint() * w.apply(sys.B().dense());
    Mat c_r = sys.C().apply(rom.basis);
    rom.reduced = LtiSystem(LinOp(std::move(a_r)), LinOp(std::move(b_r)),
                            LinOp(std::move(c_r)));
    return rom;
}

Trajectory pod_galerkin_solve(const PodGalerkinRom& rom, const Weight& w,
                              const Vec& q0, const ForcingSignal& f,
                              const FrequencyGrid& grid,
                              const IntegrateOptions& opts) {
    Vec a0 = rom.basis.adjoint() * w.apply(Mat(q0));
    Trajectory reduced = integrate(rom.reduced, a0, f, grid, opts);
    Trajectory lifted;
    lifted.states = rom.basis * reduced.states;
    lifted.forcings = f.samples;
    lifted.dt = grid.dt;
    return lifted;
}

Mat lyapunov_solve(const Mat& a, const Mat& q) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n || q.rows() != n || q.cols() != n)
        throw ValidationError("lyapunov: shape mismatch");
    Eigen::ComplexSchur<Mat> schur(a);
    if (schur.info() != Eigen::Success)
        throw NumericalError("lyapunov: Schur decomposition failed");
    const Mat& t = schur.matrixT();
    const Mat& u = schur.matrixU();
    Mat q_t = u.adjoint() * q * u;

    // Solve T Y + Y T^* = -q_t column by column from the last: column j sees
    // (T + conj(t_jj) I) y_j = -q_t_j - sum_{m>j} conj(t_jm) y_m.
    Mat y = Mat::Zero(n, n);
    for (int j = n - 1; j >= 0; --j) {
        Vec rhs = -q_t.col(j);
        for (int m = j + 1; m < n; ++m) rhs -= std::conj(t(j, m)) * y.col(m);
        const Complex shift = std::conj(t(j, j));
        Vec col = Vec::Zero(n);
        for (int i = n - 1; i >= 0; --i) {
            Complex acc = rhs(i);
            for (int m = i + 1; m < n; ++m) acc -= t(i, m) * col(m);
            Complex piv = t(i, i) + shift;
            if (std::abs(piv) < 1e-300)
                throw NumericalError(
                    "lyapunov: singular triangular factor (eigenvalue pair sums to zero)");
            col(i) = acc / piv;
        }
        y.col(j) = col;
    }
    return u * y * u.adjoint();
}

BalancedTruncationRom balanced_truncation(const LtiSystem& sys, const Weight& w,
                                          const RealMat& forcing_cov, int r) {
    const int nx = sys.nx();
    if (sys.storage() != StorageKind::Dense)
        throw ValidationError("balanced truncation: dense systems only");
    if (!sys.stable())
        throw NumericalError("balanced truncation: system must be stable");
    if (forcing_cov.rows() != sys.nf())
        throw ValidationError("balanced truncation: covariance size mismatch");

    // Work in x~ = W^{1/2} x, where the W-norm of the state is Euclidean and
    // observing the whole state means C~ = I.
    Mat a_t = w.apply_sqrt(sys.A().apply(w.apply_inv_sqrt(Mat::Identity(nx, nx))));
    Mat b_t = w.apply_sqrt(sys.B().dense());

    // Whitening: shape the input by a covariance square root before the
    // controllability solve; the ROM itself keeps the original input map.
    Mat l_w = covariance_factor(forcing_cov).cast<Complex>();
    Mat b_white = b_t * l_w;

    Mat p = lyapunov_solve(a_t, Mat(b_white * b_white.adjoint()));
    Mat q = lyapunov_solve(Mat(a_t.adjoint()), Mat::Identity(nx, nx));

    // Square-root balancing: factor both Gramians, SVD the cross product.
    auto psd_factor = [](const Mat& g) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(g);
        RealVec lam = eig.eigenvalues().cwiseMax(0.0);
        return Mat(eig.eigenvectors() * lam.array().sqrt().matrix().asDiagonal());
    };
    Mat z_p = psd_factor(p);
    Mat z_q = psd_factor(q);
    Eigen::BDCSVD<Mat> svd(Mat(z_q.adjoint() * z_p),
                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    RealVec hankel = svd.singularValues();

    int usable = 0;
    while (usable < hankel.size() && hankel(usable) > 1e-13 * hankel(0)) ++usable;
    if (r > usable)
        throw ValidationError("balanced truncation: r exceeds the numerical Hankel rank");

    RealVec inv_sqrt = hankel.head(r).array().rsqrt();
    Mat t_right = z_p * svd.matrixV().leftCols(r) * inv_sqrt.cast<Complex>().asDiagonal();
    Mat t_left = z_q * svd.matrixU().leftCols(r) * inv_sqrt.cast<Complex>().asDiagonal();

    BalancedTruncationRom rom;
    rom.hankel = hankel;
    Mat a_r = t_left.adjoint() * a_t * t_right;
    Mat b_r = t_left.adjoint() * b_t;  // original (unwhitened) input map
    rom.reduced = LtiSystem(LinOp(std::move(a_r)), LinOp(std::move(b_r)),
                            LinOp::identity_dense(r));
    rom.gram_c_r = t_left.adjoint() * p * t_left;
    rom.gram_o_r = t_right.adjoint() * q * t_right;
    // Back to physical coordinates: x = W^{-1/2} x~.
    rom.lift = w.apply_inv_sqrt(t_right);
    rom.project = w.apply_sqrt(t_left);
    return rom;
}

Trajectory balanced_truncation_solve(const BalancedTruncationRom& rom,
                                     const Vec& q0, const ForcingSignal& f,
                                     const FrequencyGrid& grid,
                                     const IntegrateOptions& opts) {
    Vec a0 = rom.project.adjoint() * q0;
    Trajectory reduced = integrate(rom.reduced, a0, f, grid, opts);
    Trajectory lifted;
    lifted.states = rom.lift * reduced.states;
    lifted.forcings = f.samples;
    lifted.dt = grid.dt;
    return lifted;
}

double projection_error_pod(const Mat& modes, const Weight& w,
                            const std::vector<Trajectory>& refs) {
    double num = 0.0, den = 0.0;
    for (const auto& t : refs) {
        Mat proj = pod_project(modes, w, t.states);
        for (int j = 0; j < t.nt(); ++j) {
            num += w.squared_norm(Vec(t.states.col(j) - proj.col(j)));
            den += w.squared_norm(Vec(t.states.col(j)));
        }
    }
    return den > 0.0 ? num / den : (num > 0.0 ? 1.0 : 0.0);
}

double projection_error_spod(const SpodBasisSet& basis, const std::vector<int>& r_k,
                             const Weight& w, const std::vector<Trajectory>& refs) {
    double num = 0.0, den = 0.0;
    for (const auto& t : refs) {
        Mat proj = spod_project(basis, r_k, w, t.states);
        for (int j = 0; j < t.nt(); ++j) {
            num += w.squared_norm(Vec(t.states.col(j) - proj.col(j)));
            den += w.squared_norm(Vec(t.states.col(j)));
        }
    }
    return den > 0.0 ? num / den : (num > 0.0 ? 1.0 : 0.0);
}

RealVec error_vs_time(const std::vector<Mat>& approx,
                      const std::vector<Trajectory>& refs, const Weight& w) {
    if (approx.size() != refs.size())
        throw ValidationError("error curve: ensemble size mismatch");
    if (refs.empty()) return RealVec();
    const int nt = refs.front().nt();
    RealVec err = RealVec::Zero(nt);
    double denom = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        for (int j = 0; j < nt; ++j) {
            err(j) += w.squared_norm(Vec(approx[i].col(j) - refs[i].states.col(j)));
            denom += w.squared_norm(Vec(refs[i].states.col(j)));
        }
    }
    err /= static_cast<double>(refs.size());
    denom /= static_cast<double>(refs.size()) * nt;
    return err / std::max(denom, 1e-300);
}

double mean_error(const std::vector<Mat>& approx,
                  const std::vector<Trajectory>& refs, const Weight& w) {
    RealVec curve = error_vs_time(approx, refs, w);
    return curve.size() ? curve.mean() : 0.0;
}

}  // namespace sprom
