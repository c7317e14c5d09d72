#include "sprom/freq_solver.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "sprom/fft.hpp"

namespace sprom {

CorrectionOperators::CorrectionOperators(const LtiSystem& sys, FrequencyGrid grid)
    : grid_(grid) {
    if (sys.nx() > 1024)
        throw ValidationError(
            "correction operators: full-order path capped at N_x <= 1024");
    Mat a = sys.A().dense();
    e_dt_ = (a * grid_.dt).exp();
    // e^{AT} = (e^{A dt})^{n_omega}; exact for commuting powers and keeps the
    // n_omega-frequency loop free of repeated large-argument exponentials.
    g_ = Mat::Identity(sys.nx(), sys.nx()) - matrix_power(e_dt_, grid_.n_omega);
}

const Eigen::PartialPivLU<Mat>& CorrectionOperators::factor(int k) const {
    {
        std::lock_guard<std::mutex> lk(mutex_);
        auto it = lu_.find(k);
        if (it != lu_.end()) return *it->second;
    }
    // I - e^{(A - i omega_k) dt} = I - e^{A dt} e^{-i omega_k dt}.
    Complex phase = std::polar(1.0, -grid_.omega(k) * grid_.dt);
    Mat m = Mat::Identity(e_dt_.rows(), e_dt_.cols()) - phase * e_dt_;
    auto fac = std::make_shared<Eigen::PartialPivLU<Mat>>(m);
    if (fac->matrixLU().diagonal().array().abs().minCoeff() == 0.0) {
        std::ostringstream msg;
        msg << "correction operators: singular time-discrete resolvent at k = " << k;
        throw NumericalError(msg.str());
    }
    std::lock_guard<std::mutex> lk(mutex_);
    auto [it, inserted] = lu_.emplace(k, std::move(fac));
    (void)inserted;
    return *it->second;
}

Mat CorrectionOperators::apply_dk(int k, const Mat& x) const {
    return factor(k).solve(x);
}

Mat CorrectionOperators::dk_g(int k) const { return factor(k).solve(g_); }

Mat geometric_sum(const Mat& m, long n, bool allow_fallback) {
    if (m.rows() != m.cols()) throw ValidationError("geometric sum: square input required");
    if (n < 0) throw ValidationError("geometric sum: nonnegative term count required");
    const Eigen::Index d = m.rows();
    if (n == 0) return Mat::Zero(d, d);
    Mat i_minus_m = Mat::Identity(d, d) - m;
    if (i_minus_m.norm() < 1e-8) {
        if (!allow_fallback)
            throw NumericalError("geometric sum: I - M is singular to working precision");
        Mat acc = Mat::Identity(d, d);
        Mat term = Mat::Identity(d, d);
        for (long j = 1; j < n; ++j) {
            term = term * m;
            acc += term;
        }
        return acc;
    }
    Mat rhs = Mat::Identity(d, d) - matrix_power(m, n);
    return i_minus_m.partialPivLu().solve(rhs);
}

namespace {

// Gauss-Legendre rule on [-1, 1] by Golub-Welsch.
void legendre_rule(int n, RealVec& nodes, RealVec& weights) {
    RealMat j = RealMat::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = i / std::sqrt(4.0 * i * i - 1.0);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<RealMat> eig(j);
    nodes = eig.eigenvalues();
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double v = eig.eigenvectors()(0, i);
        weights(i) = 2.0 * v * v;
    }
}

}  // namespace

double derivative_dft_check(const BandLimitedSynthesis& synth,
                            const FrequencyGrid& grid) {
    const int n = grid.n_omega;
    const int nx = static_cast<int>(synth.coeffs.rows());
    if (synth.coeffs.cols() != n)
        throw ValidationError("derivative dft check: coefficient count must equal n_omega");
    const bool with_ramp = synth.ramp_slope.size() > 0;
    if (with_ramp && synth.ramp_slope.size() != nx)
        throw ValidationError("derivative dft check: ramp dimension mismatch");

    // The identity lives in the windowed continuous transform
    // (1/T) int_0^T (.) e^{-i omega_k t} dt. Both transforms are evaluated by
    // composite Gauss-Legendre quadrature of the synthesized signal, which is
    // independent of the boundary-term algebra being checked.
    auto value = [&](double t) -> Vec {
        Vec phases(n);
        for (int l = 0; l < n; ++l) phases(l) = std::polar(1.0, grid.omega(l) * t);
        Vec q = (synth.coeffs * phases) / static_cast<double>(n);
        if (with_ramp) q += synth.ramp_slope * t;
        return q;
    };
    auto derivative = [&](double t) -> Vec {
        Vec phases(n);
        for (int l = 0; l < n; ++l)
            phases(l) = kI * grid.omega(l) * std::polar(1.0, grid.omega(l) * t);
        Vec dq = (synth.coeffs * phases) / static_cast<double>(n);
        if (with_ramp) dq += synth.ramp_slope;
        return dq;
    };

    RealVec gl_nodes, gl_weights;
    legendre_rule(8, gl_nodes, gl_weights);
    const int panels = 16 * n;
    const double hp = grid.T() / panels;

    // One pass over the quadrature nodes accumulates every frequency at once.
    Mat fq = Mat::Zero(nx, n), fd = Mat::Zero(nx, n);
    for (int p = 0; p < panels; ++p) {
        double mid = (p + 0.5) * hp;
        for (int g = 0; g < gl_nodes.size(); ++g) {
            double t = mid + 0.5 * hp * gl_nodes(g);
            double scale = 0.5 * hp * gl_weights(g) / grid.T();
            Vec q = value(t);
            Vec dq = derivative(t);
            for (int k = 0; k < n; ++k) {
                Complex ph = std::polar(scale, -grid.omega(k) * t);
                fq.col(k) += ph * q;
                fd.col(k) += ph * dq;
            }
        }
    }

    Vec delta_q_over_t = with_ramp ? Vec(synth.ramp_slope) : Vec(Vec::Zero(nx));
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        Vec expected = kI * grid.omega(k) * fq.col(k) + delta_q_over_t;
        worst = std::max(worst, (fd.col(k) - expected).norm());
    }
    return worst;
}

namespace {

Mat resolvent_forcing_terms(const LtiSystem& sys, const Mat& fhat,
                            const FrequencyGrid& grid) {
    if (fhat.rows() != sys.nf())
        throw ValidationError("frequency solver: forcing spectrum dimension mismatch");
    if (fhat.cols() != grid.n_omega)
        throw ValidationError("frequency solver: forcing spectrum length mismatch");
    ResolventCache res(sys, grid);
    Mat rb(sys.nx(), grid.n_omega);
    parallel_for(static_cast<std::size_t>(grid.n_omega), [&](std::size_t l) {
        rb.col(static_cast<Eigen::Index>(l)) = res.solve(
            static_cast<int>(l), Vec(sys.B().apply(Vec(fhat.col(static_cast<Eigen::Index>(l))))));
    });
    return rb;
}

}  // namespace

Vec in_sync_ic(const LtiSystem& sys, const Mat& fhat, const FrequencyGrid& grid) {
    Mat rb = resolvent_forcing_terms(sys, fhat, grid);
    return rb.rowwise().sum() / static_cast<double>(grid.n_omega);
}

Mat corrected_spectrum(const LtiSystem& sys, const Vec& q0, const Mat& fhat,
                       const FrequencyGrid& grid) {
    if (q0.size() != sys.nx())
        throw ValidationError("corrected spectrum: q0 dimension mismatch");
    Mat rb = resolvent_forcing_terms(sys, fhat, grid);
    Vec offset = q0 - rb.rowwise().sum() / static_cast<double>(grid.n_omega);

    CorrectionOperators corr(sys, grid);
    Vec g_offset = corr.transient_factor() * offset;
    Mat qhat(sys.nx(), grid.n_omega);
    parallel_for(static_cast<std::size_t>(grid.n_omega), [&](std::size_t k) {
        auto col = static_cast<Eigen::Index>(k);
        qhat.col(col) = rb.col(col) + corr.apply_dk(static_cast<int>(k), Mat(g_offset));
    });
    return qhat;
}

Mat uncorrected_spectrum(const LtiSystem& sys, const Mat& fhat,
                         const FrequencyGrid& grid) {
    return resolvent_forcing_terms(sys, fhat, grid);
}

}  // namespace sprom
