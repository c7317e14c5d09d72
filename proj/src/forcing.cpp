#include "sprom/forcing.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "sprom/fft.hpp"
#include "sprom/rng.hpp"

namespace sprom {

double ForcingSignal::spectrum_consistency() const {
    Mat recomputed = fft::forward(samples);
    double denom = std::max(1.0, spectrum.norm());
    return (recomputed - spectrum).norm() / denom;
}

RealMat covariance_factor(const RealMat& c, double clip_rel) {
    if (c.rows() != c.cols())
        throw ValidationError("covariance factor: matrix must be square");
    Eigen::SelfAdjointEigenSolver<RealMat> eig(c);
    RealVec lambda = eig.eigenvalues();
    double lmax = lambda.maxCoeff();
    if (lmax <= 0.0) {
        if (lambda.minCoeff() < 0.0)
            throw NumericalError("covariance factor: matrix is negative");
        return RealMat::Zero(c.rows(), c.cols());
    }
    RealVec clipped = lambda;
    for (int i = 0; i < clipped.size(); ++i) {
        if (clipped(i) < -clip_rel * lmax) {
            std::ostringstream msg;
            msg << "covariance factor: non-PSD input, most negative eigenvalue "
                << lambda.minCoeff();
            throw NumericalError(msg.str());
        }
        clipped(i) = std::max(clipped(i), 0.0);
    }
    return eig.eigenvectors() * clipped.array().sqrt().matrix().asDiagonal();
}

RealMat gaussian_covariance(const RealMat& points, const SpatialCovSpec& spec) {
    const int n = static_cast<int>(points.rows());
    RealVec env = RealVec::Ones(n);
    if (spec.envelope) {
        if (spec.xbar.size() != points.cols())
            throw ValidationError("spatial covariance: envelope center dimension mismatch");
        for (int i = 0; i < n; ++i) {
            double d2 = (points.row(i).transpose() - spec.xbar).squaredNorm();
            env(i) = std::exp(-d2 / (spec.l * spec.l));
        }
    }
    RealMat c(n, n);
    const double inv_xi2 = 1.0 / (spec.xi * spec.xi);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            double d2 = (points.row(i) - points.row(j)).squaredNorm();
            double v = env(i) * env(j) * std::exp(-d2 * inv_xi2);
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

ForcingSampler::ForcingSampler(ForcingSpec spec, RealMat points, FrequencyGrid grid)
    : spec_(std::move(spec)), points_(std::move(points)), grid_(grid) {
    if (grid_.n_omega <= 0 || grid_.dt <= 0.0)
        throw ValidationError("forcing sampler: invalid grid");
    cov_ = gaussian_covariance(points_, spec_.spatial);
    factor_ = covariance_factor(cov_);
    factor_c_ = factor_.cast<Complex>();
    cov_.diagonal().maxCoeff(&center_index_);
    double c_center = cov_(center_index_, center_index_);
    if (c_center <= 0.0)
        throw ValidationError("forcing sampler: degenerate spatial covariance");
    scaled_cov_ = cov_ / c_center;
}

RealVec ForcingSampler::amplitudes(int n_t) const {
    if (spec_.one_sided && spec_.real_valued)
        throw ValidationError("forcing: one-sided spectra cannot be real-valued");
    RealVec a(n_t);
    FrequencyGrid long_grid{n_t, grid_.dt};
    auto freq = [&](int l) {
        return spec_.one_sided ? long_grid.omega(l) : long_grid.omega_signed(l);
    };
    if (spec_.kind == ForcingSpec::Kind::WhiteInTime) {
        int bl = spec_.band_limit < 0 ? grid_.n_omega / 2 - 1 : spec_.band_limit;
        double omega_max = 2.0 * kPi * bl / grid_.T();
        for (int l = 0; l < n_t; ++l)
            a(l) = std::abs(freq(l)) <= omega_max * (1.0 + 1e-12) ? 1.0 : 0.0;
    } else {
        // Power spectrum of an exp(-(dt')^2/tau^2) autocorrelation.
        const double tau = spec_.tau;
        for (int l = 0; l < n_t; ++l) {
            double w = freq(l);
            a(l) = std::exp(-w * w * tau * tau / 8.0);
        }
    }
    return a;
}

ForcingSignal ForcingSampler::sample(int realization, int n_t) const {
    if (n_t <= 0) n_t = grid_.n_omega;
    const int nf = static_cast<int>(points_.rows());
    RealVec amp = amplitudes(n_t);

    // Unit pointwise variance at the support center:
    // Var f_j(center) = (sum_l a_l^2 / n_t^2) * C_cc.
    double var_model = amp.squaredNorm() / (static_cast<double>(n_t) * n_t) *
                       cov_(center_index_, center_index_);
    double scale = var_model > 0.0 ? 1.0 / std::sqrt(var_model) : 1.0;

    Philox rng(spec_.seed, static_cast<std::uint64_t>(realization));
    Mat spectrum = Mat::Zero(nf, n_t);

    auto draw_complex = [&](double a) -> Vec {
        Vec z(nf);
        for (int i = 0; i < nf; ++i) z(i) = rng.next_cgaussian();
        return (a * scale) * (factor_c_ * z);
    };
    auto draw_real = [&](double a) -> Vec {
        RealVec z(nf);
        for (int i = 0; i < nf; ++i) z(i) = rng.next_gaussian();
        return ((a * scale) * (factor_ * z)).cast<Complex>();
    };

    if (!spec_.real_valued) {
        for (int l = 0; l < n_t; ++l)
            if (amp(l) > 0.0) spectrum.col(l) = draw_complex(amp(l));
    } else {
        for (int l = 0; l <= n_t / 2; ++l) {
            if (amp(l) <= 0.0) continue;
            bool self_conjugate = (l == 0) || (2 * l == n_t);
            if (self_conjugate) {
                spectrum.col(l) = draw_real(amp(l));
            } else {
                spectrum.col(l) = draw_complex(amp(l));
                spectrum.col(n_t - l) = spectrum.col(l).conjugate();
            }
        }
    }

    ForcingSignal sig;
    sig.samples = fft::inverse(spectrum);
    if (spec_.real_valued) sig.samples.imag().setZero();
    sig.spectrum = std::move(spectrum);
    sig.dt = grid_.dt;
    sig.seed = spec_.seed;
    sig.realization = realization;
    return sig;
}

std::vector<ForcingSignal> ForcingSampler::sample_many(int first, int count,
                                                       int n_t) const {
    std::vector<ForcingSignal> out(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count),
                 [&](std::size_t i) { out[i] = sample(first + static_cast<int>(i), n_t); });
    return out;
}

}  // namespace sprom
