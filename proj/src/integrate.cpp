#include "sprom/integrate.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sprom/fft.hpp"

namespace sprom {

// ---------------------------------------------------------------------------
// ForcingEvaluator

ForcingEvaluator::ForcingEvaluator(const ForcingSignal& f, int oversample)
    : f_(&f),
      nf_(f.nf()),
      n_t_(f.nt()),
      period_(f.nt() * f.dt),
      oversample_(oversample) {
    if (oversample_ > 0) {
        // Zero-padded spectrum (signed-frequency placement) -> smooth fine
        // synthesis whose knots coincide with the original samples.
        const int nfine = oversample_ * n_t_;
        Mat padded = Mat::Zero(nf_, nfine);
        for (int l = 0; l < n_t_; ++l) {
            int s = (l > n_t_ / 2) ? l - n_t_ : l;
            int dst = s < 0 ? nfine + s : s;
            padded.col(dst) = f_->spectrum.col(l);
        }
        fine_ = static_cast<double>(oversample_) * fft::inverse(padded);
    }
}

Vec ForcingEvaluator::operator()(double t) const {
    if (oversample_ == 0) {
        // f(t) = (1/N) sum_l fhat_l e^{i omega_l t}, omega_l = 2 pi l / T.
        Vec phases(n_t_);
        const Complex w = std::polar(1.0, 2.0 * kPi * t / period_);
        Complex p(1.0, 0.0);
        for (int l = 0; l < n_t_; ++l) {
            phases(l) = p;
            p *= w;
        }
        return (f_->spectrum * phases) / static_cast<double>(n_t_);
    }
    // Periodic Catmull-Rom on the oversampled grid.
    const int nfine = static_cast<int>(fine_.cols());
    double s = t / (period_ / nfine);
    double base = std::floor(s);
    double theta = s - base;
    auto wrap = [nfine](long i) { return static_cast<int>(((i % nfine) + nfine) % nfine); };
    long i = static_cast<long>(base);
    Vec p0 = fine_.col(wrap(i - 1)), p1 = fine_.col(wrap(i)),
        p2 = fine_.col(wrap(i + 1)), p3 = fine_.col(wrap(i + 2));
    double t2 = theta * theta, t3 = t2 * theta;
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * theta +
                  (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

// 4th-order dense-output polynomial coefficients (theta..theta^4 per stage).
constexpr double kBI[7][4] = {
    {1.0, -183.0 / 64, 37.0 / 12, -145.0 / 128},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 1500.0 / 371, -1000.0 / 159, 1000.0 / 371},
    {0.0, -125.0 / 32, 125.0 / 12, -375.0 / 64},
    {0.0, 9477.0 / 3392, -729.0 / 106, 25515.0 / 6784},
    {0.0, -11.0 / 7, 11.0 / 3, -55.0 / 28},
    {0.0, 3.0 / 2, -4.0, 5.0 / 2},
};

}  // namespace

Trajectory integrate(const LtiSystem& sys, const Vec& q0, const ForcingSignal& f,
                     const FrequencyGrid& grid, const IntegrateOptions& opts) {
    if (q0.size() != sys.nx()) throw ValidationError("integrate: q0 dimension mismatch");
    if (f.nf() != sys.nf()) throw ValidationError("integrate: forcing dimension mismatch");
    if (std::abs(f.dt - grid.dt) > 1e-12 * grid.dt)
        throw ValidationError("integrate: forcing sample spacing does not match grid");

    const int n_t = f.nt();
    const double dt = grid.dt;
    ForcingEvaluator force(f, opts.oversample);

    auto rhs = [&](double t, const Vec& y) -> Vec {
        return sys.A().apply(y) + sys.B().apply(force(t));
    };

    Trajectory traj;
    traj.states.resize(sys.nx(), n_t);
    traj.forcings = f.samples;
    traj.dt = dt;
    traj.states.col(0) = q0;
    if (n_t == 1) return traj;

    const double t_end = (n_t - 1) * dt;
    const double tiny_t = 1e-12 * dt;
    Vec y = q0;
    double t = 0.0;
    double h = 0.1 * dt;
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
    Vec k1 = rhs(t, y);
    int next_sample = 1;

    Vec k2, k3, k4, k5, k6, k7, y5, yerr;
    while (t < t_end - tiny_t) {
        h = std::min(h, t_end - t);
        k2 = rhs(t + kC2 * h, y + h * (kA21 * k1));
        k3 = rhs(t + kC3 * h, y + h * (kA31 * k1 + kA32 * k2));
        k4 = rhs(t + kC4 * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
        k5 = rhs(t + kC5 * h, y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
        k6 = rhs(t + h, y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
        y5 = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        k7 = rhs(t + h, y5);
        yerr = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

        double err = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            double r = std::abs(yerr(i)) / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(y.size()));

        if (err <= 1.0) {
            while (next_sample < n_t && next_sample * dt <= t + h + tiny_t) {
                double theta = (next_sample * dt - t) / h;
                auto poly = [theta](const double* c) {
                    return theta * (c[0] + theta * (c[1] + theta * (c[2] + theta * c[3])));
                };
                traj.states.col(next_sample) =
                    y + h * (poly(kBI[0]) * k1 + poly(kBI[2]) * k3 + poly(kBI[3]) * k4 +
                             poly(kBI[4]) * k5 + poly(kBI[5]) * k6 + poly(kBI[6]) * k7);
                ++next_sample;
            }
            t += h;
            y = y5;
            k1 = k7;  // FSAL
        }

        double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg << "integrate: step size underflow (stiffness failure) at t = " << t;
            throw NumericalError(msg.str());
        }
    }
    // Floating-point guard: the final sample always lands exactly on t_end.
    if (next_sample == n_t - 1) traj.states.col(n_t - 1) = y;

    return traj;
}

// ---------------------------------------------------------------------------
// Brute-force exact-solution spectrum

Mat analytic_dft_reference(const LtiSystem& sys, const Vec& q0, const Mat& fhat,
                           const FrequencyGrid& grid) {
    const int nx = sys.nx();
    const int n = grid.n_omega;
    if (nx > 64)
        throw ValidationError("analytic dft reference: N_x > 64 (verification-only path)");
    if (fhat.cols() != n || fhat.rows() != sys.nf())
        throw ValidationError("analytic dft reference: fhat shape mismatch");

    // Stationary part: inverse DFT of the columns R_l B fhat_l. Solved with
    // full-pivot LU directly so this path shares nothing with the cached
    // resolvent machinery it is used to validate.
    Mat a_dense = sys.A().dense();
    Mat rb(nx, n);
    for (int l = 0; l < n; ++l) {
        Mat lhs = Complex(0.0, grid.omega(l)) * Mat::Identity(nx, nx) - a_dense;
        rb.col(l) = lhs.fullPivLu().solve(Vec(sys.B().apply(Vec(fhat.col(l)))));
    }
    Mat stationary = fft::inverse(rb);
    Vec in_sync = rb.rowwise().sum() / static_cast<double>(n);

    Mat samples(nx, n);
    Vec offset = q0 - in_sync;
    for (int j = 0; j < n; ++j) {
        Mat ej = (a_dense * (j * grid.dt)).exp();
        samples.col(j) = ej * offset + stationary.col(j);
    }
    return fft::forward(samples);
}

}  // namespace sprom
