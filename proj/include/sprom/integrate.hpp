#pragma once

#include "sprom/forcing.hpp"
#include "sprom/lti.hpp"

namespace sprom {

struct Trajectory {
    Mat states;    // N_x x N_t at t_j = j dt
    Mat forcings;  // N_f x N_t at the same instants
    double dt = 0.0;

    int nx() const { return static_cast<int>(states.rows()); }
    int nt() const { return static_cast<int>(states.cols()); }
    Vec q0() const { return states.col(0); }
};

struct IntegrateOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// 0: forcing between samples by exact trigonometric interpolation of its
    /// DFT. m > 0: cubic interpolation on an m-times oversampled synthesis
    /// (much cheaper for long training runs).
    int oversample = 0;
    double max_step = 0.0;  // 0 = no cap
};

/// Evaluates the band-limited forcing at arbitrary t in [0, N_t dt).
class ForcingEvaluator {
public:
    ForcingEvaluator(const ForcingSignal& f, int oversample);
    Vec operator()(double t) const;
    int nf() const { return nf_; }

private:
    const ForcingSignal* f_;
    int nf_ = 0;
    int n_t_ = 0;
    double period_ = 0.0;
    int oversample_ = 0;
    Mat fine_;  // oversampled samples when oversample_ > 0
};

/// Adaptive Dormand-Prince 5(4) with 4th-order dense output, sampled at
/// exactly the N_t uniform instants of the forcing signal.
Trajectory integrate(const LtiSystem& sys, const Vec& q0, const ForcingSignal& f,
                     const FrequencyGrid& grid, const IntegrateOptions& opts = {});

/// Exact-solution spectrum by brute force: the variation-of-constants formula
/// evaluated sample-by-sample with dense matrix exponentials under Fourier
/// interpolation of the forcing, then DFT'd. Verification harness only;
/// refuses N_x > 64.
Mat analytic_dft_reference(const LtiSystem& sys, const Vec& q0, const Mat& fhat,
                           const FrequencyGrid& grid);

}  // namespace sprom
