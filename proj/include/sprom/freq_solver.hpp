#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>

#include "sprom/lti.hpp"

namespace sprom {

/// Per-frequency non-periodicity correction operators of the full-order
/// frequency-domain solution: D_k = (I - e^{(A - i omega_k) dt})^{-1} applied
/// through cached LU factors, and the shared transient factor G = I - e^{AT}.
/// Dense verification path, capped at N_x <= 1024.
class CorrectionOperators {
public:
    CorrectionOperators(const LtiSystem& sys, FrequencyGrid grid);

    Mat apply_dk(int k, const Mat& x) const;  // D_k x
    const Mat& transient_factor() const { return g_; }
    Mat dk_g(int k) const;  // dense D_k G
    const FrequencyGrid& grid() const { return grid_; }

private:
    const Eigen::PartialPivLU<Mat>& factor(int k) const;

    FrequencyGrid grid_;
    Mat e_dt_;  // e^{A dt}
    Mat g_;     // I - e^{AT} with e^{AT} = (e^{A dt})^{n_omega}
    mutable std::mutex mutex_;
    mutable std::unordered_map<int, std::shared_ptr<Eigen::PartialPivLU<Mat>>> lu_;
};

/// sum_{j=0}^{n-1} M^j. Closed form (I - M)^{-1} (I - M^n); falls back to
/// term-by-term accumulation when I - M is nearly singular.
Mat geometric_sum(const Mat& m, long n, bool allow_fallback = true);

/// Band-limited synthesis plus a linear ramp, used to exercise the
/// derivative-DFT identity with a nonzero endpoint difference.
struct BandLimitedSynthesis {
    Mat coeffs;      // N_x x n_omega spectral coefficients of the periodic part
    Vec ramp_slope;  // component-wise slope of the additive t-ramp
};

/// Max over k of || DFT(dq/dt)_k - (i omega_k qhat_k + dq/T) || where the
/// derivative samples come from the analytically differentiated synthesis.
double derivative_dft_check(const BandLimitedSynthesis& synth,
                            const FrequencyGrid& grid);

/// In-sync initial condition (1/N) sum_l R_l B fhat_l.
Vec in_sync_ic(const LtiSystem& sys, const Mat& fhat, const FrequencyGrid& grid);

/// Corrected full-order spectrum:
/// qhat_k = R_k B fhat_k + D_k G (q0 - (1/N) sum_l R_l B fhat_l).
Mat corrected_spectrum(const LtiSystem& sys, const Vec& q0, const Mat& fhat,
                       const FrequencyGrid& grid);

/// Naive term only: qhat_k = R_k B fhat_k.
Mat uncorrected_spectrum(const LtiSystem& sys, const Mat& fhat,
                         const FrequencyGrid& grid);

}  // namespace sprom
