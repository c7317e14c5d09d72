#pragma once

#include <cstdint>
#include <vector>

#include "sprom/lti.hpp"

namespace sprom {

/// Gaussian spatial covariance: exp(-|x1-x2|^2 / xi^2), optionally damped by
/// a Gaussian support envelope exp(-(|x1-xbar|^2 + |x2-xbar|^2) / l^2).
struct SpatialCovSpec {
    double xi = 1.0;
    bool envelope = false;
    double l = 0.1;
    RealVec xbar;  // envelope center, dimension matches the point coordinates
};

struct ForcingSpec {
    enum class Kind { WhiteInTime, GaussianInTime };
    Kind kind = Kind::WhiteInTime;
    double tau = 1.0;      // temporal correlation length (gaussian-in-time)
    int band_limit = -1;   // max retained index on the reference grid; -1 = n_omega/2 - 1
    SpatialCovSpec spatial;
    bool real_valued = false;
    /// Restrict the spectrum to nonnegative frequencies (complex signals
    /// only). One-sided signals interpolate identically under the signed and
    /// unsigned frequency conventions, so the solver's Fourier ansatz holds
    /// exactly between samples.
    bool one_sided = false;
    std::uint64_t seed = 0;
};

struct ForcingSignal {
    Mat samples;   // N_f x N_t, values at t_j = j dt
    Mat spectrum;  // cached DFT of samples along time
    double dt = 0.0;
    std::uint64_t seed = 0;
    int realization = 0;

    int nf() const { return static_cast<int>(samples.rows()); }
    int nt() const { return static_cast<int>(samples.cols()); }
    /// || DFT(samples) - spectrum || / ||spectrum||, should be ~1e-15.
    double spectrum_consistency() const;
};

/// Eigendecomposition-based square root: returns L with L L^* = C. Negative
/// eigenvalues within -clip_rel * lambda_max are clipped to zero; anything
/// below that margin raises NumericalError with the offending eigenvalue.
RealMat covariance_factor(const RealMat& c, double clip_rel = 1e-12);

/// Dense covariance matrix of the spec evaluated at the given points
/// (rows = points, columns = coordinates).
RealMat gaussian_covariance(const RealMat& points, const SpatialCovSpec& spec);

/// Frequency-domain sampler for one forcing specification bound to a set of
/// spatial points. Realizations are normalized to unit pointwise variance at
/// the support center and are independent across the realization index.
class ForcingSampler {
public:
    ForcingSampler(ForcingSpec spec, RealMat points, FrequencyGrid grid);

    /// n_t = 0 means one grid window (grid.n_omega samples).
    ForcingSignal sample(int realization, int n_t = 0) const;
    std::vector<ForcingSignal> sample_many(int first, int count, int n_t = 0) const;

    /// Stationary spatial covariance of the generated signal (used by the
    /// balanced-truncation whitening).
    const RealMat& stationary_covariance() const { return scaled_cov_; }
    const ForcingSpec& spec() const { return spec_; }
    const FrequencyGrid& grid() const { return grid_; }

private:
    RealVec amplitudes(int n_t) const;  // per-frequency spectral shaping

    ForcingSpec spec_;
    RealMat points_;
    FrequencyGrid grid_;
    RealMat cov_;         // unscaled kernel covariance
    RealMat factor_;      // L with L L^* = cov_
    Mat factor_c_;        // complex view of the factor
    RealMat scaled_cov_;  // variance-normalized stationary covariance
    double norm_scale_ = 1.0;
    int center_index_ = 0;
};

}  // namespace sprom
