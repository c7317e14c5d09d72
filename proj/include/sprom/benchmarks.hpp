#pragma once

#include <iosfwd>
#include <vector>

#include "sprom/baselines.hpp"
#include "sprom/io.hpp"
#include "sprom/rom.hpp"

namespace sprom {

/// Complex linearized Ginzburg-Landau on a Hermite-function collocation
/// grid: A = -nu D1 + gamma D2 + diag(mu(x)), mu(x) = (mu0 - c_mu^2) +
/// (mu2/2) x^2. Forcing occupies the whole domain (B = C = I) and the weight
/// carries the collocation quadrature.
struct GinzburgLandauSpec {
    int nx = 220;
    double x_max = 0.0;  // 0: scale the reference half-width 85 with nx
    Complex nu{2.0, 0.2};
    Complex gamma{1.0, -1.0};
    double c_mu = 0.2;
    double mu2 = -0.01;
    double mu0 = 0.229;
};

struct GlSystem {
    LtiSystem sys;
    Weight weight;
    RealVec x;        // collocation points (ascending)
    Mat d1, d2;       // differentiation matrices (diagnostics/tests)
    RealMat points;   // nx x 1 coordinates for the forcing sampler
};

GlSystem build_gl(const GinzburgLandauSpec& spec);

/// 2-D advection-diffusion of a passive scalar on the unit square with
/// homogeneous Dirichlet walls. The steady velocity comes from the stream
/// function sin^2(pi x) sin^2(pi y) / pi (unit maximum speed, discretely
/// divergence-free under centered differences). Forcing enters through the
/// grid points where the Gaussian support envelope exceeds e^{-support_log_cut}.
struct ScalarTransportSpec {
    int n = 98;  // interior points per direction
    double eta = 0.001;
    double support_log_cut = 6.8;
    double l = 0.1;
    double xi = 0.07;
    double tau = 1.0;
    double xbar_x = 0.75, xbar_y = 0.25;
};

struct StSystem {
    LtiSystem sys;
    Weight weight;
    double h = 0.0;
    RealMat points;         // N_x x 2 interior coordinates
    RealMat forced_points;  // N_f x 2 support coordinates
    std::vector<int> forced_idx;
    RealVec u, v;           // velocity samples at the interior points
};

StSystem build_scalar_transport(const ScalarTransportSpec& spec);

/// Support-point count for the envelope rule without building the operator.
int scalar_transport_nf(const ScalarTransportSpec& spec);

/// System + weight + forcing geometry assembled from a run configuration.
struct BuiltSystem {
    LtiSystem sys;
    Weight weight;
    RealMat forcing_points;
    bool real_forcing = false;
};

BuiltSystem build_system(const io::RunConfig& cfg);
ForcingSpec forcing_spec(const io::RunConfig& cfg, bool real_forcing,
                         std::uint64_t seed);

/// One row of the mode-sweep report.
struct MethodResult {
    std::string method;
    int r = 0;
    double mean_error = 0.0;
    double cpu_fraction = 0.0;  // of the FOM time
};

struct ExperimentReport {
    std::vector<MethodResult> sweep;               // error/cpu vs r
    std::vector<std::string> time_methods;         // columns of err_vs_time
    std::vector<RealVec> time_curves;              // at the configured r
    RealVec times;                                 // sample instants
    std::vector<int> retained_counts;              // r_k at the configured r
    double fom_seconds = 0.0;                      // mean per test trajectory
    std::uint64_t coeff_checksum = 0;              // reproducibility probe
};

/// Full pipeline: data generation, modes, offline build, every requested
/// method over the test set, error tables, CSV + container artifacts under
/// cfg.out_dir. Stage failures surface as exceptions named after the stage.
ExperimentReport run_experiment(const io::RunConfig& cfg, std::ostream& log);

}  // namespace sprom
