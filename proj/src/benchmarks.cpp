#include "sprom/benchmarks.hpp"

#include <zlib.h>

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sprom {

namespace {

RealVec hermite_nodes(int n) {
    RealMat j = RealMat::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = std::sqrt(i / 2.0);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<RealMat> eig(j);
    return eig.eigenvalues();
}

// Normalized Hermite functions psi_0..psi_{m-1} at the given points; stable
// upward recurrence (all values stay O(1) below the turning point).
RealMat hermite_functions(const RealVec& x, int m) {
    const int n = static_cast<int>(x.size());
    RealMat psi(n, m);
    for (int i = 0; i < n; ++i) {
        double xi = x(i);
        psi(i, 0) = std::pow(kPi, -0.25) * std::exp(-xi * xi / 2.0);
        if (m > 1) psi(i, 1) = std::sqrt(2.0) * xi * psi(i, 0);
        for (int k = 2; k < m; ++k)
            psi(i, k) = xi * std::sqrt(2.0 / k) * psi(i, k - 1) -
                        std::sqrt((k - 1.0) / k) * psi(i, k - 2);
    }
    return psi;
}

}  // namespace

GlSystem build_gl(const GinzburgLandauSpec& spec) {
    const int n = spec.nx;
    if (n < 4) throw ValidationError("ginzburg-landau: nx too small");
    // Reference half-width 85 at nx = 220, scaled to keep the collocation
    // spacing near the center independent of nx.
    double x_max = spec.x_max > 0.0 ? spec.x_max : 85.0 * (2.0 * n + 1.0) / 441.0;

    RealVec nodes = hermite_nodes(n);
    RealMat psi = hermite_functions(nodes, n + 2);

    // Collocation quadrature weights: w_j = 1 / (n psi_{n-1}(x_j)^2).
    RealVec w(n);
    for (int i = 0; i < n; ++i) {
        double p = psi(i, n - 1);
        w(i) = 1.0 / (n * p * p);
    }

    // Differentiation through the Hermite-function Vandermonde. Quadrature
    // exactness makes V^{-1} = V^T diag(w).
    RealMat v = psi.leftCols(n);
    RealMat vd(n, n), vdd(n, n);
    for (int k = 0; k < n; ++k) {
        vd.col(k) = -std::sqrt((k + 1) / 2.0) * psi.col(k + 1);
        if (k > 0) vd.col(k) += std::sqrt(k / 2.0) * psi.col(k - 1);
        vdd.col(k) = -(2.0 * k + 1.0) / 2.0 * psi.col(k) +
                     std::sqrt((k + 1.0) * (k + 2.0)) / 2.0 * psi.col(k + 2);
        if (k > 1) vdd.col(k) += std::sqrt(k * (k - 1.0)) / 2.0 * psi.col(k - 2);
    }
    RealMat v_inv = v.transpose() * w.asDiagonal();
    double ortho_err = (v_inv * v - RealMat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (ortho_err > 1e-7)
        throw NumericalError("ginzburg-landau: collocation basis lost orthonormality");

    double c = x_max / nodes(n - 1);
    GlSystem gl;
    gl.x = c * nodes;
    gl.d1 = ((vd * v_inv) / c).cast<Complex>();
    gl.d2 = ((vdd * v_inv) / (c * c)).cast<Complex>();
    RealVec w_phys = c * w;

    Mat a = -spec.nu * gl.d1 + spec.gamma * gl.d2;
    const double mu_base = spec.mu0 - spec.c_mu * spec.c_mu;
    for (int i = 0; i < n; ++i)
        a(i, i) += mu_base + 0.5 * spec.mu2 * gl.x(i) * gl.x(i);

    gl.sys = LtiSystem(LinOp(std::move(a)), LinOp::identity_dense(n),
                       LinOp::identity_dense(n));
    gl.weight = Weight(w_phys);
    gl.points = gl.x;
    return gl;
}

int scalar_transport_nf(const ScalarTransportSpec& spec) {
    const int n = spec.n;
    const double h = 1.0 / (n + 1);
    const double r2 = spec.support_log_cut * spec.l * spec.l;
    int count = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double dx = (i + 1) * h - spec.xbar_x;
            double dy = (j + 1) * h - spec.xbar_y;
            if (dx * dx + dy * dy <= r2) ++count;
        }
    return count;
}

StSystem build_scalar_transport(const ScalarTransportSpec& spec) {
    const int n = spec.n;
    if (n < 4) throw ValidationError("scalar transport: grid too small");
    const double h = 1.0 / (n + 1);
    const int nx = n * n;
    auto idx = [n](int i, int j) { return j * n + i; };

    StSystem st;
    st.h = h;
    st.points.resize(nx, 2);
    st.u.resize(nx);
    st.v.resize(nx);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double x = (i + 1) * h, y = (j + 1) * h;
            int id = idx(i, j);
            st.points(id, 0) = x;
            st.points(id, 1) = y;
            // Stream function sin^2(pi x) sin^2(pi y) / pi: unit max speed,
            // centered differences see exactly zero divergence.
            st.u(id) = std::sin(kPi * x) * std::sin(kPi * x) * std::sin(2.0 * kPi * y);
            st.v(id) = -std::sin(2.0 * kPi * x) * std::sin(kPi * y) * std::sin(kPi * y);
        }

    const double inv_h2 = spec.eta / (h * h);
    const double inv_2h = 1.0 / (2.0 * h);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(nx) * 5);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int id = idx(i, j);
            double ui = st.u(id) * inv_2h, vi = st.v(id) * inv_2h;
            trips.emplace_back(id, id, Complex(-4.0 * inv_h2, 0));
            if (i + 1 < n) trips.emplace_back(id, idx(i + 1, j), Complex(inv_h2 - ui, 0));
            if (i > 0) trips.emplace_back(id, idx(i - 1, j), Complex(inv_h2 + ui, 0));
            if (j + 1 < n) trips.emplace_back(id, idx(i, j + 1), Complex(inv_h2 - vi, 0));
            if (j > 0) trips.emplace_back(id, idx(i, j - 1), Complex(inv_h2 + vi, 0));
        }
    SpMat a(nx, nx);
    a.setFromTriplets(trips.begin(), trips.end());

    const double r2 = spec.support_log_cut * spec.l * spec.l;
    std::vector<Eigen::Triplet<Complex>> b_trips;
    for (int id = 0; id < nx; ++id) {
        double dx = st.points(id, 0) - spec.xbar_x;
        double dy = st.points(id, 1) - spec.xbar_y;
        if (dx * dx + dy * dy <= r2) {
            int col = static_cast<int>(st.forced_idx.size());
            st.forced_idx.push_back(id);
            b_trips.emplace_back(id, col, Complex(1, 0));
        }
    }
    const int nf = static_cast<int>(st.forced_idx.size());
    if (nf == 0) throw ValidationError("scalar transport: empty forcing support");
    SpMat b(nx, nf);
    b.setFromTriplets(b_trips.begin(), b_trips.end());
    st.forced_points.resize(nf, 2);
    for (int c = 0; c < nf; ++c) st.forced_points.row(c) = st.points.row(st.forced_idx[c]);

    st.sys = LtiSystem(LinOp(std::move(a)), LinOp(std::move(b)),
                       LinOp::identity_sparse(nx));
    st.weight = Weight(RealVec(RealVec::Constant(nx, h * h)));
    return st;
}

// ---------------------------------------------------------------------------
// Experiment driver

namespace {

struct StageLog {
    std::ostream& log;
    const char* stage;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    StageLog(std::ostream& os, const char* s) : log(os), stage(s) {
        log << "[stage] " << stage << "...\n" << std::flush;
    }
    ~StageLog() {
        log << "[stage] " << stage << " done ("
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s)\n"
            << std::flush;
    }
};

double wall_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BuiltSystem build_system(const io::RunConfig& cfg) {
    BuiltSystem out;
    if (cfg.system_kind == "gl") {
        GinzburgLandauSpec spec;
        spec.nx = cfg.nx;
        spec.x_max = cfg.x_max;
        spec.nu = Complex(cfg.nu_re, cfg.nu_im);
        spec.gamma = Complex(cfg.gamma_re, cfg.gamma_im);
        spec.c_mu = cfg.c_mu;
        spec.mu2 = cfg.mu2;
        spec.mu0 = cfg.mu0;
        GlSystem gl = build_gl(spec);
        out.sys = std::move(gl.sys);
        out.weight = std::move(gl.weight);
        out.forcing_points = gl.points;
        out.real_forcing = false;
    } else if (cfg.system_kind == "scalar_transport") {
        ScalarTransportSpec spec;
        spec.n = cfg.grid_n;
        spec.eta = cfg.eta;
        spec.support_log_cut = cfg.support_log_cut;
        spec.l = cfg.envelope_l;
        spec.xi = cfg.xi;
        spec.tau = cfg.tau;
        spec.xbar_x = cfg.xbar_x;
        spec.xbar_y = cfg.xbar_y;
        StSystem st = build_scalar_transport(spec);
        out.sys = std::move(st.sys);
        out.weight = std::move(st.weight);
        out.forcing_points = st.forced_points;
        out.real_forcing = true;
    } else {
        throw ValidationError("experiment: unknown system kind '" + cfg.system_kind + "'");
    }
    if (cfg.real_valued == "true") out.real_forcing = true;
    if (cfg.real_valued == "false") out.real_forcing = false;
    return out;
}

ForcingSpec forcing_spec(const io::RunConfig& cfg, bool real_forcing,
                         std::uint64_t seed) {
    ForcingSpec spec;
    spec.kind = cfg.forcing_kind == "gaussian" ? ForcingSpec::Kind::GaussianInTime
                                               : ForcingSpec::Kind::WhiteInTime;
    if (cfg.forcing_kind != "gaussian" && cfg.forcing_kind != "white")
        throw ValidationError("experiment: unknown forcing kind '" + cfg.forcing_kind + "'");
    spec.tau = cfg.tau;
    spec.band_limit = cfg.band_limit;
    spec.spatial.xi = cfg.xi;
    if (cfg.system_kind == "scalar_transport") {
        spec.spatial.envelope = true;
        spec.spatial.l = cfg.envelope_l;
        spec.spatial.xbar = RealVec(2);
        spec.spatial.xbar << cfg.xbar_x, cfg.xbar_y;
    }
    spec.real_valued = real_forcing;
    if (cfg.one_sided == "auto")
        spec.one_sided = !real_forcing;
    else
        spec.one_sided = cfg.one_sided == "true";
    spec.seed = seed;
    return spec;
}

namespace {

std::uint64_t coeff_crc(const std::vector<Vec>& coeffs) {
    auto crc = crc32(0L, Z_NULL, 0);
    for (const auto& c : coeffs)
        crc = crc32(crc, reinterpret_cast<const Bytef*>(c.data()),
                    static_cast<uInt>(sizeof(Complex) * c.size()));
    return crc;
}

}  // namespace

ExperimentReport run_experiment(const io::RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    ExperimentReport report;
    const FrequencyGrid grid{cfg.n_omega, cfg.dt};
    const Weight* err_weight = nullptr;
    Weight euclid;

    BuiltSystem built = [&] {
        StageLog s(log, "system");
        return build_system(cfg);
    }();
    if (cfg.error_norm == "euclidean") {
        euclid = Weight::identity(built.sys.nx());
        err_weight = &euclid;
    } else if (cfg.error_norm == "weighted") {
        err_weight = &built.weight;
    } else {
        throw ValidationError("experiment: unknown error norm '" + cfg.error_norm + "'");
    }

    ForcingSampler train_sampler(forcing_spec(cfg, built.real_forcing, cfg.seed),
                                 built.forcing_points, grid);
    ForcingSampler test_sampler(forcing_spec(cfg, built.real_forcing, cfg.test_seed),
                                built.forcing_points, grid);

    Trajectory training;
    {
        StageLog s(log, "training data");
        ForcingSignal f_train = train_sampler.sample(0, cfg.n_train);
        training = integrate(built.sys, Vec::Zero(built.sys.nx()), f_train, grid,
                             {cfg.fom_rtol, cfg.fom_atol, cfg.fom_oversample, 0.0});
    }

    BlockedSpectra blocks;
    SpodBasisSet basis;
    PodBasis state_pod;
    {
        StageLog s(log, "modes");
        WindowKind window = cfg.window == "hann" ? WindowKind::Hann : WindowKind::None;
        blocks = segment_blocks(training, cfg.n_omega, cfg.overlap, window,
                                cfg.n_blocks, cfg.snapshot_cap);
        basis = spod(blocks, built.weight);
        state_pod = pod(blocks.snapshots, built.weight);
        log << "  blocks: " << blocks.r_d << ", stride " << blocks.stride << "\n";
    }

    std::vector<Trajectory> refs(static_cast<std::size_t>(cfg.n_test));
    std::vector<ForcingSignal> test_forcings(static_cast<std::size_t>(cfg.n_test));
    std::vector<Vec> test_ics(static_cast<std::size_t>(cfg.n_test));
    {
        StageLog s(log, "test set");
        auto t0 = std::chrono::steady_clock::now();
        parallel_for(static_cast<std::size_t>(cfg.n_test), [&](std::size_t i) {
            // Burn-in window reaches a statistically stationary start state.
            ForcingSignal burn = test_sampler.sample(2 * static_cast<int>(i));
            Trajectory warm = integrate(built.sys, Vec::Zero(built.sys.nx()), burn, grid,
                                        {cfg.fom_rtol, cfg.fom_atol, 0, 0.0});
            test_ics[i] = warm.states.col(warm.nt() - 1);
            test_forcings[i] = test_sampler.sample(2 * static_cast<int>(i) + 1);
            refs[i] = integrate(built.sys, test_ics[i], test_forcings[i], grid,
                                {cfg.fom_rtol, cfg.fom_atol, 0, 0.0});
        });
        // Mean FOM time per trajectory, measured sequentially on one probe to
        // avoid contention bias, then scaled by the ensemble.
        auto t_probe = std::chrono::steady_clock::now();
        integrate(built.sys, test_ics[0], test_forcings[0], grid,
                  {cfg.fom_rtol, cfg.fom_atol, 0, 0.0});
        report.fom_seconds = wall_seconds(t_probe);
        (void)t0;
    }

    fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    {
        std::ofstream manifest(out_dir / "manifest.cfg");
        manifest << io::serialize_config(cfg);
    }

    report.times.resize(cfg.n_omega);
    for (int j = 0; j < cfg.n_omega; ++j) report.times(j) = j * cfg.dt;

    const auto r_values = cfg.r_list();
    std::vector<std::vector<double>> sweep_rows;
    std::vector<std::string> sweep_labels;

    for (int r : r_values) {
        StageLog s(log, "rom solves");
        log << "  r = " << r << "\n";
        RomOptions opts;
        opts.r = r;
        opts.r_d = cfg.r_d;
        opts.p = cfg.p;
        opts.exact_e = cfg.exact_e;
        opts.pinv_cut = cfg.pinv_cut;
        RomOperatorBundle bundle = offline_from_basis(basis, blocks, built.sys,
                                                      built.weight, opts);
        bundle.seed = cfg.seed;
        if (r == cfg.r) report.retained_counts = bundle.r_k;

        auto record = [&](const std::string& method, double err, double cpu) {
            report.sweep.push_back({method, r, err, cpu});
            sweep_labels.push_back(method);
            sweep_rows.push_back({static_cast<double>(r), err, cpu});
            log << "  " << method << ": mean error " << err << ", cpu fraction " << cpu
                << "\n";
        };
        auto push_curve = [&](const std::string& method, const RealVec& curve) {
            if (r != cfg.r) return;
            report.time_methods.push_back(method);
            report.time_curves.push_back(curve);
        };

        if (cfg.wants("spod_pg")) {
            std::vector<Mat> approx(refs.size());
            double wall = 0.0;
            std::vector<Vec> first_coeffs;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                SolveReport sr = online(bundle, test_ics[i], test_forcings[i], true);
                wall += sr.online_seconds();
                approx[i] = sr.state;
                if (i == 0) first_coeffs = sr.coeffs;
                if (r == cfg.r) {
                    fs::path cdir = out_dir / ("coeffs_spod_pg_" + std::to_string(i));
                    fs::create_directories(cdir);
                    for (std::size_t k = 0; k < sr.coeffs.size(); ++k) {
                        std::ostringstream name;
                        name << "a_" << std::setw(5) << std::setfill('0') << k << ".spr";
                        io::write_matrix(cdir / name.str(), Mat(sr.coeffs[k]));
                    }
                    report.coeff_checksum ^= coeff_crc(sr.coeffs);
                }
            }
            record("spod_pg", mean_error(approx, refs, *err_weight),
                   wall / refs.size() / report.fom_seconds);
            push_curve("spod_pg", error_vs_time(approx, refs, *err_weight));
        }

        if (cfg.deim && cfg.wants("spod_pg")) {
            DeimBundle deim = build_deim(bundle, basis, blocks, built.sys, built.weight,
                                         cfg.deim_pd, cfg.pinv_cut);
            log << "  deim: p_d = " << deim.p_d << ", max condition "
                << deim.max_condition << "\n";
            std::vector<Mat> approx(refs.size());
            double wall = 0.0;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                SolveReport sr =
                    online_deim(bundle, deim, test_ics[i], test_forcings[i], true);
                wall += sr.online_seconds();
                approx[i] = sr.state;
            }
            record("spod_pg_deim", mean_error(approx, refs, *err_weight),
                   wall / refs.size() / report.fom_seconds);
            push_curve("spod_pg_deim", error_vs_time(approx, refs, *err_weight));
        }

        if (cfg.wants("pod_g")) {
            PodGalerkinRom rom = pod_galerkin(built.sys, built.weight, state_pod, r);
            std::vector<Mat> approx(refs.size());
            double wall = 0.0;
            for (std::size_t i = 0; i < refs.size(); ++i) {
                auto t0 = std::chrono::steady_clock::now();
                Trajectory t = pod_galerkin_solve(rom, built.weight, test_ics[i],
                                                  test_forcings[i], grid,
                                                  {cfg.fom_rtol, cfg.fom_atol, 0, 0.0});
                wall += wall_seconds(t0);
                approx[i] = std::move(t.states);
            }
            record("pod_g", mean_error(approx, refs, *err_weight),
                   wall / refs.size() / report.fom_seconds);
            push_curve("pod_g", error_vs_time(approx, refs, *err_weight));
        }

        if (cfg.wants("bt")) {
            if (built.sys.storage() != StorageKind::Dense) {
                log << "  bt: skipped (sparse system)\n";
            } else {
                BalancedTruncationRom rom = balanced_truncation(
                    built.sys, built.weight, train_sampler.stationary_covariance(), r);
                std::vector<Mat> approx(refs.size());
                double wall = 0.0;
                for (std::size_t i = 0; i < refs.size(); ++i) {
                    auto t0 = std::chrono::steady_clock::now();
                    Trajectory t = balanced_truncation_solve(
                        rom, test_ics[i], test_forcings[i], grid,
                        {cfg.fom_rtol, cfg.fom_atol, 0, 0.0});
                    wall += wall_seconds(t0);
                    approx[i] = std::move(t.states);
                }
                record("bt", mean_error(approx, refs, *err_weight),
                       wall / refs.size() / report.fom_seconds);
                push_curve("bt", error_vs_time(approx, refs, *err_weight));
            }
        }

        // Representation (projection) errors: the floor of each mode set.
        {
            auto r_k = retention(basis, r);
            double spod_proj = projection_error_spod(basis, r_k, *err_weight, refs);
            record("spod_proj", spod_proj, 0.0);
            double pod_proj = projection_error_pod(
                state_pod.modes.leftCols(std::min<int>(r, state_pod.modes.cols())),
                *err_weight, refs);
            record("pod_proj", pod_proj, 0.0);
        }
    }

    {
        StageLog s(log, "reports");
        io::write_csv(out_dir / "error_vs_modes.csv",
                      {"method", "r", "mean_error", "cpu_fraction"}, sweep_rows,
                      sweep_labels);
        if (!report.time_curves.empty()) {
            std::vector<std::string> cols = {"t"};
            for (const auto& m : report.time_methods) cols.push_back("err_" + m);
            std::vector<std::vector<double>> rows;
            for (int j = 0; j < cfg.n_omega; ++j) {
                std::vector<double> row = {report.times(j)};
                for (const auto& curve : report.time_curves) row.push_back(curve(j));
                rows.push_back(std::move(row));
            }
            io::write_csv(out_dir / "error_vs_time.csv", cols, rows);
        }
        if (!report.retained_counts.empty()) {
            std::vector<std::vector<double>> rows;
            for (int k = 0; k < cfg.n_omega; ++k)
                rows.push_back({static_cast<double>(k), grid.omega_signed(k),
                                static_cast<double>(report.retained_counts[
                                    static_cast<std::size_t>(k)])});
            io::write_csv(out_dir / "retention.csv", {"k", "omega", "r_k"}, rows);
        }
    }
    return report;
}

}  // namespace sprom
