// Acceptance suite: one pass/fail line per criterion, exit code equal to the
// number of failures. Criteria sharing a data pipeline (the desk-scale
// benchmark set) can be grouped into one invocation:
//
//   sprom_acceptance 1 2 3          run criteria 1-3
//   sprom_acceptance all            run everything

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "sprom/baselines.hpp"
#include "sprom/benchmarks.hpp"
#include "sprom/fft.hpp"
#include "sprom/freq_solver.hpp"
#include "sprom/io.hpp"
#include "sprom/rng.hpp"

using namespace sprom;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": "
              << detail << std::endl;
    if (!pass) ++g_failures;
}

Mat random_complex(int rows, int cols, Philox& rng) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.next_cgaussian();
    return m;
}

Vec random_cvec(int n, Philox& rng) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_cgaussian();
    return v;
}

LtiSystem random_stable_system(int nx, int nf, Philox& rng, double margin = 0.3) {
    Mat a = random_complex(nx, nx, rng);
    Eigen::ComplexEigenSolver<Mat> eig(a, false);
    a.diagonal().array() -= eig.eigenvalues().real().maxCoeff() + margin;
    return LtiSystem(LinOp(a), LinOp(random_complex(nx, nf, rng)),
                     LinOp::identity_dense(nx));
}

ForcingSignal forcing_from_spectrum(Mat spectrum, double dt) {
    ForcingSignal f;
    f.samples = fft::inverse(spectrum);
    f.spectrum = std::move(spectrum);
    f.dt = dt;
    return f;
}

double now_minus(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: frequency-domain identity suite on random stable systems.

void criterion_1() {
    Philox rng(1001, 0);
    double worst_opsum = 0.0, worst_geo = 0.0, worst_deriv = 0.0, worst_pg = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int nx = 4 + static_cast<int>(rng.next_double() * 28);  // <= 32
        int n = trial % 2 == 0 ? 16 : 64;
        FrequencyGrid grid{n, 0.3};
        LtiSystem sys = random_stable_system(nx, nx, rng);

        CorrectionOperators corr(sys, grid);
        Mat acc = Mat::Zero(nx, nx);
        for (int k = 0; k < n; ++k) acc += corr.dk_g(k);
        worst_opsum = std::max(
            worst_opsum, (acc - double(n) * Mat::Identity(nx, nx)).norm() /
                             (double(n) * std::sqrt(double(nx))));

        Mat m = 0.8 / std::sqrt(double(nx)) * random_complex(nx, nx, rng);
        Mat brute = Mat::Zero(nx, nx);
        Mat term = Mat::Identity(nx, nx);
        for (int j = 0; j < 48; ++j) {
            brute += term;
            term = term * m;
        }
        worst_geo = std::max(worst_geo,
                             (geometric_sum(m, 48) - brute).norm() / brute.norm());

        BandLimitedSynthesis synth;
        synth.coeffs = Mat::Zero(nx, n);
        for (int l : {1, n / 4, n / 2, n - 1})
            synth.coeffs.col(l) = random_cvec(nx, rng);
        synth.ramp_slope = random_cvec(nx, rng);
        worst_deriv = std::max(
            worst_deriv, derivative_dft_check(synth, grid) / synth.coeffs.norm());

        RealVec wd(nx);
        for (int i = 0; i < nx; ++i) wd(i) = 0.2 + 2.0 * rng.next_double();
        Weight w(wd);
        int mth = std::max(2, nx / 3);
        Eigen::HouseholderQR<Mat> qr(w.apply_sqrt(random_complex(nx, mth, rng)));
        Mat psi = w.apply_inv_sqrt(Mat(qr.householderQ() * Mat::Identity(nx, mth)));
        ResolventCache res(sys, grid);
        for (int k : {0, n / 2, n - 1}) {
            Mat lk_psi = kI * grid.omega(k) * psi - sys.A().apply(psi);
            Mat pg = psi.adjoint() * w.apply(res.solve(k, lk_psi));
            worst_pg = std::max(worst_pg, (pg - Mat::Identity(mth, mth)).norm());
        }
    }
    std::ostringstream os;
    os << "identity suite on 20 random systems: operator-sum " << worst_opsum
       << " (tol 1e-10), geometric-sum " << worst_geo << " (tol 1e-11), derivative-DFT "
       << worst_deriv << " (tol 1e-8), Petrov-Galerkin " << worst_pg << " (tol 1e-10)";
    report(1, worst_opsum <= 1e-10 && worst_geo <= 1e-11 && worst_deriv <= 1e-8 &&
                  worst_pg <= 1e-10,
           os.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: corrected vs uncorrected on the stable Ginzburg-Landau system.

void criterion_2() {
    GinzburgLandauSpec spec;
    spec.nx = 64;  // CI-scale collocation, full physics
    GlSystem gl = build_gl(spec);
    const int n = 256;
    FrequencyGrid grid{n, 0.2};
    Philox rng(1002, 0);

    // Retained-frequency forcing (low one-sided band) with the in-sync IC.
    Mat fhat = Mat::Zero(spec.nx, n);
    for (int l = 0; l <= 40; ++l) fhat.col(l) = 0.3 * random_cvec(spec.nx, rng);
    Vec sync = in_sync_ic(gl.sys, fhat, grid);
    ForcingSignal f = forcing_from_spectrum(fhat, grid.dt);

    Trajectory fom = integrate(gl.sys, sync, f, grid, {1e-12, 1e-14, 0, 0.0});
    Mat corrected = fft::inverse(corrected_spectrum(gl.sys, sync, fhat, grid));
    double rel = (corrected - fom.states).norm() / fom.states.norm();
    report(2, rel <= 1e-9,
           "corrected solution vs FOM with in-sync IC and retained-frequency "
           "forcing: relative error " +
               std::to_string(rel) + " (tol 1e-9)");

    // Generic IC: the uncorrected solution misses the transient, whose decay
    // rate is the rightmost eigenvalue.
    Vec q0 = random_cvec(spec.nx, rng);
    q0 *= std::sqrt(gl.weight.squared_norm(sync) / gl.weight.squared_norm(q0));
    Trajectory fom2 = integrate(gl.sys, q0, f, grid, {1e-11, 1e-13, 0, 0.0});
    Mat naive = fft::inverse(uncorrected_spectrum(gl.sys, fhat, grid));
    RealVec err(n);
    for (int j = 0; j < n; ++j)
        err(j) = std::sqrt(gl.weight.squared_norm(Vec(naive.col(j) - fom2.states.col(j))));
    double scale0 = std::sqrt(gl.weight.squared_norm(Vec(fom2.states.col(0))));
    bool order_one = err(0) / scale0 > 0.05;

    // Log-slope over the late window, before any floor.
    int j0 = n / 2, j1 = static_cast<int>(0.95 * n);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int j = j0; j < j1; ++j) {
        double t = j * grid.dt, y = std::log(err(j));
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++count;
    }
    double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    double expected = gl.sys.stability_margin();
    double slope_err = std::abs(slope - expected) / std::abs(expected);
    std::ostringstream os;
    os << "uncorrected transient: error(0)/||q(0)|| = " << err(0) / scale0
       << " (O(1) check > 0.05), fitted decay rate " << slope << " vs rightmost "
       << expected << " (rel dev " << slope_err << ", tol 0.20)";
    report(2, order_one && slope_err <= 0.20, os.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: corrected_spectrum equals the brute-force reference.

void criterion_3() {
    Philox rng(1003, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        int nx = 4 + static_cast<int>(rng.next_double() * 28);
        int n = trial % 2 == 0 ? 16 : 32;
        FrequencyGrid grid{n, 0.35};
        LtiSystem sys = random_stable_system(nx, std::max(1, nx / 2), rng);
        Mat fhat = random_complex(sys.nf(), n, rng);
        Vec q0 = random_cvec(nx, rng);
        Mat got = corrected_spectrum(sys, q0, fhat, grid);
        Mat expected = analytic_dft_reference(sys, q0, fhat, grid);
        worst = std::max(worst, (got - expected).norm() / expected.norm());
    }
    report(3, worst <= 1e-9,
           "corrected spectrum vs brute-force exact-solution DFT on 10 random "
           "systems: worst relative deviation " +
               std::to_string(worst) + " (tol 1e-9)");
}

// ---------------------------------------------------------------------------
// Desk-scale Ginzburg-Landau pipeline shared by criteria 4, 5, 7, 9.

struct DeskGl {
    GlSystem gl;
    FrequencyGrid grid{256, 0.2};
    BlockedSpectra blocks;
    SpodBasisSet basis;
    PodBasis state_pod;
    std::vector<Trajectory> refs;
    std::vector<ForcingSignal> test_forcings;
    std::vector<Vec> test_ics;
    double fom_seconds = 0.0;
    std::optional<ForcingSampler> sampler;
};

DeskGl& desk_gl() {
    static DeskGl desk;
    static bool built = false;
    if (built) return desk;
    built = true;
    auto t_start = std::chrono::steady_clock::now();

    GinzburgLandauSpec spec;  // full N_x = 220
    desk.gl = build_gl(spec);
    const int nx = spec.nx;

    ForcingSpec fspec;
    fspec.kind = ForcingSpec::Kind::WhiteInTime;
    fspec.spatial.xi = 10.0;
    fspec.one_sided = true;
    fspec.seed = 515;
    desk.sampler.emplace(fspec, desk.gl.points, desk.grid);

    ForcingSignal train = desk.sampler->sample(0, 2000);
    Trajectory training = integrate(desk.gl.sys, Vec::Zero(nx), train, desk.grid,
                                    {1e-8, 1e-10, 8, 0.0});
    desk.blocks = segment_blocks(training, 256, 0.875);  // 56 blocks
    desk.basis = spod(desk.blocks, desk.gl.weight);
    desk.state_pod = pod(desk.blocks.snapshots, desk.gl.weight);

    const int n_test = 20;
    desk.refs.resize(n_test);
    desk.test_forcings.resize(n_test);
    desk.test_ics.resize(n_test);
    parallel_for(n_test, [&](std::size_t i) {
        ForcingSignal burn = desk.sampler->sample(1000 + 2 * static_cast<int>(i));
        Trajectory warm =
            integrate(desk.gl.sys, Vec::Zero(nx), burn, desk.grid, {1e-8, 1e-10, 0, 0.0});
        desk.test_ics[i] = warm.states.col(warm.nt() - 1);
        desk.test_forcings[i] = desk.sampler->sample(1001 + 2 * static_cast<int>(i));
        desk.refs[i] = integrate(desk.gl.sys, desk.test_ics[i], desk.test_forcings[i],
                                 desk.grid, {1e-8, 1e-10, 0, 0.0});
    });
    // Wall-clock FOM reference, median of three sequential runs.
    std::vector<double> times;
    for (int rep = 0; rep < 3; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        integrate(desk.gl.sys, desk.test_ics[0], desk.test_forcings[0], desk.grid,
                  {1e-8, 1e-10, 0, 0.0});
        times.push_back(now_minus(t0));
    }
    std::sort(times.begin(), times.end());
    desk.fom_seconds = times[1];
    std::cout << "  [desk-gl] pipeline built in " << now_minus(t_start) << " s, "
              << desk.blocks.r_d << " blocks, FOM " << desk.fom_seconds
              << " s per trajectory" << std::endl;
    return desk;
}

struct DeskSolve {
    double mean_err = 0.0;
    double online_seconds = 0.0;  // mean per trajectory
};

DeskSolve desk_solve_spod(DeskGl& desk, int r) {
    RomOptions opts;
    opts.r = r;
    RomOperatorBundle bundle =
        offline_from_basis(desk.basis, desk.blocks, desk.gl.sys, desk.gl.weight, opts);
    std::vector<Mat> approx(desk.refs.size());
    double wall = 0.0;
    for (std::size_t i = 0; i < desk.refs.size(); ++i) {
        SolveReport sr = online(bundle, desk.test_ics[i], desk.test_forcings[i], true);
        wall += sr.online_seconds();
        approx[i] = sr.state;
    }
    return {mean_error(approx, desk.refs, desk.gl.weight),
            wall / static_cast<double>(desk.refs.size())};
}

void criterion_4() {
    DeskGl& desk = desk_gl();
    auto t0 = std::chrono::steady_clock::now();
    DeskSolve spod_pg = desk_solve_spod(desk, 10);

    PodGalerkinRom pg = pod_galerkin(desk.gl.sys, desk.gl.weight, desk.state_pod, 10);
    std::vector<Mat> pg_states(desk.refs.size());
    for (std::size_t i = 0; i < desk.refs.size(); ++i)
        pg_states[i] = pod_galerkin_solve(pg, desk.gl.weight, desk.test_ics[i],
                                          desk.test_forcings[i], desk.grid)
                           .states;
    double pg_err = mean_error(pg_states, desk.refs, desk.gl.weight);

    BalancedTruncationRom bt = balanced_truncation(
        desk.gl.sys, desk.gl.weight, desk.sampler->stationary_covariance(), 10);
    std::vector<Mat> bt_states(desk.refs.size());
    for (std::size_t i = 0; i < desk.refs.size(); ++i)
        bt_states[i] = balanced_truncation_solve(bt, desk.test_ics[i],
                                                 desk.test_forcings[i], desk.grid)
                           .states;
    double bt_err = mean_error(bt_states, desk.refs, desk.gl.weight);

    double pod_proj = projection_error_pod(desk.state_pod.modes.leftCols(10),
                                           desk.gl.weight, desk.refs);
    std::ostringstream os;
    os << "desk GL r=10: spod-pg " << spod_pg.mean_err << ", pod-g " << pg_err
       << " (ratio " << spod_pg.mean_err / pg_err << ", need <= 0.1), bt " << bt_err
       << " (ratio " << spod_pg.mean_err / bt_err
       << ", need <= 0.1), pod projection bound " << pod_proj << " (need spod <= bound); "
       << now_minus(t0) << " s";
    report(4, spod_pg.mean_err <= 0.1 * pg_err && spod_pg.mean_err <= 0.1 * bt_err &&
                  spod_pg.mean_err <= pod_proj,
           os.str());
}

void criterion_5() {
    DeskGl& desk = desk_gl();
    bool all_pass = true;
    std::ostringstream os;
    os << "solution error vs SPOD representation error:";
    for (int r : {2, 6, 10}) {
        DeskSolve sol = desk_solve_spod(desk, r);
        auto r_k = retention(desk.basis, r);
        double proj = projection_error_spod(desk.basis, r_k, desk.gl.weight, desk.refs);
        // Escape hatch at the full-order frequency-domain floor.
        bool pass = sol.mean_err <= 2.0 * proj || sol.mean_err <= 1e-6;
        all_pass &= pass;
        os << " [r=" << r << ": " << sol.mean_err << " vs " << proj << " (x"
           << sol.mean_err / proj << ")]";
    }
    os << " (need <= 2x or below the 1e-6 floor)";
    report(5, all_pass, os.str());
}

void criterion_7() {
    DeskGl& desk = desk_gl();
    const int r = 10;
    auto r_k = retention(desk.basis, r);
    long total = 0;
    for (int c : r_k) total += c;

    // Dominant frequency: the largest leading energy.
    int dominant = 0;
    double best = -1.0;
    for (int k = 0; k < desk.grid.n_omega; ++k) {
        if (desk.basis.energies[static_cast<std::size_t>(k)](0) > best) {
            best = desk.basis.energies[static_cast<std::size_t>(k)](0);
            dominant = k;
        }
    }
    int near_nyquist = std::max(r_k[static_cast<std::size_t>(desk.grid.n_omega / 2 - 1)],
                                r_k[static_cast<std::size_t>(desk.grid.n_omega / 2 + 1)]);
    std::ostringstream os;
    os << "retention at r=10: dominant frequency k=" << dominant << " retains "
       << r_k[static_cast<std::size_t>(dominant)] << " (> 10), near-Nyquist retains "
       << near_nyquist << " (< 10), sum r_k = " << total << " (= " << 256 * r << ")";
    report(7, r_k[static_cast<std::size_t>(dominant)] > r && near_nyquist < r &&
                  total == 256L * r,
           os.str());
}

void criterion_9() {
    DeskGl& desk = desk_gl();
    std::vector<int> rs = {2, 6, 10, 14, 20};
    std::vector<double> times;
    double t_at_20 = 0.0;
    for (int r : rs) {
        // Median of three sweeps over the test set.
        std::vector<double> reps;
        for (int rep = 0; rep < 3; ++rep) reps.push_back(desk_solve_spod(desk, r).online_seconds);
        std::sort(reps.begin(), reps.end());
        times.push_back(reps[1]);
        if (r == 20) t_at_20 = reps[1];
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        sx += rs[i];
        sy += times[i];
        sxx += double(rs[i]) * rs[i];
        sxy += rs[i] * times[i];
    }
    double npts = static_cast<double>(rs.size());
    double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    double mean_t = sy / npts;
    // Nonnegative slope up to timing noise (constant-dominated plateaus pass).
    bool slope_ok = slope >= -0.05 * mean_t / (rs.back() - rs.front());
    double ratio = t_at_20 / desk.fom_seconds;
    std::ostringstream os;
    os << "online wall time at r=20: " << t_at_20 << " s vs FOM " << desk.fom_seconds
       << " s (fraction " << ratio << ", need <= 1/50); affine fit slope " << slope
       << " s/mode over r in {2..20} (need nonnegative within noise)";
    report(9, ratio <= 1.0 / 50.0 && slope_ok, os.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: DOF counts for 98% accuracy, small GL, long window.

void criterion_6() {
    GinzburgLandauSpec spec;
    spec.nx = 32;
    GlSystem gl = build_gl(spec);
    const int nx = spec.nx;
    const double dt = 0.5;

    ForcingSpec fspec;
    fspec.kind = ForcingSpec::Kind::WhiteInTime;
    fspec.spatial.xi = 10.0 * gl.x(nx - 1) / 85.0;
    fspec.one_sided = true;
    fspec.seed = 66;

    std::vector<int> windows = {32, 64, 128, 256};
    std::ostringstream os;
    bool pass = false;
    os << "DOFs for 98% captured energy:";
    for (int n : windows) {
        FrequencyGrid grid{n, dt};
        ForcingSampler sampler(fspec, gl.points, grid);
        const int n_traj = 128;
        std::vector<Trajectory> ens(n_traj);
        parallel_for(n_traj, [&](std::size_t i) {
            ForcingSignal burn = sampler.sample(2 * static_cast<int>(i));
            Trajectory warm = integrate(gl.sys, Vec::Zero(nx), burn, grid);
            ens[i] = integrate(gl.sys, warm.states.col(n - 1),
                               sampler.sample(2 * static_cast<int>(i) + 1), grid);
        });
        // Per-frequency realizations straight from the trajectory ensemble.
        BlockedSpectra blocks;
        blocks.grid = grid;
        blocks.r_d = n_traj;
        blocks.stride = n;
        blocks.qhat.assign(n, Mat(nx, n_traj));
        Mat pooled(nx, n_traj * 8);
        for (int i = 0; i < n_traj; ++i) {
            Mat qhat = fft::forward(ens[static_cast<std::size_t>(i)].states);
            for (int k = 0; k < n; ++k) blocks.qhat[static_cast<std::size_t>(k)].col(i) = qhat.col(k);
            for (int s = 0; s < 8; ++s)
                pooled.col(8 * i + s) = ens[static_cast<std::size_t>(i)].states.col(s * (n / 8));
        }
        SpodBasisSet basis = spod(blocks, gl.weight);
        SpaceTimePod st = spacetime_pod(ens, gl.weight);
        PodBasis space_pod = pod(pooled, gl.weight);

        int d_spod = spod_dofs(basis, 0.98);
        int d_st = spacetime_dofs(st, 0.98);
        int d_pod = pod_dofs(space_pod, 0.98, n);
        os << " [T=" << n * dt << ": spod " << d_spod << ", space-time " << d_st
           << ", pod " << d_pod << "]";
        if (n == windows.back())
            pass = d_spod <= 1.2 * d_st && d_pod >= 10 * d_spod;
    }
    os << " (at the longest T: spod <= 1.2 x space-time and pod >= 10 x spod)";
    report(6, pass, os.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: scalar-transport property checks (substituted velocity field).

void criterion_8() {
    auto t_start = std::chrono::steady_clock::now();
    ScalarTransportSpec spec;
    spec.n = 48;  // CI grid
    StSystem st = build_scalar_transport(spec);
    const int nx = st.sys.nx();
    FrequencyGrid grid{128, 0.5};

    ForcingSpec fspec;
    fspec.kind = ForcingSpec::Kind::GaussianInTime;
    fspec.tau = spec.tau;
    fspec.spatial.xi = spec.xi;
    fspec.spatial.envelope = true;
    fspec.spatial.l = spec.l;
    fspec.spatial.xbar = RealVec(2);
    fspec.spatial.xbar << spec.xbar_x, spec.xbar_y;
    fspec.real_valued = true;
    fspec.seed = 88;
    ForcingSampler sampler(fspec, st.forced_points, grid);

    ForcingSignal train = sampler.sample(0, 6000);
    Trajectory training =
        integrate(st.sys, Vec::Zero(nx), train, grid, {1e-8, 1e-10, 8, 0.0});
    BlockedSpectra blocks = segment_blocks(training, 128, 0.5);
    SpodBasisSet basis = spod(blocks, st.weight);
    PodBasis state_pod = pod(blocks.snapshots, st.weight);

    const int n_test = 16;
    std::vector<Trajectory> refs(n_test);
    std::vector<ForcingSignal> test_f(n_test);
    std::vector<Vec> test_ic(n_test);
    parallel_for(n_test, [&](std::size_t i) {
        ForcingSignal burn = sampler.sample(500 + 2 * static_cast<int>(i));
        Trajectory warm = integrate(st.sys, Vec::Zero(nx), burn, grid, {1e-8, 1e-10, 0, 0.0});
        test_ic[i] = warm.states.col(warm.nt() - 1);
        test_f[i] = sampler.sample(501 + 2 * static_cast<int>(i));
        refs[i] = integrate(st.sys, test_ic[i], test_f[i], grid, {1e-8, 1e-10, 0, 0.0});
    });

    RomOptions opts;
    opts.r = 10;
    opts.p = 50;  // intermediary basis
    RomOperatorBundle bundle =
        offline_from_basis(basis, blocks, st.sys, st.weight, opts);
    DeimBundle deim = build_deim(bundle, basis, blocks, st.sys, st.weight, 200);

    std::vector<Mat> spod_states(n_test), deim_states(n_test), pg_states(n_test);
    double wall_full = 0.0, wall_deim = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
        double wf = 0.0, wd = 0.0;
        for (int i = 0; i < n_test; ++i) {
            SolveReport full = online(bundle, test_ic[static_cast<std::size_t>(i)],
                                      test_f[static_cast<std::size_t>(i)], true);
            SolveReport sparse =
                online_deim(bundle, deim, test_ic[static_cast<std::size_t>(i)],
                            test_f[static_cast<std::size_t>(i)], true);
            wf += full.online_seconds();
            wd += sparse.online_seconds();
            if (rep == 0) {
                spod_states[static_cast<std::size_t>(i)] = full.state;
                deim_states[static_cast<std::size_t>(i)] = sparse.state;
            }
        }
        if (rep == 0) {
            wall_full = wf;
            wall_deim = wd;
        } else {
            wall_full = std::min(wall_full, wf);
            wall_deim = std::min(wall_deim, wd);
        }
    }

    PodGalerkinRom pg = pod_galerkin(st.sys, st.weight, state_pod, 10);
    for (int i = 0; i < n_test; ++i)
        pg_states[static_cast<std::size_t>(i)] =
            pod_galerkin_solve(pg, st.weight, test_ic[static_cast<std::size_t>(i)],
                               test_f[static_cast<std::size_t>(i)], grid)
                .states;

    double spod_err = mean_error(spod_states, refs, st.weight);
    double deim_err = mean_error(deim_states, refs, st.weight);
    double pg_err = mean_error(pg_states, refs, st.weight);
    double pod_proj =
        projection_error_pod(state_pod.modes.leftCols(10), st.weight, refs);

    bool errors_ok = spod_err <= 0.1 * pg_err && spod_err <= pod_proj;
    bool deim_ok = std::abs(deim_err - spod_err) <= 0.1 * spod_err;
    bool timing_ok = wall_deim < wall_full;
    std::ostringstream os;
    os << "scalar transport 48x48 (N_f = " << st.sys.nf() << ", " << blocks.r_d
       << " blocks) r=10: spod-pg " << spod_err << ", pod-g " << pg_err << " (ratio "
       << spod_err / pg_err << ", need <= 0.1), pod projection " << pod_proj
       << "; deim p_d=" << deim.p_d << " error " << deim_err << " (dev "
       << std::abs(deim_err - spod_err) / spod_err << ", need <= 0.1), online "
       << wall_deim << " s vs " << wall_full << " s (need faster); total "
       << now_minus(t_start) << " s";
    report(8, errors_ok && deim_ok && timing_ok, os.str());
}

// ---------------------------------------------------------------------------
// Criterion 10: byte-identical coefficient containers across reruns.

void criterion_10() {
    io::RunConfig cfg;
    cfg.system_kind = "gl";
    cfg.nx = 64;
    cfg.n_omega = 64;
    cfg.dt = 0.2;
    cfg.n_train = 600;
    cfg.overlap = 0.75;
    cfg.r = 4;
    cfg.n_test = 3;
    cfg.xi = 10.0;
    cfg.seed = 4242;
    cfg.test_seed = 777;
    cfg.methods = "spod_pg";

    fs::path base = fs::temp_directory_path() / "sprom_acceptance_repro";
    fs::remove_all(base);
    std::ostringstream devnull;
    std::array<fs::path, 2> outs = {base / "a", base / "b"};
    for (const auto& out : outs) {
        io::RunConfig run = cfg;
        run.out_dir = out.string();
        run_experiment(run, devnull);
    }

    bool identical = true;
    int compared = 0;
    for (int i = 0; i < cfg.n_test; ++i) {
        fs::path da = outs[0] / ("coeffs_spod_pg_" + std::to_string(i));
        fs::path db = outs[1] / ("coeffs_spod_pg_" + std::to_string(i));
        for (const auto& entry : fs::directory_iterator(da)) {
            std::ifstream fa(entry.path(), std::ios::binary);
            std::ifstream fb(db / entry.path().filename(), std::ios::binary);
            std::string sa((std::istreambuf_iterator<char>(fa)), {});
            std::string sb((std::istreambuf_iterator<char>(fb)), {});
            identical &= !sa.empty() && sa == sb;
            ++compared;
        }
    }
    fs::remove_all(base);
    report(10, identical && compared > 0,
           "re-running the benchmark with identical seeds: " + std::to_string(compared) +
               " coefficient containers compared byte-for-byte, identical = " +
               (identical ? std::string("yes") : std::string("no")));
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    bool all = argc <= 1;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "all") {
            all = true;
        } else {
            wanted.insert(std::atoi(argv[i]));
        }
    }
    auto want = [&](int c) { return all || wanted.count(c) > 0; };

    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
    if (want(10)) criterion_10();
    return g_failures;
}
