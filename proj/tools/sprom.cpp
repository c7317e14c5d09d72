// Command-line front end: data generation, mode computation, offline ROM
// builds, online solves, full benchmark runs, and the identity verification
// suite.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sprom/benchmarks.hpp"
#include "sprom/fft.hpp"
#include "sprom/freq_solver.hpp"
#include "sprom/io.hpp"
#include "sprom/rng.hpp"

namespace fs = std::filesystem;
using namespace sprom;

namespace {

struct VerifyCheck {
    std::string name;
    double value;
    double tolerance;
    bool pass() const { return value <= tolerance; }
};

Mat random_complex(int rows, int cols, Philox& rng) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.next_cgaussian();
    return m;
}

int run_verify(int nx, int n_omega, std::uint64_t seed) {
    Philox rng(seed, 0);
    Mat a = random_complex(nx, nx, rng);
    {
        Eigen::ComplexEigenSolver<Mat> eig(a, false);
        a.diagonal().array() -= eig.eigenvalues().real().maxCoeff() + 0.3;
    }
    LtiSystem sys(LinOp(a), LinOp::identity_dense(nx), LinOp::identity_dense(nx));
    FrequencyGrid grid{n_omega, 0.3};
    std::vector<VerifyCheck> checks;

    {
        CorrectionOperators corr(sys, grid);
        Mat acc = Mat::Zero(nx, nx);
        for (int k = 0; k < n_omega; ++k) acc += corr.dk_g(k);
        double resid =
            (acc - static_cast<double>(n_omega) * Mat::Identity(nx, nx)).norm() /
            (n_omega * std::sqrt(static_cast<double>(nx)));
        checks.push_back({"operator-sum identity (sum_k D_k G = N I)", resid, 1e-10});
    }
    {
        Mat m = 0.8 / std::sqrt(static_cast<double>(nx)) * random_complex(nx, nx, rng);
        Mat brute = Mat::Zero(nx, nx);
        Mat term = Mat::Identity(nx, nx);
        for (int j = 0; j < 64; ++j) {
            brute += term;
            term = term * m;
        }
        double resid = (geometric_sum(m, 64) - brute).norm() / brute.norm();
        checks.push_back({"geometric sum closed form", resid, 1e-11});
    }
    {
        BandLimitedSynthesis synth;
        synth.coeffs = Mat::Zero(nx, n_omega);
        for (int l : {1, 2, n_omega / 4, n_omega - 2})
            synth.coeffs.col(l) = random_complex(nx, 1, rng);
        synth.ramp_slope = random_complex(nx, 1, rng);
        double resid = derivative_dft_check(synth, grid) / synth.coeffs.norm();
        checks.push_back({"derivative-DFT identity", resid, 1e-8});
    }
    {
        RealVec wd(nx);
        for (int i = 0; i < nx; ++i) wd(i) = 0.2 + 2.0 * rng.next_double();
        Weight w(wd);
        const int m = std::max(2, nx / 3);
        Mat x = random_complex(nx, m, rng);
        Eigen::HouseholderQR<Mat> qr(w.apply_sqrt(x));
        Mat psi = w.apply_inv_sqrt(Mat(qr.householderQ() * Mat::Identity(nx, m)));
        ResolventCache res(sys, grid);
        double worst = 0.0;
        for (int k : {0, n_omega / 3, n_omega - 1}) {
            Mat lk_psi = kI * grid.omega(k) * psi - sys.A().apply(psi);
            Mat pg = psi.adjoint() * w.apply(res.solve(k, lk_psi));
            worst = std::max(worst, (pg - Mat::Identity(m, m)).norm());
        }
        checks.push_back({"Petrov-Galerkin identity (Psi* W R L Psi = I)", worst, 1e-10});
    }

    bool all_pass = true;
    for (const auto& c : checks) {
        all_pass &= c.pass();
        std::cout << (c.pass() ? "PASS" : "FAIL") << "  " << c.name << ": " << c.value
                  << " (tol " << c.tolerance << ")\n";
    }
    return all_pass ? 0 : 2;
}

BlockedSpectra blocks_from_config(const io::RunConfig& cfg, const Trajectory& traj) {
    WindowKind window = cfg.window == "hann" ? WindowKind::Hann : WindowKind::None;
    return segment_blocks(traj, cfg.n_omega, cfg.overlap, window, cfg.n_blocks,
                          cfg.snapshot_cap);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPOD Petrov-Galerkin model reduction for forced LTI systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", data_dir, bundle_dir;
    std::string forcing_path, q0_path, report_dir = "report";
    int override_r = -1;
    int verify_nx = 16, verify_n_omega = 64;
    std::uint64_t verify_seed = 2024;

    auto* gen = app.add_subcommand("generate-data",
                                   "Integrate the full-order training trajectory");
    gen->add_option("--config", config_path, "run configuration file")->required();
    gen->add_option("--out", out_dir, "output directory");

    auto* modes = app.add_subcommand("compute-modes",
                                     "Welch segmentation and SPOD of a trajectory");
    modes->add_option("--config", config_path)->required();
    modes->add_option("--data", data_dir, "directory holding training/")->required();
    modes->add_option("--out", out_dir);

    auto* build = app.add_subcommand("build-rom", "Offline operator precomputation");
    build->add_option("--config", config_path)->required();
    build->add_option("--data", data_dir)->required();
    build->add_option("--out", out_dir);
    build->add_option("--r", override_r, "override the retained mode count");

    auto* solve = app.add_subcommand("solve", "Online solve from a stored bundle");
    solve->add_option("--bundle", bundle_dir)->required();
    solve->add_option("--forcing", forcing_path, "forcing samples container")->required();
    solve->add_option("--q0", q0_path, "initial state container");
    solve->add_option("--out", report_dir);

    auto* bench = app.add_subcommand("benchmark", "Full experiment driver");
    bench->add_option("--config", config_path)->required();
    bench->add_option("--r", override_r, "override the retained mode count");
    bench->add_option("--out", out_dir, "override the configured output directory");

    auto* verify = app.add_subcommand("verify", "Frequency-domain identity suite");
    verify->add_option("--nx", verify_nx);
    verify->add_option("--n-omega", verify_n_omega);
    verify->add_option("--seed", verify_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) return run_verify(verify_nx, verify_n_omega, verify_seed);

        if (*gen) {
            auto cfg = io::load_config(config_path);
            BuiltSystem built = build_system(cfg);
            FrequencyGrid grid{cfg.n_omega, cfg.dt};
            ForcingSampler sampler(forcing_spec(cfg, built.real_forcing, cfg.seed),
                                   built.forcing_points, grid);
            std::cerr << "[generate-data] " << cfg.system_kind << ", " << cfg.n_train
                      << " training steps\n";
            ForcingSignal f = sampler.sample(0, cfg.n_train);
            Trajectory traj =
                integrate(built.sys, Vec::Zero(built.sys.nx()), f, grid,
                          {cfg.fom_rtol, cfg.fom_atol, cfg.fom_oversample, 0.0});
            io::save_trajectory(fs::path(out_dir) / "training", traj);
            std::ofstream manifest(fs::path(out_dir) / "manifest.cfg");
            manifest << io::serialize_config(cfg);
            return 0;
        }

        if (*modes) {
            auto cfg = io::load_config(config_path);
            BuiltSystem built = build_system(cfg);
            Trajectory traj = io::load_trajectory(fs::path(data_dir) / "training");
            BlockedSpectra blocks = blocks_from_config(cfg, traj);
            std::cerr << "[compute-modes] " << blocks.r_d << " blocks, stride "
                      << blocks.stride << "\n";
            SpodBasisSet basis = spod(blocks, built.weight);
            io::save_basis(fs::path(out_dir) / "basis", basis);
            return 0;
        }

        if (*build) {
            auto cfg = io::load_config(config_path);
            BuiltSystem built = build_system(cfg);
            Trajectory traj = io::load_trajectory(fs::path(data_dir) / "training");
            BlockedSpectra blocks = blocks_from_config(cfg, traj);
            RomOptions opts;
            opts.r = override_r > 0 ? override_r : cfg.r;
            opts.r_d = cfg.r_d;
            opts.p = cfg.p;
            opts.exact_e = cfg.exact_e;
            opts.pinv_cut = cfg.pinv_cut;
            RomOperatorBundle bundle = offline(blocks, built.sys, built.weight, opts);
            bundle.seed = cfg.seed;
            io::save_bundle(fs::path(out_dir) / "bundle", bundle);
            std::cerr << "[build-rom] bundle written to " << out_dir << "/bundle\n";
            return 0;
        }

        if (*solve) {
            RomOperatorBundle bundle = io::load_bundle(bundle_dir);
            ForcingSignal f;
            f.samples = io::read_matrix(forcing_path);
            f.spectrum = fft::forward(f.samples);
            f.dt = bundle.grid.dt;
            Vec q0 = Vec::Zero(bundle.nx());
            if (!q0_path.empty()) q0 = io::read_matrix(q0_path).col(0);
            SolveReport report = online(bundle, q0, f, true);
            io::save_report(report_dir, report);
            std::vector<std::vector<double>> rows;
            for (int j = 0; j < bundle.grid.n_omega; ++j)
                rows.push_back({j * bundle.grid.dt, report.y.col(j).norm()});
            io::write_csv(fs::path(report_dir) / "observable_norm.csv", {"t", "norm_y"},
                          rows);
            std::cerr << "[solve] report written to " << report_dir << "\n";
            return 0;
        }

        if (*bench) {
            auto cfg = io::load_config(config_path);
            if (override_r > 0) cfg.r = override_r;
            if (bench->count("--out")) cfg.out_dir = out_dir;
            ExperimentReport report = run_experiment(cfg, std::cerr);
            std::cout << "method,r,mean_error,cpu_fraction\n";
            for (const auto& row : report.sweep)
                std::cout << row.method << "," << row.r << "," << row.mean_error << ","
                          << row.cpu_fraction << "\n";
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
