#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "sprom/fft.hpp"
#include "sprom/modal.hpp"

using namespace sprom;
using namespace sprom::testing;

namespace {

Trajectory synthetic_trajectory(const Mat& states, double dt) {
    Trajectory t;
    t.states = states;
    t.dt = dt;
    return t;
}

}  // namespace

TEST_CASE("segment_blocks: paper block counts from solved strides") {
    // Only the segmentation arithmetic matters; keep the state tiny.
    Philox rng(401, 0);
    {
        Trajectory t = synthetic_trajectory(random_complex(2, 12000, rng), 0.2);
        BlockedSpectra b = segment_blocks(t, 1024, 0.5, WindowKind::None, 142);
        CHECK(b.r_d == 142);
        CHECK(static_cast<int>(b.qhat.size()) == 1024);
        CHECK(b.qhat[0].cols() == 142);
    }
    {
        Trajectory t = synthetic_trajectory(random_complex(1, 50000, rng), 0.5);
        BlockedSpectra b = segment_blocks(t, 256, 0.5, WindowKind::None, 648);
        CHECK(b.r_d == 648);
    }
}

TEST_CASE("segment_blocks: constant input concentrates at frequency zero") {
    Mat states = Mat::Zero(3, 100);
    Vec q = Vec::Ones(3);
    q(1) = Complex(0.5, -0.5);
    for (int j = 0; j < 100; ++j) states.col(j) = q;
    Trajectory t = synthetic_trajectory(states, 0.1);
    BlockedSpectra b = segment_blocks(t, 32, 0.5);
    for (int i = 0; i < b.r_d; ++i)
        CHECK((b.qhat[0].col(i) - 32.0 * q).norm() < 1e-12);
    for (int k = 1; k < 32; ++k) CHECK(b.qhat[k].norm() < 1e-10);
}

TEST_CASE("segment_blocks: too-short input rejected") {
    Philox rng(402, 0);
    Trajectory t = synthetic_trajectory(random_complex(2, 10, rng), 0.1);
    CHECK_THROWS_AS(segment_blocks(t, 32, 0.5), ValidationError);
}

TEST_CASE("spod: rank-1 data") {
    Philox rng(403, 0);
    const int nx = 8;
    Philox prng(404, 0);
    RealVec wd = random_positive(nx, prng);
    Weight w(wd);
    Vec c = random_cvec(nx, rng);

    BlockedSpectra blocks;
    blocks.grid = FrequencyGrid{1, 1.0};
    blocks.r_d = 5;
    blocks.qhat.assign(1, Mat(nx, 5));
    for (int i = 0; i < 5; ++i) blocks.qhat[0].col(i) = c;

    SpodBasisSet basis = spod(blocks, w);
    double cwc = w.squared_norm(c);
    CHECK(basis.energies[0](0) == doctest::Approx(cwc).epsilon(1e-10));
    for (int l = 1; l < basis.energies[0].size(); ++l)
        CHECK(basis.energies[0](l) < 1e-10 * cwc);
    Vec mode = basis.modes[0].col(0);
    Vec expected = c / std::sqrt(cwc);
    // Modes are defined up to a unit phase.
    Complex phase = expected.dot(mode) / std::abs(expected.dot(mode));
    CHECK((mode - phase * expected).norm() < 1e-10);
}

TEST_CASE("spod: direct CSD eigendecomposition oracle") {
    Philox rng(405, 0);
    const int nx = 12, rd = 5;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);

    BlockedSpectra blocks;
    blocks.grid = FrequencyGrid{2, 1.0};
    blocks.r_d = rd;
    blocks.qhat.assign(2, Mat());
    blocks.qhat[0] = random_complex(nx, rd, rng);
    blocks.qhat[1] = random_complex(nx, rd, rng);
    SpodBasisSet basis = spod(blocks, w);

    for (int k = 0; k < 2; ++k) {
        // Oracle: eigenvalues of (1/r_d) W^{1/2} Q Q^* W^{1/2}.
        Mat s = w.apply_sqrt(blocks.qhat[k]);
        Mat csd = s * s.adjoint() / static_cast<double>(rd);
        Eigen::SelfAdjointEigenSolver<Mat> eig(csd);
        RealVec expected = eig.eigenvalues().reverse();
        for (int l = 0; l < rd; ++l)
            CHECK(basis.energies[k](l) ==
                  doctest::Approx(expected(l)).epsilon(1e-10).scale(expected(0)));
        // S_k W Psi = Psi Lambda on the retained modes.
        Mat sk = blocks.qhat[k] * blocks.qhat[k].adjoint() / static_cast<double>(rd);
        Mat lhs = sk * w.apply(basis.modes[k]);
        Mat rhs = basis.modes[k] * basis.energies[k].cast<Complex>().asDiagonal();
        CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("spod: unit weight reduces to the plain SVD") {
    Philox rng(406, 0);
    const int nx = 9, rd = 4;
    BlockedSpectra blocks;
    blocks.grid = FrequencyGrid{1, 1.0};
    blocks.r_d = rd;
    blocks.qhat.assign(1, random_complex(nx, rd, rng));
    SpodBasisSet basis = spod(blocks, Weight::identity(nx));

    Eigen::BDCSVD<Mat> svd(blocks.qhat[0] / std::sqrt(static_cast<double>(rd)),
                           Eigen::ComputeThinU);
    for (int l = 0; l < rd; ++l) {
        CHECK(basis.energies[0](l) ==
              doctest::Approx(svd.singularValues()(l) * svd.singularValues()(l))
                  .epsilon(1e-10));
    }
}

TEST_CASE("spod basis is W-orthonormal") {
    Philox rng(407, 0);
    const int nx = 10, rd = 6;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);
    BlockedSpectra blocks;
    blocks.grid = FrequencyGrid{3, 0.5};
    blocks.r_d = rd;
    blocks.qhat.assign(3, Mat());
    for (int k = 0; k < 3; ++k) blocks.qhat[k] = random_complex(nx, rd, rng);
    SpodBasisSet basis = spod(blocks, w);
    for (int k = 0; k < 3; ++k) {
        Mat gram = basis.modes[k].adjoint() * w.apply(basis.modes[k]);
        CHECK((gram - Mat::Identity(rd, rd)).norm() < 1e-10);
    }
}

TEST_CASE("retention: flat spectrum and brute-force oracle") {
    SpodBasisSet basis;
    basis.grid = FrequencyGrid{4, 1.0};
    basis.r_d = 3;
    basis.modes.assign(4, Mat::Zero(3, 3));
    basis.energies.assign(4, RealVec::Ones(3));

    auto flat = retention(basis, 2);
    for (int k = 0; k < 4; ++k) CHECK(flat[k] == 2);

    // Synthetic energies lambda_{k,l} = 2^{-l} / (1 + k^2).
    const int n_omega = 8, n_modes = 6;
    basis.grid = FrequencyGrid{n_omega, 1.0};
    basis.modes.assign(n_omega, Mat::Zero(n_modes, n_modes));
    basis.energies.assign(n_omega, RealVec(n_modes));
    for (int k = 0; k < n_omega; ++k)
        for (int l = 0; l < n_modes; ++l)
            basis.energies[k](l) = std::pow(2.0, -l) / (1.0 + k * k);

    for (int r : {1, 2, 3}) {
        auto got = retention(basis, r);
        // Brute-force sort-and-threshold oracle.
        std::vector<double> all;
        for (int k = 0; k < n_omega; ++k)
            for (int l = 0; l < n_modes; ++l) all.push_back(basis.energies[k](l));
        std::sort(all.begin(), all.end(), std::greater<double>());
        double threshold = all[static_cast<std::size_t>(n_omega) * r - 1];
        long total = 0;
        for (int k = 0; k < n_omega; ++k) {
            int count = 0;
            for (int l = 0; l < n_modes; ++l)
                if (basis.energies[k](l) >= threshold) ++count;
            CHECK(got[k] == count);  // no exact ties in this spectrum
            total += got[k];
        }
        CHECK(total == static_cast<long>(n_omega) * r);
    }
}

TEST_CASE("pod: repeated snapshot and isotropic cases") {
    Philox rng(408, 0);
    const int nx = 7;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);
    Vec snap = random_cvec(nx, rng);
    Mat snaps(nx, 4);
    for (int i = 0; i < 4; ++i) snaps.col(i) = snap;
    PodBasis basis = pod(snaps, w);
    CHECK(basis.energies(0) == doctest::Approx(w.squared_norm(snap)).epsilon(1e-10));
    for (int l = 1; l < basis.energies.size(); ++l)
        CHECK(basis.energies(l) < 1e-10 * basis.energies(0));

    // W-orthonormal snapshot columns: all energies equal the 1/m estimator scale.
    const int m = 4;
    Mat ortho = random_w_orthonormal(nx, m, w, rng);
    PodBasis iso = pod(ortho, w);
    for (int l = 0; l < m; ++l)
        CHECK(iso.energies(l) == doctest::Approx(1.0 / m).epsilon(1e-10));
}

TEST_CASE("pod: CSD eigendecomposition oracle on random 10x4") {
    Philox rng(409, 0);
    const int nx = 10, m = 4;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);
    Mat snaps = random_complex(nx, m, rng);
    PodBasis basis = pod(snaps, w);
    Mat s = w.apply_sqrt(snaps);
    Eigen::SelfAdjointEigenSolver<Mat> eig(s * s.adjoint() / static_cast<double>(m));
    RealVec expected = eig.eigenvalues().reverse();
    for (int l = 0; l < m; ++l)
        CHECK(basis.energies(l) ==
              doctest::Approx(expected(l)).epsilon(1e-10).scale(expected(0)));
}

TEST_CASE("spacetime_pod: single trajectory and constructed rank") {
    Philox rng(410, 0);
    const int nx = 6, nt = 8;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);

    Trajectory single = synthetic_trajectory(random_complex(nx, nt, rng), 0.3);
    SpaceTimePod st = spacetime_pod({single}, w);
    double norm2 = 0.0;
    for (int j = 0; j < nt; ++j) norm2 += w.squared_norm(single.states.col(j)) * 0.3;
    CHECK(st.energies(0) == doctest::Approx(norm2).epsilon(1e-10));

    // Ensemble drawn from a rank-2 space-time family.
    Mat f1 = random_complex(nx, nt, rng), f2 = random_complex(nx, nt, rng);
    std::vector<Trajectory> ens;
    for (int i = 0; i < 6; ++i) {
        Complex a = rng.next_cgaussian(), b = rng.next_cgaussian();
        ens.push_back(synthetic_trajectory(a * f1 + b * f2, 0.3));
    }
    SpaceTimePod st2 = spacetime_pod(ens, w);
    CHECK(st2.energies(0) > 0.0);
    CHECK(st2.energies(1) > 1e-8 * st2.energies(0));
    for (int l = 2; l < st2.energies.size(); ++l)
        CHECK(st2.energies(l) < 1e-10 * st2.energies(0));
}

TEST_CASE("spacetime_pod: size guard") {
    Philox rng(411, 0);
    Trajectory big = synthetic_trajectory(random_complex(64, 1024, rng), 0.1);
    CHECK_THROWS_AS(spacetime_pod({big}, Weight::identity(64)), ValidationError);
}

TEST_CASE("dof_for_accuracy: trivial counts") {
    SpodBasisSet basis;
    basis.grid = FrequencyGrid{4, 1.0};
    basis.r_d = 2;
    basis.modes.assign(4, Mat::Zero(3, 2));
    basis.energies.assign(4, RealVec::Zero(2));
    basis.energies[1](0) = 1.0;  // rank-1 ensemble

    CHECK(spod_dofs(basis, 0.0) == 0);
    CHECK(spod_dofs(basis, 0.9999) == 1);

    PodBasis pb;
    pb.modes = Mat::Zero(3, 2);
    pb.energies = RealVec::Zero(2);
    pb.energies(0) = 1.0;
    CHECK(pod_dofs(pb, 0.0, 4) == 0);
    CHECK(pod_dofs(pb, 0.9999, 4) == 4);  // one mode at every time step
}

TEST_CASE("parseval: total SPOD energy equals scaled mean block energy") {
    Philox rng(412, 0);
    const int nx = 5, n_omega = 16;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);
    Trajectory t = synthetic_trajectory(random_complex(nx, 200, rng), 0.25);
    BlockedSpectra blocks = segment_blocks(t, n_omega, 0.5);
    SpodBasisSet basis = spod(blocks, w);

    // sum over all energies = n_omega^2 * (block-and-time averaged |q|_W^2).
    double mean_sq = 0.0;
    for (int b = 0; b < blocks.r_d; ++b) {
        int start = b * blocks.stride;
        for (int j = 0; j < n_omega; ++j)
            mean_sq += w.squared_norm(t.states.col(start + j));
    }
    mean_sq /= static_cast<double>(blocks.r_d) * n_omega;
    double expected = mean_sq * n_omega * n_omega;
    CHECK(basis.total_energy() == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("spod of single-frequency data is concentrated at that frequency") {
    Philox rng(413, 0);
    const int nx = 4, n_omega = 16;
    FrequencyGrid grid{n_omega, 0.5};
    Vec c = random_cvec(nx, rng);
    const int k0 = 5;
    Mat states(nx, 3 * n_omega);
    for (int j = 0; j < 3 * n_omega; ++j)
        states.col(j) = c * grid.unit_phase(k0, j % n_omega) +
                        0.5 * c * static_cast<double>(0);  // exactly periodic
    Trajectory t = synthetic_trajectory(states, grid.dt);
    BlockedSpectra blocks = segment_blocks(t, n_omega, 0.0);
    SpodBasisSet basis = spod(blocks, Weight::identity(nx));
    double total = basis.total_energy();
    CHECK(basis.energies[k0].sum() == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("projection error decreases monotonically with mode count") {
    Philox rng(414, 0);
    const int nx = 6, n_omega = 8;
    RealVec wd = random_positive(nx, rng);
    Weight w(wd);
    Trajectory t = synthetic_trajectory(random_complex(nx, 64, rng), 0.5);
    BlockedSpectra blocks = segment_blocks(t, n_omega, 0.5);
    SpodBasisSet basis = spod(blocks, w);
    PodBasis pb = pod(blocks.snapshots, w);

    Mat test_states = t.states.leftCols(n_omega);
    double prev_spod = -1.0, prev_pod = -1.0;
    for (int r = 1; r <= 5; ++r) {
        auto r_k = retention(basis, r);
        double e_spod = (spod_project(basis, r_k, w, test_states) - test_states).norm();
        double e_pod =
            (pod_project(pb.modes.leftCols(r), w, test_states) - test_states).norm();
        if (prev_spod >= 0.0) CHECK(e_spod <= prev_spod + 1e-12);
        if (prev_pod >= 0.0) CHECK(e_pod <= prev_pod + 1e-12);
        prev_spod = e_spod;
        prev_pod = e_pod;
    }
}
