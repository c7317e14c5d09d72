#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sprom/rom.hpp"

namespace sprom::io {

/// Binary array container: magic "SPRM0001", element code (f64 | c128),
/// column-major layout flag, little-endian u64 dims, raw payload, CRC-32 of
/// the payload. Round-trips are bit-exact.
struct ArrayData {
    bool complex_valued = true;
    std::vector<std::uint64_t> dims;
    std::vector<double> payload;  // re/im interleaved when complex

    Mat as_matrix() const;        // rank <= 2
    RealVec as_real_vector() const;
    static ArrayData from_matrix(const Mat& m);
    static ArrayData from_real(const RealMat& m);
};

void write_array(const std::filesystem::path& path, const ArrayData& data);
ArrayData read_array(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

/// Line-oriented `key = value` configuration with fixed sections. Unknown
/// sections or keys are rejected; serialization echoes every default so
/// parse(serialize(c)) == c.
struct RunConfig {
    // [system]
    std::string system_kind = "gl";  // gl | scalar_transport
    int nx = 220;                    // gl collocation points
    double x_max = 0.0;              // gl half-domain; 0 = scaled default
    double mu0 = 0.229;
    double nu_re = 2.0, nu_im = 0.2;
    double gamma_re = 1.0, gamma_im = -1.0;
    double c_mu = 0.2, mu2 = -0.01;
    int grid_n = 98;  // scalar transport interior points per direction
    double eta = 0.001;
    double support_log_cut = 6.8;

    // [forcing]
    std::string forcing_kind = "white";  // white | gaussian
    double xi = 10.0;
    double tau = 1.0;
    int band_limit = -1;
    double envelope_l = 0.1;
    double xbar_x = 0.75, xbar_y = 0.25;
    std::string real_valued = "auto";  // auto | true | false
    std::string one_sided = "auto";    // auto: one-sided iff complex-valued
    std::uint64_t seed = 7081;

    // [modes]
    int n_omega = 256;
    double dt = 0.2;
    int n_train = 2000;
    double overlap = 0.5;
    int n_blocks = 0;  // 0 = derive from overlap
    std::string window = "none";
    int snapshot_cap = 2000;

    // [rom]
    int r = 10;
    int r_d = 0;
    int p = 0;  // 0 = identity-complete bypass
    bool exact_e = false;
    double pinv_cut = 1e-12;
    bool deim = false;
    int deim_pd = 200;

    // [experiment]
    int n_test = 20;
    std::uint64_t test_seed = 9907;
    std::string r_sweep;  // comma list, empty = single r
    std::string methods = "spod_pg,pod_g,bt";
    std::string error_norm = "weighted";  // weighted | euclidean
    double fom_rtol = 1e-8;
    double fom_atol = 1e-10;
    int fom_oversample = 8;  // training-run forcing interpolation
    std::string out_dir = "out";

    std::vector<int> r_list() const;
    std::vector<std::string> method_list() const;
    bool wants(const std::string& method) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

/// CSV emission. Every table begins with a `# generated <timestamp>` line;
/// the remainder is byte-stable for identical inputs.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& row_labels = {});

// Bundle persistence: a directory of per-frequency containers plus a
// manifest echoing the grid, ranks, and seeds.
void save_bundle(const std::filesystem::path& dir, const RomOperatorBundle& bundle);
RomOperatorBundle load_bundle(const std::filesystem::path& dir);

void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& dir);

void save_basis(const std::filesystem::path& dir, const SpodBasisSet& basis);
SpodBasisSet load_basis(const std::filesystem::path& dir);

void save_report(const std::filesystem::path& dir, const SolveReport& report);

}  // namespace sprom::io
