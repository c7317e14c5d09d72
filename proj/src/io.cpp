#include "sprom/io.hpp"

#include <zlib.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sprom::io {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'R', 'M', '0', '0', '0', '1'};

static_assert(sizeof(double) == 8);

std::uint32_t payload_crc(const std::vector<double>& payload) {
    auto crc = crc32(0L, Z_NULL, 0);
    const auto* bytes = reinterpret_cast<const Bytef*>(payload.data());
    std::size_t remaining = payload.size() * sizeof(double);
    while (remaining > 0) {
        auto chunk = static_cast<uInt>(std::min<std::size_t>(remaining, 1u << 30));
        crc = crc32(crc, bytes, chunk);
        bytes += chunk;
        remaining -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

template <typename T>
void write_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw ValidationError("array container: truncated file");
    return value;
}

}  // namespace

Mat ArrayData::as_matrix() const {
    if (dims.size() > 2) throw ValidationError("array container: rank > 2 for matrix view");
    std::uint64_t rows = dims.size() > 0 ? dims[0] : 1;
    std::uint64_t cols = dims.size() > 1 ? dims[1] : (dims.empty() ? 0 : 1);
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (complex_valued) {
        std::memcpy(m.data(), payload.data(), payload.size() * sizeof(double));
    } else {
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = Complex(payload[static_cast<std::size_t>(i)], 0.0);
    }
    return m;
}

RealVec ArrayData::as_real_vector() const {
    if (complex_valued) throw ValidationError("array container: expected real data");
    RealVec v(static_cast<Eigen::Index>(payload.size()));
    std::memcpy(v.data(), payload.data(), payload.size() * sizeof(double));
    return v;
}

ArrayData ArrayData::from_matrix(const Mat& m) {
    ArrayData d;
    d.complex_valued = true;
    d.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    d.payload.resize(static_cast<std::size_t>(m.size()) * 2);
    std::memcpy(d.payload.data(), m.data(), d.payload.size() * sizeof(double));
    return d;
}

ArrayData ArrayData::from_real(const RealMat& m) {
    ArrayData d;
    d.complex_valued = false;
    d.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    d.payload.resize(static_cast<std::size_t>(m.size()));
    std::memcpy(d.payload.data(), m.data(), d.payload.size() * sizeof(double));
    return d;
}

void write_array(const std::filesystem::path& path, const ArrayData& data) {
    std::uint64_t count = data.dims.empty() ? 0 : 1;
    for (auto d : data.dims) count *= d;
    std::uint64_t expected = count * (data.complex_valued ? 2 : 1);
    if (expected != data.payload.size())
        throw ValidationError("array container: payload does not match dims");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("array container: cannot open for write: " + path.string());
    os.write(kMagic, sizeof(kMagic));
    write_le<std::uint8_t>(os, data.complex_valued ? 1 : 0);
    write_le<std::uint8_t>(os, 0);  // layout 0 = column-major
    write_le<std::uint16_t>(os, 0);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(data.dims.size()));
    for (auto d : data.dims) write_le<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(data.payload.data()),
             static_cast<std::streamsize>(data.payload.size() * sizeof(double)));
    write_le<std::uint32_t>(os, payload_crc(data.payload));
    if (!os) throw ValidationError("array container: write failed: " + path.string());
}

ArrayData read_array(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("array container: cannot open: " + path.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ValidationError("array container: bad magic in " + path.string());

    ArrayData data;
    auto elem = read_le<std::uint8_t>(is);
    if (elem > 1) throw ValidationError("array container: unknown element code");
    data.complex_valued = elem == 1;
    auto layout = read_le<std::uint8_t>(is);
    if (layout != 0) throw ValidationError("array container: unsupported layout");
    read_le<std::uint16_t>(is);
    auto rank = read_le<std::uint32_t>(is);
    if (rank > 8) throw ValidationError("array container: implausible rank");
    data.dims.resize(rank);
    std::uint64_t count = rank == 0 ? 0 : 1;
    for (auto& d : data.dims) {
        d = read_le<std::uint64_t>(is);
        count *= d;
    }
    data.payload.resize(count * (data.complex_valued ? 2 : 1));
    is.read(reinterpret_cast<char*>(data.payload.data()),
            static_cast<std::streamsize>(data.payload.size() * sizeof(double)));
    if (!is) throw ValidationError("array container: truncated payload in " + path.string());
    auto stored_crc = read_le<std::uint32_t>(is);
    if (stored_crc != payload_crc(data.payload))
        throw ValidationError("array container: CRC mismatch in " + path.string());
    return data;
}

void write_matrix(const std::filesystem::path& path, const Mat& m) {
    write_array(path, ArrayData::from_matrix(m));
}

Mat read_matrix(const std::filesystem::path& path) {
    return read_array(path).as_matrix();
}

// ---------------------------------------------------------------------------
// RunConfig

namespace {

struct KeyRef {
    const char* section;
    const char* key;
    enum Type { Int, Double, String, U64, Bool } type;
    void* ptr;
};

std::vector<KeyRef> config_schema(RunConfig& c) {
    return {
        {"system", "kind", KeyRef::String, &c.system_kind},
        {"system", "nx", KeyRef::Int, &c.nx},
        {"system", "x_max", KeyRef::Double, &c.x_max},
        {"system", "mu0", KeyRef::Double, &c.mu0},
        {"system", "nu_re", KeyRef::Double, &c.nu_re},
        {"system", "nu_im", KeyRef::Double, &c.nu_im},
        {"system", "gamma_re", KeyRef::Double, &c.gamma_re},
        {"system", "gamma_im", KeyRef::Double, &c.gamma_im},
        {"system", "c_mu", KeyRef::Double, &c.c_mu},
        {"system", "mu2", KeyRef::Double, &c.mu2},
        {"system", "grid_n", KeyRef::Int, &c.grid_n},
        {"system", "eta", KeyRef::Double, &c.eta},
        {"system", "support_log_cut", KeyRef::Double, &c.support_log_cut},
        {"forcing", "kind", KeyRef::String, &c.forcing_kind},
        {"forcing", "xi", KeyRef::Double, &c.xi},
        {"forcing", "tau", KeyRef::Double, &c.tau},
        {"forcing", "band_limit", KeyRef::Int, &c.band_limit},
        {"forcing", "envelope_l", KeyRef::Double, &c.envelope_l},
        {"forcing", "xbar_x", KeyRef::Double, &c.xbar_x},
        {"forcing", "xbar_y", KeyRef::Double, &c.xbar_y},
        {"forcing", "real_valued", KeyRef::String, &c.real_valued},
        {"forcing", "one_sided", KeyRef::String, &c.one_sided},
        {"forcing", "seed", KeyRef::U64, &c.seed},
        {"modes", "n_omega", KeyRef::Int, &c.n_omega},
        {"modes", "dt", KeyRef::Double, &c.dt},
        {"modes", "n_train", KeyRef::Int, &c.n_train},
        {"modes", "overlap", KeyRef::Double, &c.overlap},
        {"modes", "n_blocks", KeyRef::Int, &c.n_blocks},
        {"modes", "window", KeyRef::String, &c.window},
        {"modes", "snapshot_cap", KeyRef::Int, &c.snapshot_cap},
        {"rom", "r", KeyRef::Int, &c.r},
        {"rom", "r_d", KeyRef::Int, &c.r_d},
        {"rom", "p", KeyRef::Int, &c.p},
        {"rom", "exact_e", KeyRef::Bool, &c.exact_e},
        {"rom", "pinv_cut", KeyRef::Double, &c.pinv_cut},
        {"rom", "deim", KeyRef::Bool, &c.deim},
        {"rom", "deim_pd", KeyRef::Int, &c.deim_pd},
        {"experiment", "n_test", KeyRef::Int, &c.n_test},
        {"experiment", "test_seed", KeyRef::U64, &c.test_seed},
        {"experiment", "r_sweep", KeyRef::String, &c.r_sweep},
        {"experiment", "methods", KeyRef::String, &c.methods},
        {"experiment", "error_norm", KeyRef::String, &c.error_norm},
        {"experiment", "fom_rtol", KeyRef::Double, &c.fom_rtol},
        {"experiment", "fom_atol", KeyRef::Double, &c.fom_atol},
        {"experiment", "fom_oversample", KeyRef::Int, &c.fom_oversample},
        {"experiment", "out_dir", KeyRef::String, &c.out_dir},
    };
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    auto schema = config_schema(cfg);
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            bool known = false;
            for (const auto& k : schema) known |= section == k.section;
            if (!known)
                throw ValidationError("config: unknown section [" + section + "] at line " +
                                      std::to_string(line_no));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: expected key = value at line " +
                                  std::to_string(line_no));
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        const KeyRef* hit = nullptr;
        for (const auto& k : schema)
            if (section == k.section && key == k.key) hit = &k;
        if (!hit)
            throw ValidationError("config: unknown key '" + key + "' in section [" +
                                  section + "]");
        try {
            switch (hit->type) {
                case KeyRef::Int: *static_cast<int*>(hit->ptr) = std::stoi(value); break;
                case KeyRef::Double: *static_cast<double*>(hit->ptr) = std::stod(value); break;
                case KeyRef::String: *static_cast<std::string*>(hit->ptr) = value; break;
                case KeyRef::U64:
                    *static_cast<std::uint64_t*>(hit->ptr) = std::stoull(value);
                    break;
                case KeyRef::Bool:
                    if (value == "true" || value == "1")
                        *static_cast<bool*>(hit->ptr) = true;
                    else if (value == "false" || value == "0")
                        *static_cast<bool*>(hit->ptr) = false;
                    else
                        throw ValidationError("config: bad boolean '" + value + "'");
                    break;
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("config: cannot parse value '" + value + "' for key '" +
                                  key + "'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    RunConfig copy = cfg;
    auto schema = config_schema(copy);
    std::ostringstream os;
    std::string section;
    for (const auto& k : schema) {
        if (section != k.section) {
            if (!section.empty()) os << "\n";
            section = k.section;
            os << "[" << section << "]\n";
        }
        os << k.key << " = ";
        switch (k.type) {
            case KeyRef::Int: os << *static_cast<int*>(k.ptr); break;
            case KeyRef::Double: os << format_double(*static_cast<double*>(k.ptr)); break;
            case KeyRef::String: os << *static_cast<std::string*>(k.ptr); break;
            case KeyRef::U64: os << *static_cast<std::uint64_t*>(k.ptr); break;
            case KeyRef::Bool: os << (*static_cast<bool*>(k.ptr) ? "true" : "false"); break;
        }
        os << "\n";
    }
    return os.str();
}

std::vector<int> RunConfig::r_list() const {
    std::vector<int> out;
    if (r_sweep.empty()) {
        out.push_back(r);
        return out;
    }
    std::istringstream is(r_sweep);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) out.push_back(r);
    return out;
}

std::vector<std::string> RunConfig::method_list() const {
    std::vector<std::string> out;
    std::istringstream is(methods);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

bool RunConfig::wants(const std::string& method) const {
    for (const auto& m : method_list())
        if (m == method) return true;
    return false;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& row_labels) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ValidationError("csv: cannot open " + path.string());
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    os << "# generated " << std::put_time(std::gmtime(&now), "%FT%TZ") << "\n";
    const bool labeled = !row_labels.empty();
    if (labeled && row_labels.size() != rows.size())
        throw ValidationError("csv: label count mismatch");
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    os << std::setprecision(16);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labeled) os << row_labels[i] << (rows[i].empty() ? "\n" : ",");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            os << rows[i][j] << (j + 1 < rows[i].size() ? "," : "\n");
    }
}

// ---------------------------------------------------------------------------
// Structured artifacts

namespace {

namespace fs = std::filesystem;

std::string freq_name(const char* prefix, int k) {
    std::ostringstream os;
    os << prefix << "_" << std::setw(5) << std::setfill('0') << k << ".spr";
    return os.str();
}

void write_manifest(const fs::path& dir, const std::map<std::string, std::string>& kv) {
    std::ofstream os(dir / "manifest.cfg", std::ios::trunc);
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
    std::ifstream is(dir / "manifest.cfg");
    if (!is) throw ValidationError("manifest: cannot open " + (dir / "manifest.cfg").string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace

void save_bundle(const fs::path& dir, const RomOperatorBundle& bundle) {
    fs::create_directories(dir);
    const int n = bundle.n_omega();
    std::map<std::string, std::string> manifest{
        {"kind", "rom_bundle"},
        {"n_omega", std::to_string(n)},
        {"dt", format_double(bundle.grid.dt)},
        {"r_d", std::to_string(bundle.r_d)},
        {"p", std::to_string(bundle.p)},
        {"phi_identity", bundle.phi_identity ? "true" : "false"},
        {"c_identity", bundle.c_is_identity ? "true" : "false"},
        {"seed", std::to_string(bundle.seed)},
    };
    {
        std::ostringstream rk;
        for (int k = 0; k < n; ++k) rk << bundle.r_k[static_cast<std::size_t>(k)]
                                       << (k + 1 < n ? "," : "");
        manifest["r_k"] = rk.str();
    }
    write_manifest(dir, manifest);
    for (int k = 0; k < n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        write_matrix(dir / freq_name("E", k), bundle.E[ks]);
        write_matrix(dir / freq_name("H", k), bundle.H[ks]);
        write_matrix(dir / freq_name("T", k), bundle.T[ks]);
        write_matrix(dir / freq_name("Psi", k), bundle.PsiR[ks]);
        if (!bundle.c_is_identity) write_matrix(dir / freq_name("CPsi", k), bundle.CPsi[ks]);
    }
    if (bundle.phi_identity) {
        write_array(dir / "w_sqrt.spr", ArrayData::from_real(bundle.w_sqrt));
    } else {
        write_matrix(dir / "phi.spr", bundle.phi);
        write_matrix(dir / "wphi.spr", bundle.wphi);
    }
}

RomOperatorBundle load_bundle(const fs::path& dir) {
    auto manifest = read_manifest(dir);
    if (manifest["kind"] != "rom_bundle")
        throw ValidationError("bundle: wrong manifest kind in " + dir.string());
    RomOperatorBundle bundle;
    const int n = std::stoi(manifest.at("n_omega"));
    bundle.grid = FrequencyGrid{n, std::stod(manifest.at("dt"))};
    bundle.r_d = std::stoi(manifest.at("r_d"));
    bundle.p = std::stoi(manifest.at("p"));
    bundle.phi_identity = manifest.at("phi_identity") == "true";
    bundle.c_is_identity = manifest.at("c_identity") == "true";
    bundle.seed = std::stoull(manifest.at("seed"));
    {
        std::istringstream rk(manifest.at("r_k"));
        std::string tok;
        while (std::getline(rk, tok, ',')) bundle.r_k.push_back(std::stoi(tok));
        if (static_cast<int>(bundle.r_k.size()) != n)
            throw ValidationError("bundle: r_k length mismatch");
    }
    bundle.E.resize(n);
    bundle.H.resize(n);
    bundle.T.resize(n);
    bundle.PsiR.resize(n);
    if (!bundle.c_is_identity) bundle.CPsi.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        bundle.E[ks] = read_matrix(dir / freq_name("E", k));
        bundle.H[ks] = read_matrix(dir / freq_name("H", k));
        bundle.T[ks] = read_matrix(dir / freq_name("T", k));
        bundle.PsiR[ks] = read_matrix(dir / freq_name("Psi", k));
        if (!bundle.c_is_identity)
            bundle.CPsi[ks] = read_matrix(dir / freq_name("CPsi", k));
    }
    if (bundle.phi_identity) {
        bundle.w_sqrt = read_array(dir / "w_sqrt.spr").as_real_vector();
    } else {
        bundle.phi = read_matrix(dir / "phi.spr");
        bundle.wphi = read_matrix(dir / "wphi.spr");
    }
    return bundle;
}

void save_trajectory(const fs::path& dir, const Trajectory& traj) {
    fs::create_directories(dir);
    write_manifest(dir, {{"kind", "trajectory"},
                         {"dt", format_double(traj.dt)},
                         {"n_t", std::to_string(traj.nt())}});
    write_matrix(dir / "states.spr", traj.states);
    if (traj.forcings.size()) write_matrix(dir / "forcings.spr", traj.forcings);
}

Trajectory load_trajectory(const fs::path& dir) {
    auto manifest = read_manifest(dir);
    if (manifest["kind"] != "trajectory")
        throw ValidationError("trajectory: wrong manifest kind in " + dir.string());
    Trajectory t;
    t.dt = std::stod(manifest.at("dt"));
    t.states = read_matrix(dir / "states.spr");
    if (fs::exists(dir / "forcings.spr")) t.forcings = read_matrix(dir / "forcings.spr");
    return t;
}

void save_basis(const fs::path& dir, const SpodBasisSet& basis) {
    fs::create_directories(dir);
    write_manifest(dir, {{"kind", "spod_basis"},
                         {"n_omega", std::to_string(basis.n_omega())},
                         {"dt", format_double(basis.grid.dt)},
                         {"r_d", std::to_string(basis.r_d)}});
    for (int k = 0; k < basis.n_omega(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        write_matrix(dir / freq_name("modes", k), basis.modes[ks]);
        write_array(dir / freq_name("energies", k), ArrayData::from_real(basis.energies[ks]));
    }
}

SpodBasisSet load_basis(const fs::path& dir) {
    auto manifest = read_manifest(dir);
    if (manifest["kind"] != "spod_basis")
        throw ValidationError("basis: wrong manifest kind in " + dir.string());
    SpodBasisSet basis;
    const int n = std::stoi(manifest.at("n_omega"));
    basis.grid = FrequencyGrid{n, std::stod(manifest.at("dt"))};
    basis.r_d = std::stoi(manifest.at("r_d"));
    basis.modes.resize(n);
    basis.energies.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        basis.modes[ks] = read_matrix(dir / freq_name("modes", k));
        basis.energies[ks] = read_array(dir / freq_name("energies", k)).as_real_vector();
    }
    return basis;
}

void save_report(const fs::path& dir, const SolveReport& report) {
    fs::create_directories(dir);
    write_manifest(dir, {{"kind", "solve_report"},
                         {"t_fft", format_double(report.t_fft)},
                         {"t_coeff", format_double(report.t_coeff)},
                         {"t_ifft", format_double(report.t_ifft)},
                         {"deim_residual", format_double(report.deim_residual)}});
    write_matrix(dir / "yhat.spr", report.yhat);
    write_matrix(dir / "y.spr", report.y);
    if (report.state.size()) write_matrix(dir / "state.spr", report.state);
    // Ragged coefficients: one container per frequency.
    for (std::size_t k = 0; k < report.coeffs.size(); ++k)
        write_matrix(dir / freq_name("a", static_cast<int>(k)), Mat(report.coeffs[k]));
}

}  // namespace sprom::io
