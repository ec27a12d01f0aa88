#include "vgf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "vgf/control.hpp"
#include "vgf/errors.hpp"
#include "vgf/numeric.hpp"
#include "vgf/verify.hpp"

namespace vgf {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    material.validate();
    geometry.validate();
    scenario.validate();
    sim.validate();
    if (!(gains.f_bar_diag[0] < 0.0 && gains.f_bar_diag[1] < 0.0)) {
        throw ConfigError("gains: f_bar_diag entries must be negative (Hurwitz)");
    }
    if (!(gains.mu[0] > 0.0 && gains.mu[1] > 0.0)) {
        throw ConfigError("gains: mu entries must be positive");
    }
    if (gains.kernel_bc_mode != "triangular" && gains.kernel_bc_mode != "literal") {
        throw ConfigError("gains: kernel_bc_mode must be 'triangular' or 'literal'");
    }
    if (numerics.n_sigma < 21) throw ConfigError("numerics: n_sigma too small");
    if (numerics.series_order < 2 || numerics.series_order > 40) {
        throw ConfigError("numerics: series_order out of range [2, 40]");
    }
    if (numerics.kernel_snapshots < 2) throw ConfigError("numerics: need >= 2 kernel snapshots");
    if (numerics.kernel_lattice_factor < 1 || numerics.kernel_lattice_factor > 16) {
        throw ConfigError("numerics: kernel_lattice_factor out of range [1, 16]");
    }
    if (!(numerics.dt_reference > 0.0)) throw ConfigError("numerics: dt_reference must be positive");
    // Assumption margin: the planned trajectory must stay strictly inside
    const double g_end_margin = 1e-3 * (geometry.Gamma_2 - geometry.Gamma_1);
    (void)g_end_margin;
}

TargetParams RunConfig::target_params() const {
    TargetParams t;
    t.mu = gains.mu;
    t.bc_mode = (gains.kernel_bc_mode == "literal") ? KernelBcMode::Literal
                                                    : KernelBcMode::Triangular;
    t.lattice_factor = numerics.kernel_lattice_factor;
    return t;
}

Eigen::Matrix2d RunConfig::F_bar() const {
    Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
    f(0, 0) = gains.f_bar_diag[0];
    f(1, 1) = gains.f_bar_diag[1];
    return f;
}

RunConfig default_config() {
    RunConfig c;
    c.material.k_1 = 7.1;
    c.material.k_2 = 17.8;
    c.material.rho_m = 5710.0;
    c.material.q_star = 7.26e5;
    c.material.T_m = 1511.0;
    c.material.alpha_1 = 7.1 / (5710.0 * 424.0);
    c.material.alpha_2 = 17.8 / (5710.0 * 434.0);
    c.sim.duration = c.scenario.duration;
    c.sim.delta_gamma_0 = -0.010;
    c.sim.delta_gamma_dot_0 = -3e-3 / 3600.0;
    c.sim.delta_grad_0 = 500.0;
    return c;
}

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (obj.contains(key)) return obj.at(key).get<T>();
    return fallback;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    RunConfig c = default_config();
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    try {
        if (j.contains("material")) {
            const json& m = j["material"];
            c.material.alpha_1 = get_or(m, "alpha_1_m2_per_s", c.material.alpha_1);
            c.material.alpha_2 = get_or(m, "alpha_2_m2_per_s", c.material.alpha_2);
            c.material.k_1 = get_or(m, "k_1_W_per_mK", c.material.k_1);
            c.material.k_2 = get_or(m, "k_2_W_per_mK", c.material.k_2);
            c.material.rho_m = get_or(m, "rho_m_kg_per_m3", c.material.rho_m);
            c.material.q_star = get_or(m, "q_star_J_per_kg", c.material.q_star);
            c.material.T_m = get_or(m, "T_m_K", c.material.T_m);
        }
        if (j.contains("geometry")) {
            const json& g = j["geometry"];
            c.geometry.Gamma_1 = get_or(g, "Gamma_1_m", c.geometry.Gamma_1);
            c.geometry.Gamma_2 = get_or(g, "Gamma_2_m", c.geometry.Gamma_2);
        }
        if (j.contains("scenario")) {
            const json& s = j["scenario"];
            c.scenario.seed_length = get_or(s, "seed_length_m", c.scenario.seed_length);
            c.scenario.plateau_velocity =
                get_or(s, "plateau_velocity_m_per_s", c.scenario.plateau_velocity);
            c.scenario.gradient_setpoint =
                get_or(s, "gradient_setpoint_K_per_m", c.scenario.gradient_setpoint);
            c.scenario.duration = get_or(s, "duration_s", c.scenario.duration);
            c.scenario.ramp_up_start = get_or(s, "ramp_up_start_s", c.scenario.ramp_up_start);
            c.scenario.ramp_up_end = get_or(s, "ramp_up_end_s", c.scenario.ramp_up_end);
            c.scenario.ramp_down_start = get_or(s, "ramp_down_start_s", c.scenario.ramp_down_start);
            c.scenario.ramp_down_end = get_or(s, "ramp_down_end_s", c.scenario.ramp_down_end);
            c.scenario.gevrey_order = get_or(s, "gevrey_order", c.scenario.gevrey_order);
            c.sim.duration = c.scenario.duration;
        }
        if (j.contains("gains")) {
            const json& g = j["gains"];
            if (g.contains("f_bar_diag_per_s")) {
                const auto v = g["f_bar_diag_per_s"].get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError("gains.f_bar_diag_per_s needs 2 entries");
                c.gains.f_bar_diag = {v[0], v[1]};
            }
            if (g.contains("mu_per_s")) {
                const auto v = g["mu_per_s"].get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError("gains.mu_per_s needs 2 entries");
                c.gains.mu = {v[0], v[1]};
            }
            c.gains.kernel_bc_mode = get_or<std::string>(g, "kernel_bc_mode", c.gains.kernel_bc_mode);
        }
        if (j.contains("numerics")) {
            const json& n = j["numerics"];
            c.numerics.n_sigma = get_or<std::size_t>(n, "n_sigma", c.numerics.n_sigma);
            c.numerics.dt_reference = get_or(n, "dt_reference_s", c.numerics.dt_reference);
            c.numerics.series_order = get_or(n, "series_order", c.numerics.series_order);
            c.numerics.kernel_snapshots =
                get_or<std::size_t>(n, "kernel_snapshots", c.numerics.kernel_snapshots);
            c.numerics.kernel_lattice_factor =
                get_or(n, "kernel_lattice_factor", c.numerics.kernel_lattice_factor);
            c.numerics.max_flat_order =
                get_or<std::size_t>(n, "max_flat_order", c.numerics.max_flat_order);
        }
        if (j.contains("sim")) {
            const json& s = j["sim"];
            c.sim.elements_per_phase =
                get_or<std::size_t>(s, "elements_per_phase", c.sim.elements_per_phase);
            c.sim.dt_plant = get_or(s, "dt_plant_s", c.sim.dt_plant);
            c.sim.dt_controller = get_or(s, "dt_controller_s", c.sim.dt_controller);
            c.sim.duration = get_or(s, "duration_s", c.sim.duration);
            c.sim.snapshot_interval = get_or(s, "snapshot_interval_s", c.sim.snapshot_interval);
            c.sim.delta_gamma_0 = get_or(s, "delta_gamma_0_m", c.sim.delta_gamma_0);
            c.sim.delta_gamma_dot_0 =
                get_or(s, "delta_gamma_dot_0_m_per_s", c.sim.delta_gamma_dot_0);
            c.sim.delta_grad_0 = get_or(s, "delta_grad_0_K_per_m", c.sim.delta_grad_0);
        }
        if (j.contains("output")) c.out_dir = get_or<std::string>(j["output"], "dir", c.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    c.validate();
    return c;
}

std::string dump_config(const RunConfig& c) {
    json j;
    j["material"] = {{"alpha_1_m2_per_s", c.material.alpha_1},
                     {"alpha_2_m2_per_s", c.material.alpha_2},
                     {"k_1_W_per_mK", c.material.k_1},
                     {"k_2_W_per_mK", c.material.k_2},
                     {"rho_m_kg_per_m3", c.material.rho_m},
                     {"q_star_J_per_kg", c.material.q_star},
                     {"T_m_K", c.material.T_m}};
    j["geometry"] = {{"Gamma_1_m", c.geometry.Gamma_1}, {"Gamma_2_m", c.geometry.Gamma_2}};
    j["scenario"] = {{"seed_length_m", c.scenario.seed_length},
                     {"plateau_velocity_m_per_s", c.scenario.plateau_velocity},
                     {"gradient_setpoint_K_per_m", c.scenario.gradient_setpoint},
                     {"duration_s", c.scenario.duration},
                     {"ramp_up_start_s", c.scenario.ramp_up_start},
                     {"ramp_up_end_s", c.scenario.ramp_up_end},
                     {"ramp_down_start_s", c.scenario.ramp_down_start},
                     {"ramp_down_end_s", c.scenario.ramp_down_end},
                     {"gevrey_order", c.scenario.gevrey_order}};
    j["gains"] = {{"f_bar_diag_per_s", {c.gains.f_bar_diag[0], c.gains.f_bar_diag[1]}},
                  {"mu_per_s", {c.gains.mu[0], c.gains.mu[1]}},
                  {"kernel_bc_mode", c.gains.kernel_bc_mode}};
    j["numerics"] = {{"n_sigma", c.numerics.n_sigma},
                     {"dt_reference_s", c.numerics.dt_reference},
                     {"series_order", c.numerics.series_order},
                     {"kernel_snapshots", c.numerics.kernel_snapshots},
                     {"kernel_lattice_factor", c.numerics.kernel_lattice_factor},
                     {"max_flat_order", c.numerics.max_flat_order}};
    j["sim"] = {{"elements_per_phase", c.sim.elements_per_phase},
                {"dt_plant_s", c.sim.dt_plant},
                {"dt_controller_s", c.sim.dt_controller},
                {"duration_s", c.sim.duration},
                {"snapshot_interval_s", c.sim.snapshot_interval},
                {"delta_gamma_0_m", c.sim.delta_gamma_0},
                {"delta_gamma_dot_0_m_per_s", c.sim.delta_gamma_dot_0},
                {"delta_grad_0_K_per_m", c.sim.delta_grad_0}};
    j["output"] = {{"dir", c.out_dir}};
    return j.dump(2);
}

std::uint64_t RunConfig::hash() const {
    const std::string s = dump_config(*this);
    return fnv1a64(std::span<const char>(s.data(), s.size()));
}

namespace {

constexpr char kMagic[4] = {'V', 'G', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T take(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("artifact file truncated");
    return v;
}

}  // namespace

void write_artifact(const std::string& path, std::uint64_t config_hash,
                    const std::vector<NamedArray>& arrays) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write artifact: " + path);
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, config_hash);
    put(out, static_cast<std::uint32_t>(arrays.size()));
    for (const NamedArray& a : arrays) {
        put(out, static_cast<std::uint32_t>(a.name.size()));
        out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        put(out, static_cast<std::uint32_t>(a.shape.size()));
        std::uint64_t total = 1;
        for (const std::uint64_t d : a.shape) {
            put(out, d);
            total *= d;
        }
        if (total != a.data.size()) throw ConfigError("artifact shape/data mismatch: " + a.name);
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    }
    if (!out) throw ConfigError("artifact write failed: " + path);
}

std::vector<NamedArray> read_artifact(const std::string& path, std::uint64_t* config_hash_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open artifact: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ConfigError("bad artifact magic in " + path);
    }
    const auto version = take<std::uint32_t>(in);
    if (version != kVersion) throw ConfigError("unsupported artifact version in " + path);
    const auto hash = take<std::uint64_t>(in);
    if (config_hash_out) *config_hash_out = hash;
    const auto count = take<std::uint32_t>(in);
    std::vector<NamedArray> arrays(count);
    for (NamedArray& a : arrays) {
        const auto name_len = take<std::uint32_t>(in);
        a.name.resize(name_len);
        in.read(a.name.data(), name_len);
        const auto ndim = take<std::uint32_t>(in);
        std::uint64_t total = 1;
        a.shape.resize(ndim);
        for (std::uint64_t& d : a.shape) {
            d = take<std::uint64_t>(in);
            total *= d;
        }
        a.data.resize(total);
        in.read(reinterpret_cast<char*>(a.data.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
        if (!in) throw ConfigError("artifact file truncated: " + path);
    }
    return arrays;
}

Pipeline build_pipeline(const RunConfig& c, bool with_kernels) {
    c.validate();
    FlatOutputTrajectory flat(c.scenario, c.geometry, c.numerics.max_flat_order);
    ReferenceBundle bundle = build_references(flat, c.material, c.geometry, c.numerics.n_sigma,
                                              c.numerics.dt_reference, c.numerics.series_order);
    LinearizedCoefficients coeffs = assemble_coefficients(bundle, c.material, c.geometry);
    HopfColeFactors hc = hopf_cole(coeffs);
    ExtendedSystemMatrices matrices = assemble_extended(hc, coeffs);
    OdeGain gain = choose_gain(matrices, c.F_bar());
    DecouplingSolution dec = solve_decoupling(matrices, gain, c.numerics.series_order);
    KernelSet kernels;
    if (with_kernels) {
        kernels = build_kernel_set(matrices, dec, c.target_params(), c.numerics.kernel_snapshots,
                                   c.numerics.n_sigma);
    }
    return Pipeline{std::move(flat),     std::move(bundle), std::move(coeffs), std::move(hc),
                    std::move(matrices), std::move(gain),   std::move(dec),    std::move(kernels)};
}

namespace {

std::string artifact_path(const RunConfig& c, const char* name) {
    return (fs::path(c.out_dir) / name).string();
}

void require_hash(const RunConfig& c, const char* name) {
    const std::string path = artifact_path(c, name);
    if (!fs::exists(path)) {
        throw ConfigError(std::string("missing artifact ") + name + "; run the producing command first");
    }
    std::uint64_t h = 0;
    read_artifact(path, &h);
    if (h != c.hash()) {
        throw ConfigError(std::string("artifact ") + name +
                          " was produced by a different config (hash mismatch); re-run the pipeline");
    }
}

}  // namespace

void write_log_csv(const std::string& path, const TrajectoryLog& log) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write log: " + path);
    out << "# vgf-log v1\n";
    out << "t_s,gamma_m,gamma_dot_m_per_s,gamma_ref_m,grad1_K_per_m,grad1_ref_K_per_m,"
           "u1_W_per_m2,u2_W_per_m2,u1_ref_W_per_m2,u2_ref_W_per_m2,epsilon,x_gamma_m\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < log.steps(); ++k) {
        out << log.t[k] << ',' << log.gamma[k] << ',' << log.gamma_dot[k] << ','
            << log.gamma_ref[k] << ',' << log.grad_1[k] << ',' << log.grad_1_ref[k] << ','
            << log.u_1[k] << ',' << log.u_2[k] << ',' << log.u_1_ref[k] << ','
            << log.u_2_ref[k] << ',' << log.epsilon[k] << ',' << log.x_gamma[k] << '\n';
    }
}

TrajectoryLog read_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open log: " + path);
    TrajectoryLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno <= 2 && line.find("t_s") == 0) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("log parse error in " + path + " at line " +
                                  std::to_string(lineno));
            }
        }
        if (row.size() != 12) {
            throw ConfigError("log parse error in " + path + " at line " + std::to_string(lineno) +
                              ": expected 12 columns");
        }
        log.t.push_back(row[0]);
        log.gamma.push_back(row[1]);
        log.gamma_dot.push_back(row[2]);
        log.gamma_ref.push_back(row[3]);
        log.grad_1.push_back(row[4]);
        log.grad_1_ref.push_back(row[5]);
        log.u_1.push_back(row[6]);
        log.u_2.push_back(row[7]);
        log.u_1_ref.push_back(row[8]);
        log.u_2_ref.push_back(row[9]);
        log.epsilon.push_back(row[10]);
        log.x_gamma.push_back(row[11]);
    }
    return log;
}

namespace {

void write_fields_artifact(const RunConfig& c, const std::string& name, const TrajectoryLog& log) {
    std::vector<NamedArray> arrays;
    arrays.push_back({"snapshot_t", {log.snapshot_t.size()}, log.snapshot_t});
    for (int phase = 1; phase <= 2; ++phase) {
        const auto& snaps = (phase == 1) ? log.snapshot_T1 : log.snapshot_T2;
        NamedArray a;
        a.name = (phase == 1) ? "T1" : "T2";
        const std::size_t nodes = snaps.empty() ? 0 : snaps.front().size();
        a.shape = {snaps.size(), nodes};
        for (const auto& s : snaps) a.data.insert(a.data.end(), s.begin(), s.end());
        arrays.push_back(std::move(a));
    }
    write_artifact(artifact_path(c, name.c_str()), c.hash(), arrays);
}

void read_fields_artifact(const RunConfig& c, const std::string& name, TrajectoryLog* log) {
    const auto arrays = read_artifact(artifact_path(c, name.c_str()), nullptr);
    for (const NamedArray& a : arrays) {
        if (a.name == "snapshot_t") log->snapshot_t = a.data;
        if (a.name == "T1" || a.name == "T2") {
            auto& dst = (a.name == "T1") ? log->snapshot_T1 : log->snapshot_T2;
            const std::size_t rows = a.shape[0], cols = a.shape[1];
            dst.assign(rows, {});
            for (std::size_t r = 0; r < rows; ++r) {
                dst[r].assign(a.data.begin() + static_cast<long>(r * cols),
                              a.data.begin() + static_cast<long>((r + 1) * cols));
            }
        }
    }
}

}  // namespace

int cmd_plan(const RunConfig& c) {
    c.validate();
    FlatOutputTrajectory flat(c.scenario, c.geometry, c.numerics.max_flat_order);
    ReferenceBundle b = build_references(flat, c.material, c.geometry, c.numerics.n_sigma,
                                         c.numerics.dt_reference, c.numerics.series_order);
    fs::create_directories(c.out_dir);
    std::vector<NamedArray> arrays = {
        {"t_grid", {b.t_grid.size()}, b.t_grid},
        {"sigma_grid", {b.sigma_grid.size()}, b.sigma_grid},
        {"gamma_r", {b.gamma_r.size()}, b.gamma_r},
        {"gamma_dot_r", {b.gamma_dot_r.size()}, b.gamma_dot_r},
        {"gamma_ddot_r", {b.gamma_ddot_r.size()}, b.gamma_ddot_r},
        {"u1_r", {b.u1_r.size()}, b.u1_r},
        {"u2_r", {b.u2_r.size()}, b.u2_r},
        {"grad1_r", {b.grad1_r.size()}, b.grad1_r},
        {"grad2_r", {b.grad2_r.size()}, b.grad2_r},
    };
    write_artifact(artifact_path(c, "reference.bin"), c.hash(), arrays);

    std::ofstream sum(artifact_path(c, "plan_summary.txt"));
    sum << std::setprecision(10);
    sum << "growth_length_mm " << (b.gamma_r.back() - b.gamma_r.front()) * 1e3 << "\n";
    sum << "plateau_velocity_mm_per_h " << c.scenario.plateau_velocity * 3600e3 << "\n";
    sum << "gradient_setpoint_K_per_cm " << c.scenario.gradient_setpoint / 100.0 << "\n";
    sum << "gevrey_order " << c.scenario.gevrey_order << "\n";
    sum << "u1_r_initial_W_per_m2 " << b.u1_r.front() << "\n";
    sum << "u2_r_initial_W_per_m2 " << b.u2_r.front() << "\n";
    sum << "config_hash " << c.hash() << "\n";
    std::cout << "plan: wrote " << artifact_path(c, "reference.bin") << "\n";
    return 0;
}

int cmd_precompute(const RunConfig& c) {
    require_hash(c, "reference.bin");
    Pipeline p = build_pipeline(c, true);

    std::vector<NamedArray> arrays;
    arrays.push_back({"t_grid", {p.matrices.t_grid.size()}, p.matrices.t_grid});
    arrays.push_back({"F_bar", {2}, {p.dec.F_bar(0, 0), p.dec.F_bar(1, 1)}});
    {
        NamedArray a{"gain_K", {p.gain.K.size(), 4}, {}};
        for (const auto& K : p.gain.K) {
            a.data.insert(a.data.end(), {K(0, 0), K(0, 1), K(1, 0), K(1, 1)});
        }
        arrays.push_back(std::move(a));
    }
    {
        NamedArray a{"dec_L",
                     {p.dec.L.size(), p.dec.t_grid.size(), 4},
                     {}};
        for (const auto& level : p.dec.L) {
            for (const auto& L : level) {
                a.data.insert(a.data.end(), {L(0, 0), L(0, 1), L(1, 0), L(1, 1)});
            }
        }
        arrays.push_back(std::move(a));
    }
    {
        std::vector<double> t_snaps;
        for (const auto& s : p.kernels.snapshots) t_snaps.push_back(s.t_k);
        arrays.push_back({"kernel_t", {t_snaps.size()}, t_snaps});
        const std::size_t tri = p.kernels.snapshots.front().K_tri[0].size();
        const std::size_t ns = p.kernels.snapshots.front().n_sigma();
        NamedArray ktri{"kernel_K_tri", {t_snaps.size(), 4, tri}, {}};
        NamedArray kd{"kernel_D", {t_snaps.size(), 4, ns}, {}};
        NamedArray kdk{"kernel_dK1_dsigma", {t_snaps.size(), 4, ns}, {}};
        for (const auto& s : p.kernels.snapshots) {
            for (int e = 0; e < 4; ++e) {
                const std::size_t ue = static_cast<std::size_t>(e);
                ktri.data.insert(ktri.data.end(), s.K_tri[ue].begin(), s.K_tri[ue].end());
                kd.data.insert(kd.data.end(), s.D[ue].begin(), s.D[ue].end());
                kdk.data.insert(kdk.data.end(), s.dK1_dsigma[ue].begin(), s.dK1_dsigma[ue].end());
            }
        }
        arrays.push_back(std::move(ktri));
        arrays.push_back(std::move(kd));
        arrays.push_back(std::move(kdk));
    }
    fs::create_directories(c.out_dir);
    write_artifact(artifact_path(c, "controller.bin"), c.hash(), arrays);

    // verification pass
    const double dec_res = decoupling_residual(p.matrices, p.dec, 51, 50);
    double gain_err = 0.0;
    for (std::size_t it = 0; it < p.matrices.n_t(); ++it) {
        const double t = p.matrices.t_grid[it];
        gain_err = std::max(gain_err, (p.matrices.F(t) - p.matrices.S(t) * p.gain.K[it] -
                                       p.dec.F_bar)
                                          .cwiseAbs()
                                          .maxCoeff());
    }
    std::ofstream rep(artifact_path(c, "residual_report.txt"));
    rep << std::setprecision(6);
    rep << "decoupling_pde_relative_residual " << dec_res << "\n";
    rep << "gain_identity_max_error " << gain_err << "\n";
    for (const auto& s : p.kernels.snapshots) {
        const double kres = kernel_residual(p.matrices, s, c.target_params());
        rep << "kernel_residual t=" << s.t_k << " " << kres
            << " lambda1=" << s.lambda[0] << " lambda2=" << s.lambda[1]
            << " ordering=" << (s.lambda[0] > s.lambda[1] ? "1>2" : "1<2") << "\n";
        double d_lower = 0.0, d_upper = 0.0, d_diag = 0.0;
        for (std::size_t is = 0; is < s.n_sigma(); ++is) {
            d_upper = std::max(d_upper, std::abs(s.D[1][is]));
            d_lower = std::max(d_lower, std::abs(s.D[2][is]));
            d_diag = std::max({d_diag, std::abs(s.D[0][is]), std::abs(s.D[3][is])});
        }
        rep << "  D_structure upper=" << d_upper << " lower=" << d_lower << " diag=" << d_diag
            << "\n";
    }
    std::cout << "precompute: wrote " << artifact_path(c, "controller.bin") << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& c, const std::string& mode) {
    if (mode != "closed-loop" && mode != "feedforward") {
        throw ConfigError("simulate: mode must be closed-loop or feedforward");
    }
    const bool closed = (mode == "closed-loop");
    require_hash(c, "reference.bin");
    if (closed) require_hash(c, "controller.bin");

    Pipeline p = build_pipeline(c, closed);
    ScenarioArtifacts art;
    art.params = &c.material;
    art.geometry = &c.geometry;
    art.bundle = &p.bundle;
    if (closed) {
        art.hc = &p.hc;
        art.matrices = &p.matrices;
        art.dec = &p.dec;
        art.kernels = &p.kernels;
    }
    const TrajectoryLog log = closed ? run_closed_loop(c.sim, art) : run_feedforward(c.sim, art);

    fs::create_directories(c.out_dir);
    const std::string tag = closed ? "closed_loop" : "feedforward";
    write_log_csv(artifact_path(c, ("log_" + tag + ".csv").c_str()), log);
    write_fields_artifact(c, "fields_" + tag + ".bin", log);

    const RunMetrics m = metrics(log, p.bundle);
    std::cout << "simulate (" << mode << "): settling_time_h "
              << (m.settling_time < 0 ? -1.0 : m.settling_time / 3600.0) << ", max|dgamma|_mm "
              << m.max_abs_dgamma * 1e3 << ", final dgamma_mm " << m.final_dgamma * 1e3
              << ", undershoot_K_per_cm " << m.undershoot / 100.0 << "\n";
    return 0;
}

int cmd_report(const RunConfig& c) {
    FlatOutputTrajectory flat(c.scenario, c.geometry, c.numerics.max_flat_order);
    const ReferenceBundle b = build_references(flat, c.material, c.geometry, c.numerics.n_sigma,
                                               c.numerics.dt_reference, c.numerics.series_order);
    std::ofstream rep(artifact_path(c, "report_metrics.txt"));
    rep << std::setprecision(8);
    bool any = false;
    for (const std::string tag : {"closed_loop", "feedforward"}) {
        const std::string log_path = artifact_path(c, ("log_" + tag + ".csv").c_str());
        if (!fs::exists(log_path)) continue;
        any = true;
        TrajectoryLog log = read_log_csv(log_path);
        const std::string fields_path = artifact_path(c, ("fields_" + tag + ".bin").c_str());
        if (fs::exists(fields_path)) read_fields_artifact(c, "fields_" + tag + ".bin", &log);

        const RunMetrics m = metrics(log, b);
        rep << "[" << tag << "]\n";
        rep << "settling_time_h " << (m.settling_time < 0 ? -1.0 : m.settling_time / 3600.0)
            << "\n";
        rep << "max_abs_dgamma_mm " << m.max_abs_dgamma * 1e3 << "\n";
        rep << "final_dgamma_mm " << m.final_dgamma * 1e3 << "\n";
        rep << "undershoot_K_per_cm " << m.undershoot / 100.0 << "\n";
        rep << "max_field_error_K " << m.max_field_error << "\n";

        std::ofstream fig2(artifact_path(c, ("fig2_errors_" + tag + ".csv").c_str()));
        fig2 << "t_h,dgamma_mm,grad_error_K_per_cm\n" << std::setprecision(10);
        for (std::size_t k = 0; k < log.steps(); ++k) {
            fig2 << log.t[k] / 3600.0 << ',' << (log.gamma[k] - log.gamma_ref[k]) * 1e3 << ','
                 << (log.grad_1[k] - log.grad_1_ref[k]) / 100.0 << '\n';
        }
        for (int phase = 1; phase <= 2; ++phase) {
            const auto& snaps = (phase == 1) ? log.snapshot_T1 : log.snapshot_T2;
            if (snaps.empty()) continue;
            std::ofstream fig3(artifact_path(
                c, ("fig3_logerr_" + tag + "_phase" + std::to_string(phase) + ".csv").c_str()));
            fig3 << "# log10 relative field error; first column t_h, then sigma nodes\n";
            fig3 << std::setprecision(8);
            for (std::size_t s = 0; s < snaps.size(); ++s) {
                auto ref = b.field_column(b.T[phase - 1], log.snapshot_t[s]);
                if (ref.size() != snaps[s].size()) ref = resample_unit_grid(ref, snaps[s].size());
                const auto err = log_relative_field_error(snaps[s], ref);
                fig3 << log.snapshot_t[s] / 3600.0;
                for (const double e : err) fig3 << ',' << e;
                fig3 << '\n';
            }
        }
    }
    if (!any) throw ConfigError("report: no simulation logs found in " + c.out_dir);
    std::cout << "report: wrote " << artifact_path(c, "report_metrics.txt") << "\n";
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"two-phase crystal growth: trajectory planning, controller synthesis, simulation"};
    app.fallthrough();
    std::string config_path, out_override, mode = "closed-loop";
    bool seedless = false;
    app.add_option("--config", config_path, "JSON config path (defaults used when omitted)");
    app.add_option("--out", out_override, "output directory override");
    app.add_flag("--seedless", seedless, "reserved; all runs are deterministic");

    CLI::App* plan = app.add_subcommand("plan", "compute the reference trajectories");
    CLI::App* pre = app.add_subcommand("precompute", "synthesize decoupling and kernel tables");
    CLI::App* sim = app.add_subcommand("simulate", "run the growth scenario");
    sim->add_option("--mode", mode, "closed-loop or feedforward")
        ->check(CLI::IsMember({"closed-loop", "feedforward"}));
    CLI::App* rep = app.add_subcommand("report", "derive metrics and plot data from logs");
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig config = load_config(config_path);
        if (!out_override.empty()) config.out_dir = out_override;
        if (plan->parsed()) return cmd_plan(config);
        if (pre->parsed()) return cmd_precompute(config);
        if (sim->parsed()) return cmd_simulate(config, mode);
        if (rep->parsed()) return cmd_report(config);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SimulationAbort& e) {
        std::cerr << "simulation abort: " << e.what() << "\n";
        return 4;
    } catch (const SynthesisError& e) {
        std::cerr << "synthesis error: " << e.what() << "\n";
        return 3;
    } catch (const AssumptionViolation& e) {
        std::cerr << "assumption violated: " << e.what() << "\n";
        return 3;
    } catch (const CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace vgf
