#ifndef VGF_CLI_HPP
#define VGF_CLI_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vgf/decoupling.hpp"
#include "vgf/kernel.hpp"
#include "vgf/linearization.hpp"
#include "vgf/physics.hpp"
#include "vgf/reference.hpp"
#include "vgf/sim.hpp"

namespace vgf {

struct NumericsConfig {
    std::size_t n_sigma = 101;
    double dt_reference = 10.0;      ///< [s], coefficient table step
    int series_order = 20;           ///< power-series truncation of both expansions
    std::size_t kernel_snapshots = 10;
    int kernel_lattice_factor = 4;
    std::size_t max_flat_order = 14;
};

struct GainsConfig {
    std::array<double, 2> f_bar_diag = {-2e-4, -2e-4};  ///< [1/s]
    std::array<double, 2> mu = {3e-4, 3e-4};            ///< [1/s]
    std::string kernel_bc_mode = "triangular";          ///< or "literal"
};

struct RunConfig {
    MaterialParams material;
    GeometryParams geometry;
    ScenarioSpec scenario;
    GainsConfig gains;
    NumericsConfig numerics;
    SimConfig sim;
    std::string out_dir = "out";

    void validate() const;
    std::uint64_t hash() const;  ///< of the canonical JSON form
    TargetParams target_params() const;
    Eigen::Matrix2d F_bar() const;
};

RunConfig default_config();
/// Load from JSON; an empty path yields the defaults.
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& config);

/// Simple binary artifact container: magic "VGFB", u32 version, u64 config
/// hash, then named little-endian f64 arrays with explicit shapes.
struct NamedArray {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;
};
void write_artifact(const std::string& path, std::uint64_t config_hash,
                    const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_artifact(const std::string& path, std::uint64_t* config_hash_out);

/// Everything the controller synthesis produces, rebuilt deterministically
/// from a config (artifact files carry the config hash for consistency).
struct Pipeline {
    FlatOutputTrajectory flat;
    ReferenceBundle bundle;
    LinearizedCoefficients coeffs;
    HopfColeFactors hc;
    ExtendedSystemMatrices matrices;
    OdeGain gain;
    DecouplingSolution dec;
    KernelSet kernels;  ///< empty unless built with kernels
};
Pipeline build_pipeline(const RunConfig& config, bool with_kernels);

/// Controller-step trajectory log as CSV ("# vgf-log v1" header, 12 columns).
void write_log_csv(const std::string& path, const TrajectoryLog& log);
TrajectoryLog read_log_csv(const std::string& path);

int cmd_plan(const RunConfig& config);
int cmd_precompute(const RunConfig& config);
int cmd_simulate(const RunConfig& config, const std::string& mode);
int cmd_report(const RunConfig& config);

/// Argument parsing, dispatch and exception-to-exit-code mapping.
int run_cli(int argc, char** argv);

}  // namespace vgf

#endif
