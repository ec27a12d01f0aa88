#ifndef VGF_ERRORS_HPP
#define VGF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vgf {

/// Configuration rejected during validation (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The interface left the admissible interval, or a precondition tied to it failed.
struct AssumptionViolation : std::runtime_error {
    explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Offline synthesis (gains, decoupling, kernels) failed (CLI exit code 3).
struct SynthesisError : std::runtime_error {
    explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

/// Simulation aborted at runtime (CLI exit code 4).
struct SimulationAbort : std::runtime_error {
    explicit SimulationAbort(const std::string& what) : std::runtime_error(what) {}
};

/// A capability limit was exceeded (e.g. derivative order above the stored maximum).
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vgf

#endif
