#ifndef VGF_VERIFY_HPP
#define VGF_VERIFY_HPP

#include <cstddef>

#include "vgf/decoupling.hpp"
#include "vgf/kernel.hpp"
#include "vgf/linearization.hpp"

namespace vgf {

/// Sup-norm residual of the decoupling PDE on a check grid, normalized by the
/// largest participating term. Time derivative by central difference on the
/// coefficient grid, sigma derivatives analytically from the series.
double decoupling_residual(const ExtendedSystemMatrices& matrices, const DecouplingSolution& dec,
                           std::size_t n_sigma_check, std::size_t n_t_check);

/// Sup-norm residual of the stationary kernel PDE at interior nodes of the
/// snapshot triangle (second differences on the sigma grid), normalized by
/// the largest participating term. Nodes within a few cells of an element's
/// discontinuity ray or of the diagonal are excluded; the solution is only
/// piecewise smooth there.
double kernel_residual(const ExtendedSystemMatrices& matrices, const KernelSnapshot& snap,
                       const TargetParams& target);

}  // namespace vgf

#endif
