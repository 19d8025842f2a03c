#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nlkpz/grid.hpp"
#include "nlkpz/kernel.hpp"
#include "nlkpz/nonlinearity.hpp"

namespace nlkpz {

/// Rescaled mode: the operator is multiplied by 2 / (C_used G(x,0)), where
/// C_used is the second moment carried by the discrete kernel (C_h in
/// mass_moment mode, the continuum eps^2 C(J) otherwise).
struct Rescaling {
    double epsilon = 1.0;
};

/// Discrete nonlocal right-hand side
///   rhs(x) = scale(x) sum_j w_j flux(G, x, u(x + z_j) - u(x))
/// on interior nodes; collar outputs are zero.
class NonlocalOperator {
public:
    NonlocalOperator(std::shared_ptr<const Grid> grid, DiscreteKernel dk, Nonlinearity G,
                     std::optional<Rescaling> rescaling = std::nullopt);

    const Grid& grid() const noexcept { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const noexcept { return grid_; }
    const DiscreteKernel& kernel() const noexcept { return dk_; }
    const Nonlinearity& nonlinearity() const noexcept { return G_; }
    const std::optional<Rescaling>& rescaling() const noexcept { return rescaling_; }

    /// Second moment entering the scale factor, physical units.
    double moment_used() const noexcept { return moment_used_; }
    double scale(std::size_t node) const noexcept { return scale_.empty() ? scale_const_ : scale_[node]; }
    double scale_max() const noexcept { return scale_max_; }
    /// 2 alpha2 scale_max mass.
    double lipschitz_bound() const noexcept;

    /// `u` and `out` span the whole grid. Parallel over interior nodes; each
    /// node is summed sequentially so results do not depend on thread count.
    void apply(std::span<const double> u, std::span<double> out) const;

private:
    std::shared_ptr<const Grid> grid_;
    DiscreteKernel dk_;
    Nonlinearity G_;
    std::optional<Rescaling> rescaling_;
    std::vector<std::ptrdiff_t> flat_;
    double moment_used_ = 0.0;
    double scale_const_ = 1.0;
    std::vector<double> scale_;
    double scale_max_ = 1.0;
};

/// Checked one-shot evaluation. `collar` holds one value per collar node, in
/// grid.collar() order. Throws ConfigError on a missing collar value or a
/// non-finite input.
Field nonlocal_rhs(std::shared_ptr<const Grid> grid, const DiscreteKernel& dk, const Nonlinearity& G,
                   const Field& u, std::span<const double> collar,
                   std::optional<Rescaling> rescaling = std::nullopt);

}  // namespace nlkpz
