#include "nlkpz/nonlocal_operator.hpp"

#include <algorithm>
#include <cmath>

#include "nlkpz/error.hpp"

namespace nlkpz {

NonlocalOperator::NonlocalOperator(std::shared_ptr<const Grid> grid, DiscreteKernel dk, Nonlinearity G,
                                   std::optional<Rescaling> rescaling)
    : grid_(std::move(grid)), dk_(std::move(dk)), G_(std::move(G)), rescaling_(rescaling) {
    if (!grid_) throw ConfigError("operator needs a grid");
    if (dk_.dim != grid_->dim()) throw ConfigError("kernel and grid dimensions differ");
    if (std::abs(dk_.h - grid_->h()) > 1e-12 * grid_->h()) throw ConfigError("kernel was discretized on a different spacing");
    if (dk_.reach > grid_->collar_layers()) throw ConfigError("collar is narrower than the kernel reach");
    if (G_.node_count() != 0 && G_.node_count() != grid_->size()) {
        throw ConfigError("nonlinearity is sampled on a different node count than the grid");
    }
    flat_.reserve(dk_.size());
    for (const auto& o : dk_.offsets) flat_.push_back(grid_->flat_offset(o));

    if (rescaling_) {
        if (!(rescaling_->epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        moment_used_ = dk_.mode == Normalization::mass_moment ? dk_.second_moment : dk_.continuum_second_moment;
        if (!(moment_used_ > 0.0)) throw ConfigError("kernel second moment must be positive");
        if (G_.node_count() == 0) {
            scale_const_ = 2.0 / (moment_used_ * G_.g(0, 0.0));
            scale_max_ = scale_const_;
        } else {
            scale_.resize(grid_->size());
            scale_max_ = 0.0;
            for (std::size_t i = 0; i < scale_.size(); ++i) {
                scale_[i] = 2.0 / (moment_used_ * G_.g(i, 0.0));
                if (grid_->kind(i) == NodeKind::interior) scale_max_ = std::max(scale_max_, scale_[i]);
            }
        }
    } else {
        moment_used_ = dk_.second_moment;
    }
}

double NonlocalOperator::lipschitz_bound() const noexcept { return 2.0 * G_.alpha2() * scale_max_ * dk_.mass; }

namespace {

template <class Law>
void apply_law(const Law& law, const NonlocalOperator& op, std::span<const std::ptrdiff_t> flat,
               std::span<const double> w, std::span<const double> u, std::span<double> out) {
    const auto interior = op.grid().interior();
    const auto n = static_cast<std::ptrdiff_t>(interior.size());
    const std::size_t m = w.size();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::size_t x = interior[k];
        const auto local = law.at(x);
        const double ux = u[x];
        const double* ub = u.data() + x;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += w[j] * local.flux(ub[flat[j]] - ux);
        out[x] = op.scale(x) * acc;
    }
}

}  // namespace

void NonlocalOperator::apply(std::span<const double> u, std::span<double> out) const {
    const Grid& g = *grid_;
    for (std::size_t c : g.collar()) out[c] = 0.0;
    G_.visit([&](const auto& law) { apply_law(law, *this, flat_, dk_.weights, u, out); });
}

Field nonlocal_rhs(std::shared_ptr<const Grid> grid, const DiscreteKernel& dk, const Nonlinearity& G,
                   const Field& u, std::span<const double> collar, std::optional<Rescaling> rescaling) {
    if (u.size() != grid->size()) throw ConfigError("field does not live on the given grid");
    if (collar.size() != grid->collar().size()) {
        throw ConfigError("expected " + std::to_string(grid->collar().size()) + " collar values, got " +
                          std::to_string(collar.size()));
    }
    std::vector<double> full(u.values().begin(), u.values().end());
    for (std::size_t k = 0; k < collar.size(); ++k) full[grid->collar()[k]] = collar[k];
    for (double v : full) {
        if (!std::isfinite(v)) throw ConfigError("non-finite value in rhs input");
    }
    NonlocalOperator op(grid, dk, G, rescaling);
    Field out(grid, u.t());
    op.apply(full, out.values());
    return out;
}

}  // namespace nlkpz
