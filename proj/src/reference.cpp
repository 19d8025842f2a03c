#include "nlkpz/reference.hpp"

#include <cmath>
#include <random>

#include "nlkpz/error.hpp"

namespace nlkpz {

HopfColeSolution::HopfColeSolution(double mu, double amplitude, double variance, int dim)
    : mu_(mu), a_(amplitude), s0_(variance), dim_(dim) {
    if (mu == 0.0 || !std::isfinite(mu)) throw ConfigError("Hopf-Cole solution needs mu != 0");
    if (!(amplitude > -1.0)) throw ConfigError("Hopf-Cole amplitude must exceed -1");
    if (!(variance > 0.0)) throw ConfigError("Hopf-Cole variance must be positive");
    if (dim != 1 && dim != 2) throw ConfigError("Hopf-Cole dimension must be 1 or 2");
}

double HopfColeSolution::amplitude_at(double t) const noexcept {
    return a_ * std::pow(s0_ / variance_at(t), 0.5 * dim_);
}

double HopfColeSolution::gaussian(const Point& x, double t) const noexcept {
    const double s = variance_at(t);
    double r2 = x[0] * x[0];
    if (dim_ == 2) r2 += x[1] * x[1];
    return std::pow(s0_ / s, 0.5 * dim_) * std::exp(-r2 / (2.0 * s));
}

double HopfColeSolution::w(const Point& x, double t) const noexcept { return 1.0 + a_ * gaussian(x, t); }

Derivatives HopfColeSolution::w_derivatives(const Point& x, double t) const noexcept {
    const double s = variance_at(t);
    const double ag = a_ * gaussian(x, t);
    double r2 = x[0] * x[0];
    if (dim_ == 2) r2 += x[1] * x[1];
    Derivatives d;
    d.grad[0] = -x[0] / s * ag;
    if (dim_ == 2) d.grad[1] = -x[1] / s * ag;
    d.laplacian = (r2 / (s * s) - dim_ / s) * ag;
    d.t = d.laplacian;
    return d;
}

double HopfColeSolution::v(const Point& x, double t) const noexcept {
    return std::log1p(a_ * gaussian(x, t)) / mu_;
}

Derivatives HopfColeSolution::v_derivatives(const Point& x, double t) const noexcept {
    const Derivatives dw = w_derivatives(x, t);
    const double ww = w(x, t);
    const double mw = mu_ * ww;
    Derivatives d;
    d.t = dw.t / mw;
    d.grad[0] = dw.grad[0] / mw;
    d.grad[1] = dw.grad[1] / mw;
    const double g2 = dw.grad[0] * dw.grad[0] + dw.grad[1] * dw.grad[1];
    d.laplacian = dw.laplacian / mw - g2 / (mw * ww);
    return d;
}

double residual_kpz(const HopfColeSolution& sol, std::span<const SpaceTimePoint> samples) {
    double worst = 0.0;
    for (const auto& p : samples) {
        const Derivatives d = sol.v_derivatives(p.x, p.t);
        const double g2 = d.grad[0] * d.grad[0] + d.grad[1] * d.grad[1];
        worst = std::max(worst, std::abs(d.t - d.laplacian - sol.mu() * g2));
    }
    return worst;
}

double residual_heat(const HopfColeSolution& sol, std::span<const SpaceTimePoint> samples) {
    double worst = 0.0;
    for (const auto& p : samples) {
        const Derivatives d = sol.w_derivatives(p.x, p.t);
        worst = std::max(worst, std::abs(d.t - d.laplacian));
    }
    return worst;
}

std::vector<SpaceTimePoint> random_space_time(int dim, double extent, double t_max, std::size_t count,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xs(-extent, extent), ts(0.0, t_max);
    std::vector<SpaceTimePoint> out(count);
    for (auto& p : out) {
        p.x[0] = xs(rng);
        if (dim == 2) p.x[1] = xs(rng);
        p.t = ts(rng);
    }
    return out;
}

DirichletData dirichlet_data_from(const HopfColeSolution& sol) {
    DirichletData d;
    d.u0 = [sol](const Point& x) { return sol.v(x, 0.0); };
    d.boundary = [sol](const Point& x, double t) { return sol.v(x, t); };
    return d;
}

Field sample_reference(const HopfColeSolution& sol, std::shared_ptr<const Grid> grid, double t) {
    Field f(grid, t);
    for (std::size_t i = 0; i < grid->size(); ++i) f[i] = sol.v(grid->point(i), t);
    return f;
}

}  // namespace nlkpz
