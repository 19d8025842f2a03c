#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlkpz/error.hpp"
#include "nlkpz/evolution.hpp"
#include "nlkpz/summation.hpp"

namespace nlkpz {

namespace {

double l1_interior(const Grid& g, std::span<const double> a, std::span<const double> b) {
    const auto interior = g.interior();
    return g.cell_volume() *
           pairwise_sum(interior, [&](std::size_t x) { return std::abs(a[x] - b[x]); });
}

}  // namespace

PicardResult picard_solve(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg) {
    const PicardConfig& pc = cfg.picard;
    if (!(pc.tolerance > 0.0)) throw ConfigError("picard tolerance must be positive");
    if (pc.max_sweeps < 1) throw ConfigError("picard max_sweeps must be positive");
    double dtp = pc.dt ? *pc.dt : (cfg.dt ? *cfg.dt : stable_dt(sys, cfg));
    if (!(dtp > 0.0)) throw ConfigError("picard dt must be positive");
    const auto nt = static_cast<std::size_t>(std::max(1.0, std::ceil(sys.T / dtp - 1e-9)));
    dtp = sys.T / static_cast<double>(nt);

    const Grid& g = *sys.grid;
    const NonlocalOperator& op = *sys.op;
    const DiscreteKernel& dk = op.kernel();

    PicardResult res;
    // L1 Lipschitz constant of the right-hand side in the form
    // alpha2 scale |J_h|_inf (|Omega| + |supp J|), never below the direct
    // bound 2 alpha2 scale mass.
    const double omega = static_cast<double>(g.interior().size()) * g.cell_volume();
    const double a2s = op.nonlinearity().alpha2() * op.scale_max();
    res.C_tilde = std::max(a2s * dk.sup_density() * (omega + dk.support_measure()), 2.0 * a2s * dk.mass);
    res.M = pc.M ? *pc.M : 2.0 * res.C_tilde;

    res.times.resize(nt + 1);
    std::vector<double> weight(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) {
        res.times[k] = k == nt ? sys.T : static_cast<double>(k) * dtp;
        weight[k] = std::exp(-res.M * res.times[k]);
    }

    // Trapezoid sum of exp(M tau) against the weight at t_k.
    double predicted = 0.0;
    double running = 0.0;
    for (std::size_t k = 1; k <= nt; ++k) {
        running += 0.5 * dtp * (std::exp(res.M * res.times[k - 1]) + std::exp(res.M * res.times[k]));
        predicted = std::max(predicted, weight[k] * res.C_tilde * running);
    }
    res.predicted_factor = predicted;

    const std::size_t n = g.size();
    std::vector<std::vector<double>> v(nt + 1, std::vector<double>(sys.initial.values().begin(), sys.initial.values().end()));
    for (std::size_t k = 1; k <= nt; ++k) sys.fill_collar(v[k], res.times[k]);
    std::vector<std::vector<double>> next = v;
    std::vector<std::vector<double>> F(nt + 1, std::vector<double>(n, 0.0));
    const auto interior = g.interior();

    int above_one = 0;
    for (int sweep = 1; sweep <= pc.max_sweeps; ++sweep) {
        for (std::size_t k = 0; k <= nt; ++k) op.apply(v[k], F[k]);
        double diff = 0.0;
        for (std::size_t k = 1; k <= nt; ++k) {
            const double hdt = 0.5 * (res.times[k] - res.times[k - 1]);
            for (std::size_t x : interior) next[k][x] = next[k - 1][x] + hdt * (F[k - 1][x] + F[k][x]);
            diff = std::max(diff, weight[k] * l1_interior(g, next[k], v[k]));
        }
        for (std::size_t k = 1; k <= nt; ++k) {
            for (std::size_t x : interior) {
                if (!std::isfinite(next[k][x])) throw EvolutionError("non-finite Picard iterate", 0.0);
            }
        }
        std::swap(v, next);
        res.sweeps = sweep;
        res.diffs.push_back(diff);
        if (res.diffs.size() >= 2) {
            const double prev = res.diffs[res.diffs.size() - 2];
            const double factor = prev > 0.0 ? diff / prev : 0.0;
            res.factors.push_back(factor);
            above_one = factor >= 1.0 ? above_one + 1 : 0;
            if (above_one >= 2) {
                std::ostringstream msg;
                msg << "Picard iteration is not contracting: factors";
                for (double f : res.factors) msg << ' ' << f;
                msg << "; M = " << res.M << ", C~ = " << res.C_tilde;
                throw ContractionError(msg.str());
            }
        }
        if (diff < pc.tolerance) {
            res.converged = true;
            break;
        }
    }

    res.trajectory.reserve(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) res.trajectory.emplace_back(sys.grid, std::move(v[k]), res.times[k]);
    return res;
}

}  // namespace nlkpz
