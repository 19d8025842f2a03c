#include "nlkpz/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "nlkpz/error.hpp"

namespace nlkpz {

namespace {

double spacing(const OperatorSpec& s) {
    if (s.h) return *s.h;
    if (s.k_pts < 1) throw ConfigError("k_pts must be positive");
    const double radius = s.epsilon ? *s.epsilon * s.kernel.radius() : s.kernel.radius();
    return radius / s.k_pts;
}

DiscreteKernel discretize_spec(const OperatorSpec& s, double h) {
    if (s.epsilon) {
        if (!(*s.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        return discretize(rescale(s.kernel, *s.epsilon), h, s.normalization);
    }
    return discretize(s.kernel, h, s.normalization);
}

Nonlinearity resolve_nonlinearity(const OperatorSpec& s, const Grid& g) {
    if (!s.mu) return s.G;
    std::vector<double> mu(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) mu[i] = s.mu(g.point(i));
    return Nonlinearity::kpz(MuField::sampled(std::move(mu)));
}

SemiDiscreteSystem assemble(std::shared_ptr<const Grid> grid, const OperatorSpec& spec, DiscreteKernel dk,
                            const SpaceFn& u0, double T) {
    if (!u0) throw ConfigError("initial datum missing");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon T must be positive");
    std::optional<Rescaling> resc;
    if (spec.epsilon) resc = Rescaling{*spec.epsilon};
    auto G = resolve_nonlinearity(spec, *grid);
    SemiDiscreteSystem sys;
    sys.op = std::make_shared<const NonlocalOperator>(grid, std::move(dk), std::move(G), resc);
    sys.grid = std::move(grid);
    sys.T = T;
    sys.initial = Field(sys.grid, 0.0);
    for (std::size_t node : sys.grid->interior()) {
        const double v = u0(sys.grid->point(node));
        if (!std::isfinite(v)) throw ConfigError("initial datum is not finite");
        sys.initial[node] = v;
        sys.u0_sup = std::max(sys.u0_sup, std::abs(v));
    }
    return sys;
}

}  // namespace

void SemiDiscreteSystem::fill_collar(std::span<double> u, double t) const {
    if (!boundary) {
        for (std::size_t c : grid->collar()) u[c] = 0.0;
        return;
    }
    for (std::size_t c : grid->collar()) u[c] = boundary(grid->point(c), t);
}

double truncation_half_width(const CauchyProblem& p, const DiscreteKernel& dk, double effective_diffusivity) {
    if (p.half_width) return *p.half_width;
    const double spread = std::sqrt(p.initial_width * p.initial_width + 2.0 * effective_diffusivity * p.T);
    return 5.0 * dk.support_radius + 8.0 * spread;
}

SemiDiscreteSystem make_system(const DirichletProblem& p) {
    const double h = spacing(p.op);
    auto dk = discretize_spec(p.op, h);
    auto grid = std::make_shared<const Grid>(build_grid(p.box, h, dk.support_radius));
    auto sys = assemble(grid, p.op, std::move(dk), p.u0, p.T);
    sys.boundary = p.boundary;
    sys.fill_collar(sys.initial.values(), 0.0);
    for (std::size_t c : sys.grid->collar()) {
        if (!std::isfinite(sys.initial[c])) throw ConfigError("boundary datum is not finite");
    }
    return sys;
}

SemiDiscreteSystem make_system(const CauchyProblem& p) {
    const double h = spacing(p.op);
    auto dk = discretize_spec(p.op, h);
    // Diffusivity of the small-gradient limit: (1/2) C_used scale G(x,0),
    // which is one for rescaled operators.
    double diffusivity = 0.5 * dk.second_moment;
    if (p.op.epsilon) diffusivity = 1.0;
    double L = truncation_half_width(p, dk, diffusivity);
    if (!(L > dk.support_radius)) throw ConfigError("truncation half-width must exceed the kernel radius");
    L = std::ceil(L / h - 1e-9) * h;
    Box box{p.dim, {-L, p.dim == 2 ? -L : 0.0}, {L, p.dim == 2 ? L : 0.0}};
    auto grid = std::make_shared<const Grid>(build_grid(box, h, dk.support_radius));
    const int reach = dk.reach;
    auto sys = assemble(grid, p.op, std::move(dk), p.u0, p.T);
    sys.cauchy = true;
    sys.contamination_tol = p.contamination_tol;
    sys.monitor = sys.grid->edge_ring(reach);
    return sys;
}

double stable_dt(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg) {
    if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) throw ConfigError("cfl_safety must lie in (0, 1]");
    return cfg.cfl_safety / sys.op->lipschitz_bound();
}

namespace {

void check_finite(const Field& u, double last_valid) {
    for (std::size_t node : u.grid().interior()) {
        if (!std::isfinite(u[node])) {
            throw EvolutionError("non-finite state after t = " + std::to_string(last_valid), last_valid);
        }
    }
}

double monitor_sup(const SemiDiscreteSystem& sys, const Field& u) {
    double m = 0.0;
    for (std::size_t node : sys.monitor) m = std::max(m, std::abs(u[node]));
    return m;
}

class Stepper {
public:
    Stepper(const SemiDiscreteSystem& sys, Method method) : sys_(sys), method_(method) {
        const std::size_t n = sys.grid->size();
        k1_.assign(n, 0.0);
        if (method == Method::rk4) {
            k2_.assign(n, 0.0);
            k3_.assign(n, 0.0);
            k4_.assign(n, 0.0);
            stage_.assign(n, 0.0);
        }
    }

    void step(std::span<double> u, double t, double dt) {
        const auto interior = sys_.grid->interior();
        const NonlocalOperator& op = *sys_.op;
        if (method_ == Method::euler) {
            op.apply(u, k1_);
            for (std::size_t x : interior) u[x] += dt * k1_[x];
            sys_.fill_collar(u, t + dt);
            return;
        }
        const double half = 0.5 * dt;
        op.apply(u, k1_);
        std::copy(u.begin(), u.end(), stage_.begin());
        for (std::size_t x : interior) stage_[x] = u[x] + half * k1_[x];
        sys_.fill_collar(stage_, t + half);
        op.apply(stage_, k2_);
        for (std::size_t x : interior) stage_[x] = u[x] + half * k2_[x];
        op.apply(stage_, k3_);
        for (std::size_t x : interior) stage_[x] = u[x] + dt * k3_[x];
        sys_.fill_collar(stage_, t + dt);
        op.apply(stage_, k4_);
        const double sixth = dt / 6.0;
        for (std::size_t x : interior) u[x] += sixth * (k1_[x] + 2.0 * k2_[x] + 2.0 * k3_[x] + k4_[x]);
        sys_.fill_collar(u, t + dt);
    }

private:
    const SemiDiscreteSystem& sys_;
    Method method_;
    std::vector<double> k1_, k2_, k3_, k4_, stage_;
};

}  // namespace

EvolveResult evolve(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg, const EvolveOptions& opts) {
    if (cfg.method == Method::picard) throw ConfigError("the picard method is run through picard_solve");
    const double limit = 1.0 / sys.op->lipschitz_bound();
    double dt_max = stable_dt(sys, cfg);
    if (cfg.dt) {
        if (!(*cfg.dt > 0.0)) throw ConfigError("dt must be positive");
        if (*cfg.dt > limit * (1.0 + 1e-12)) {
            throw ConfigError("dt = " + std::to_string(*cfg.dt) + " exceeds the stability limit " + std::to_string(limit));
        }
        dt_max = *cfg.dt;
    }

    std::vector<double> stops = opts.sample_times;
    for (double s : stops) {
        if (!(s >= 0.0 && s <= sys.T * (1.0 + 1e-12))) throw ConfigError("sample time outside [0, T]");
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    const bool sample_at_zero = !stops.empty() && stops.front() == 0.0;
    std::vector<bool> is_sample;
    std::vector<double> breaks;
    for (double s : stops) {
        if (s > 0.0) {
            breaks.push_back(std::min(s, sys.T));
            is_sample.push_back(true);
        }
    }
    if (breaks.empty() || breaks.back() < sys.T) {
        breaks.push_back(sys.T);
        is_sample.push_back(false);
    }

    EvolveResult res;
    res.dt = dt_max;
    Field u = sys.initial;
    if (sample_at_zero && opts.on_sample) opts.on_sample(u);

    Stepper stepper(sys, cfg.method);
    double t = 0.0;
    for (std::size_t b = 0; b < breaks.size(); ++b) {
        const double t0 = t;
        const double span = breaks[b] - t0;
        if (span > 0.0) {
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt_max - 1e-9)));
            const double dt = span / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double ts = t0 + static_cast<double>(i) * dt;
                const double te = i + 1 == n ? breaks[b] : t0 + static_cast<double>(i + 1) * dt;
                stepper.step(u.values(), ts, te - ts);
                u.set_t(te);
                ++res.steps;
                check_finite(u, ts);
                if (sys.cauchy && monitor_sup(sys, u) > sys.contamination_tol * sys.u0_sup) {
                    res.valid = false;
                    res.invalid_since = te;
                    res.reason = "truncation contamination at t = " + std::to_string(te);
                    res.final = std::move(u);
                    return res;
                }
                if (opts.on_step) opts.on_step(u, te - ts);
            }
        }
        t = breaks[b];
        if (is_sample[b] && opts.on_sample) opts.on_sample(u);
    }
    res.final = std::move(u);
    return res;
}

ComparisonResult evolve_comparison_pair(const SemiDiscreteSystem& lower, const SemiDiscreteSystem& upper,
                                        const IntegratorConfig& cfg, std::vector<double> sample_times) {
    if (lower.grid->size() != upper.grid->size() || lower.grid->h() != upper.grid->h()) {
        throw ConfigError("comparison pair must share one grid");
    }
    std::vector<Field> lo, up;
    EvolveOptions a;
    a.sample_times = sample_times;
    a.on_sample = [&](const Field& f) { lo.push_back(f); };
    EvolveOptions b;
    b.sample_times = sample_times;
    b.on_sample = [&](const Field& f) { up.push_back(f); };
    evolve(lower, cfg, a);
    evolve(upper, cfg, b);

    ComparisonResult res;
    for (std::size_t k = 0; k < std::min(lo.size(), up.size()); ++k) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t node : lower.grid->interior()) gap = std::min(gap, up[k][node] - lo[k][node]);
        res.times.push_back(lo[k].t());
        res.gaps.push_back(gap);
        res.min_gap = std::min(res.min_gap, gap);
    }
    return res;
}

}  // namespace nlkpz
