#include "nlkpz/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "nlkpz/error.hpp"
#include "nlkpz/evolution.hpp"
#include "nlkpz/nonlocal_operator.hpp"
#include "nlkpz/reference.hpp"
#include "nlkpz/surrogate.hpp"

namespace nlkpz {

namespace {

std::string fmt(double v, int digits = 17) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// CSV table with full-precision numbers.
class Table {
public:
    explicit Table(std::string header) { os_ << header << '\n'; }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
        os_ << '\n';
    }

    std::string str() const { return os_.str(); }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::ostringstream os_;
};

template <class Report>
std::string csv_of(const Report& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

double gate(const ExperimentConfig& cfg, const std::string& name) {
    auto it = cfg.gates.find(name);
    if (it == cfg.gates.end()) throw ConfigError("experiment " + cfg.id + " has no gate '" + name + "'");
    return it->second;
}

Box make_box(const ExperimentConfig& cfg) {
    Box box;
    box.dim = cfg.kernel.dim;
    for (int a = 0; a < box.dim; ++a) {
        box.lo[static_cast<std::size_t>(a)] = cfg.geometry.box[static_cast<std::size_t>(a)].first;
        box.hi[static_cast<std::size_t>(a)] = cfg.geometry.box[static_cast<std::size_t>(a)].second;
    }
    return box;
}

std::function<double(double)> mu_interpolant(const std::string& path) {
    auto samples = read_mu_csv(path);
    return [samples = std::move(samples)](double x) {
        if (x <= samples.front().first) return samples.front().second;
        if (x >= samples.back().first) return samples.back().second;
        auto it = std::upper_bound(samples.begin(), samples.end(), x,
                                   [](double v, const std::pair<double, double>& s) { return v < s.first; });
        const auto& [x1, m1] = *it;
        const auto& [x0, m0] = *(it - 1);
        return m0 + (m1 - m0) * (x - x0) / (x1 - x0);
    };
}

Nonlinearity make_nonlinearity(const NonlinearityConfig& n, double mu) {
    if (n.kind == "identity") return Nonlinearity::identity();
    return Nonlinearity::kpz(MuField::constant(mu));
}

OperatorSpec make_spec(const ExperimentConfig& cfg, std::optional<double> epsilon) {
    OperatorSpec spec;
    spec.kernel = make_kernel(cfg.kernel.profile, cfg.kernel.dim, cfg.kernel.radius);
    spec.epsilon = epsilon;
    spec.normalization = cfg.normalization;
    spec.G = make_nonlinearity(cfg.nonlinearity, cfg.nonlinearity.mu);
    if (!cfg.nonlinearity.mu_csv.empty()) {
        if (cfg.nonlinearity.kind != "kpz") throw ConfigError("a mu CSV requires nonlinearity kind 'kpz'");
        if (cfg.kernel.dim != 1) throw ConfigError("a mu CSV is supported in one dimension only");
        auto mu = mu_interpolant(cfg.nonlinearity.mu_csv);
        spec.mu = [mu](const Point& x) { return mu(x[0]); };
    }
    spec.h = cfg.geometry.h;
    spec.k_pts = cfg.geometry.k_pts;
    return spec;
}

std::optional<double> first_epsilon(const ExperimentConfig& cfg) {
    if (cfg.epsilons.empty()) return std::nullopt;
    return cfg.epsilons.front();
}

std::vector<double> uniform_times(double T, int count) {
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = T * i / (count - 1);
    t.back() = T;
    return t;
}

std::vector<double> geometric_times(double t_min, double T, int per_decade) {
    std::vector<double> t{0.0};
    for (int k = 0;; ++k) {
        const double tk = t_min * std::pow(10.0, static_cast<double>(k) / per_decade);
        if (tk > T * (1.0 + 1e-12)) break;
        t.push_back(std::min(tk, T));
    }
    if (t.back() < T) t.push_back(T);
    return t;
}

double gaussian(const Point& x, int dim, double amplitude, double variance) {
    double r2 = x[0] * x[0];
    if (dim == 2) r2 += x[1] * x[1];
    return amplitude * std::exp(-r2 / (2.0 * variance));
}

void require_explicit(const ExperimentConfig& cfg) {
    if (cfg.integrator.method == Method::picard) {
        throw ConfigError("experiment " + cfg.id + " needs an explicit integrator (euler or rk4)");
    }
}

// Convergence sweeps

struct Reference {
    std::function<double(const Point&, double)> v;
    SpaceFn u0;
    SpaceTimeFn boundary;
    bool surrogate = false;
    double error_estimate = 0.0;
};

Reference make_reference(const ExperimentConfig& cfg, bool cauchy) {
    const auto& r = cfg.reference;
    Reference ref;
    if (cfg.nonlinearity.kind != "kpz") throw ConfigError("convergence runs need nonlinearity kind 'kpz'");
    if (cfg.nonlinearity.mu_csv.empty()) {
        HopfColeSolution sol(cfg.nonlinearity.mu, r.amplitude, r.variance, cfg.kernel.dim);
        ref.v = [sol](const Point& x, double t) { return sol.v(x, t); };
        ref.u0 = [sol](const Point& x) { return sol.v(x, 0.0); };
        ref.boundary = [sol](const Point& x, double t) { return sol.v(x, t); };
        return ref;
    }
    if (cfg.kernel.dim != 1) throw ConfigError("variable-mu convergence runs are one-dimensional");
    const auto mu = mu_interpolant(cfg.nonlinearity.mu_csv);
    const auto v0 = [a = r.amplitude, s = r.variance](double x) { return gaussian({x, 0.0}, 1, a, s); };
    QuasilinearSurrogate::Settings fine;
    fine.T = cfg.horizon;
    double reach = 0.0;
    if (cauchy) {
        if (cfg.geometry.half_width) {
            reach = *cfg.geometry.half_width;
        } else {
            const double w = cfg.geometry.initial_width;
            const double eps0 = cfg.epsilons.empty() ? 1.0 : cfg.epsilons.front();
            reach = 5.0 * eps0 * cfg.kernel.radius + 8.0 * std::sqrt(w * w + 2.0 * cfg.horizon);
        }
    } else {
        const double eps0 = cfg.epsilons.empty() ? 1.0 : cfg.epsilons.front();
        reach = std::max(std::abs(cfg.geometry.box[0].first), std::abs(cfg.geometry.box[0].second)) +
                eps0 * cfg.kernel.radius;
    }
    fine.hi = std::max(fine.hi, std::ceil(reach) + 1.0);
    fine.lo = -fine.hi;
    auto coarse = fine;
    coarse.h = 2.0 * fine.h;
    auto sf = std::make_shared<const QuasilinearSurrogate>(mu, v0, fine);
    QuasilinearSurrogate sc(mu, v0, coarse);
    const double a = cauchy ? -reach : cfg.geometry.box[0].first;
    const double b = cauchy ? reach : cfg.geometry.box[0].second;
    ref.error_estimate = surrogate_self_difference(sc, *sf, a, b, uniform_times(cfg.horizon, cfg.sampling.count)) / 3.0;
    ref.surrogate = true;
    ref.v = [sf](const Point& x, double t) { return (*sf)(x[0], t); };
    ref.u0 = [v0](const Point& x) { return v0(x[0]); };
    ref.boundary = [sf](const Point& x, double t) { return (*sf)(x[0], t); };
    return ref;
}

struct SweepRun {
    double error = 0.0;
    bool valid = true;
    std::string note;
    std::vector<std::pair<double, double>> series;
    double h = 0.0;
    std::size_t steps = 0;
};

SweepRun run_sweep_point(const ExperimentConfig& cfg, const Reference& ref, double eps, bool cauchy) {
    SweepRun out;
    try {
        SemiDiscreteSystem sys;
        if (cauchy) {
            CauchyProblem p;
            p.dim = cfg.kernel.dim;
            p.half_width = cfg.geometry.half_width;
            p.initial_width = cfg.geometry.initial_width;
            p.op = make_spec(cfg, eps);
            p.u0 = ref.u0;
            p.T = cfg.horizon;
            p.contamination_tol = cfg.geometry.contamination_tol;
            sys = make_system(p);
        } else {
            DirichletProblem p;
            p.box = make_box(cfg);
            p.op = make_spec(cfg, eps);
            p.u0 = ref.u0;
            p.boundary = ref.boundary;
            p.T = cfg.horizon;
            sys = make_system(p);
        }
        out.h = sys.grid->h();
        EvolveOptions opts;
        opts.sample_times = uniform_times(cfg.horizon, cfg.sampling.count);
        opts.on_sample = [&](const Field& u) {
            double e = 0.0;
            for (std::size_t node : u.grid().interior()) {
                e = std::max(e, std::abs(u[node] - ref.v(u.grid().point(node), u.t())));
            }
            out.series.emplace_back(u.t(), e);
            out.error = std::max(out.error, e);
        };
        const auto res = evolve(sys, cfg.integrator, opts);
        out.steps = res.steps;
        if (!res.valid) {
            out.valid = false;
            out.note = res.reason;
        }
    } catch (const ResolutionError& e) {
        out.valid = false;
        out.note = std::string("resolution: ") + e.what() + " (required h = " + fmt(e.required_h(), 6) + ")";
    } catch (const EvolutionError& e) {
        out.valid = false;
        out.note = std::string("evolution: ") + e.what();
    }
    return out;
}

ExperimentOutcome convergence(const ExperimentConfig& cfg, bool cauchy) {
    require_explicit(cfg);
    if (cfg.epsilons.size() < 2) throw ConfigError("a convergence sweep needs at least two epsilons");
    ExperimentOutcome out;
    out.id = cfg.id;
    const Reference ref = make_reference(cfg, cauchy);
    ConvergenceReport rep;
    Table series("epsilon,t,linf_error");
    Table runs("epsilon,h,steps,sup_linf_error,valid");
    for (double eps : cfg.epsilons) {
        const auto run = run_sweep_point(cfg, ref, eps, cauchy);
        rep.epsilons.push_back(eps);
        rep.errors.push_back(run.error);
        rep.valid.push_back(run.valid);
        rep.notes.push_back(run.note);
        for (const auto& [t, e] : run.series) series.row(eps, t, e);
        runs.row(eps, run.h, run.steps, run.error, run.valid);
        if (!run.valid) out.notes.push_back("epsilon " + fmt(eps, 6) + " excluded: " + run.note);
    }
    finalize(rep);
    const double min_order = gate(cfg, "min_order");
    out.pass = rep.monotone && rep.order >= min_order;
    out.metrics = {{"order", rep.order}, {"monotone", rep.monotone ? 1.0 : 0.0}};
    for (std::size_t i = 0; i < rep.errors.size(); ++i) out.metrics.emplace_back("err_" + fmt(rep.epsilons[i], 6), rep.errors[i]);
    if (ref.surrogate) {
        const double smallest = *std::min_element(rep.errors.begin(), rep.errors.end());
        const bool resolved = ref.error_estimate * gate(cfg, "surrogate_margin") <= smallest;
        out.metrics.emplace_back("surrogate_error", ref.error_estimate);
        if (!resolved) out.notes.push_back("surrogate error estimate is not small against the smallest gap");
        out.pass = out.pass && resolved;
    }
    if (!rep.monotone) out.notes.push_back("errors are not strictly decreasing over all runs");
    out.files["convergence.csv"] = csv_of(rep);
    out.files["convergence_runs.csv"] = runs.str();
    out.files["convergence_timeseries.csv"] = series.str();
    out.convergence = std::move(rep);
    return out;
}

// Random data for comparison and maximum-principle runs

struct Bump {
    double a, s;
    Point c;
};

struct RandomProfile {
    std::vector<Bump> bumps;
    double offset = 0.0;
    int dim = 1;

    double operator()(const Point& x) const {
        double v = offset;
        for (const auto& b : bumps) {
            double r2 = (x[0] - b.c[0]) * (x[0] - b.c[0]);
            if (dim == 2) r2 += (x[1] - b.c[1]) * (x[1] - b.c[1]);
            v += b.a * std::exp(-r2 / (2.0 * b.s * b.s));
        }
        return v;
    }
};

RandomProfile random_profile(std::mt19937_64& rng, int dim, double amp_lo, double amp_hi, double offset_hi) {
    std::uniform_real_distribution<double> amp(amp_lo, amp_hi), centre(-1.0, 1.0), width(0.2, 0.6),
        off(0.0, offset_hi);
    RandomProfile p;
    p.dim = dim;
    for (int k = 0; k < 3; ++k) p.bumps.push_back({amp(rng), width(rng), {centre(rng), dim == 2 ? centre(rng) : 0.0}});
    p.offset = off(rng);
    return p;
}

double sup_over(const Field& f) {
    double m = 0.0;
    for (std::size_t node : f.grid().interior()) m = std::max(m, std::abs(f[node]));
    return m;
}

PropertyCheck make_check(std::string name) {
    PropertyCheck c;
    c.name = std::move(name);
    c.min_observed = kInfinity;
    c.max_observed = -kInfinity;
    return c;
}

void observe(PropertyCheck& c, double v, bool ok) {
    ++c.samples;
    if (!ok) ++c.violations;
    c.min_observed = std::min(c.min_observed, v);
    c.max_observed = std::max(c.max_observed, v);
}

// Decay helpers

struct NormSample {
    double t, l1, l2, l4, linf;
};

NormSample norms_of(const Field& u) {
    return {u.t(), lq_norm(u, 1.0), lq_norm(u, 2.0), lq_norm(u, 4.0), lq_norm(u, kInfinity)};
}

DecayReport decay_report(const std::string& name, const std::vector<NormSample>& s, double NormSample::*field,
                         double power, Window window, bool fit) {
    DecayReport r;
    r.observable = name;
    r.window = window;
    for (const auto& x : s) {
        if (x.t <= 0.0) continue;
        r.times.push_back(x.t);
        r.values.push_back(std::pow(x.*field, power));
    }
    if (fit) r.fit = fit_power_law(r.times, r.values, window);
    return r;
}

}  // namespace

double ExperimentOutcome::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    throw ConfigError("no metric '" + name + "' in " + id);
}

std::string ExperimentOutcome::verdict_line() const {
    std::string line = "VERDICT " + id + (pass ? " PASS" : " FAIL");
    for (const auto& [k, v] : metrics) line += " " + k + "=" + fmt(v, 6);
    return line;
}

ExperimentOutcome exp_quadratic_exactness(const ExperimentConfig& cfg) {
    ExperimentOutcome out;
    out.id = cfg.id;
    if (cfg.epsilons.empty()) throw ConfigError("quadratic_exactness needs at least one epsilon");
    const double tol = gate(cfg, "tolerance");
    Table table("epsilon,h,interior_nodes,max_abs_error");
    double worst = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (double eps : cfg.epsilons) {
        auto spec = make_spec(cfg, eps);
        spec.G = Nonlinearity::identity();
        spec.mu = nullptr;
        const double h = spec.h.value_or(eps * spec.kernel.radius() / spec.k_pts);
        const auto dk = discretize(rescale(spec.kernel, eps), h, cfg.normalization);
        auto grid = std::make_shared<const Grid>(build_grid(make_box(cfg), h, dk.support_radius));
        const NonlocalOperator op(grid, dk, Nonlinearity::identity(), Rescaling{eps});
        std::vector<double> u(grid->size()), out_v(grid->size());
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double x = grid->point(i)[0];
            u[i] = x * x;
        }
        op.apply(u, out_v);
        double err = 0.0;
        for (std::size_t node : grid->interior()) err = std::max(err, std::abs(out_v[node] - 2.0));
        table.row(eps, h, grid->interior().size(), err);
        worst = std::max(worst, err);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.pass = worst <= tol && seconds < gate(cfg, "max_seconds");
    out.metrics = {{"max_abs_error", worst}, {"seconds", seconds}};
    out.files["quadratic_exactness.csv"] = table.str();
    return out;
}

ExperimentOutcome exp_convergence_dirichlet(const ExperimentConfig& cfg) { return convergence(cfg, false); }

ExperimentOutcome exp_convergence_cauchy(const ExperimentConfig& cfg) { return convergence(cfg, true); }

ExperimentOutcome exp_comparison(const ExperimentConfig& cfg) {
    require_explicit(cfg);
    ExperimentOutcome out;
    out.id = cfg.id;
    const int dim = cfg.kernel.dim;
    const auto eps = first_epsilon(cfg);
    const double gap_tol = gate(cfg, "gap_tolerance");
    const double bound_tol = gate(cfg, "bound_tolerance");
    const auto times = uniform_times(cfg.horizon, cfg.sampling.count);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> mu_dist(-2.0, 2.0), freq(0.5, 3.0);

    PropertyReport rep;
    rep.name = "comparison";
    auto dir_check = make_check("comparison_dirichlet");
    auto cau_check = make_check("comparison_cauchy");
    Table pairs("pair,problem,mu,data_sup,min_gap,threshold");
    for (std::size_t k = 0; k < cfg.property.pairs; ++k) {
        const bool cauchy = k >= cfg.property.pairs / 2;
        const double mu = mu_dist(rng);
        auto spec = make_spec(cfg, eps);
        spec.G = Nonlinearity::kpz(MuField::constant(mu));
        spec.mu = nullptr;
        const auto lower = random_profile(rng, dim, -1.0, 1.0, cauchy ? 0.0 : 0.5);
        const auto lift = random_profile(rng, dim, 0.0, 1.0, cauchy ? 0.0 : 0.2);
        const double w1 = freq(rng), w2 = freq(rng);
        SpaceFn u0_lo = lower;
        SpaceFn u0_hi = [lower, lift](const Point& x) { return lower(x) + lift(x); };
        SemiDiscreteSystem lo, hi;
        if (cauchy) {
            CauchyProblem p;
            p.dim = dim;
            p.half_width = cfg.geometry.half_width;
            p.initial_width = cfg.geometry.initial_width;
            p.op = spec;
            p.T = cfg.horizon;
            p.contamination_tol = kInfinity;
            p.u0 = u0_lo;
            lo = make_system(p);
            p.u0 = u0_hi;
            hi = make_system(p);
        } else {
            DirichletProblem p;
            p.box = make_box(cfg);
            p.op = spec;
            p.T = cfg.horizon;
            p.u0 = u0_lo;
            p.boundary = [lower, w1](const Point& x, double t) { return lower(x) * (1.0 + 0.5 * std::sin(w1 * t)); };
            lo = make_system(p);
            p.u0 = u0_hi;
            p.boundary = [lower, lift, w1, w2](const Point& x, double t) {
                return lower(x) * (1.0 + 0.5 * std::sin(w1 * t)) + lift(x) * (1.0 + 0.5 * std::sin(w2 * t));
            };
            hi = make_system(p);
        }
        const double scale = std::max({1.0, sup_over(lo.initial), sup_over(hi.initial)});
        const auto cmp = evolve_comparison_pair(lo, hi, cfg.integrator, times);
        const double threshold = -gap_tol * scale;
        observe(cauchy ? cau_check : dir_check, cmp.min_gap, cmp.min_gap >= threshold);
        pairs.row(k, cauchy ? "cauchy" : "dirichlet", mu, scale, cmp.min_gap, threshold);
    }
    rep.checks.push_back(dir_check);
    rep.checks.push_back(cau_check);

    // Ordered constants: the flux vanishes, so the gap must stay exactly c2 - c1.
    {
        auto check = make_check("ordered_constants");
        const double c1 = -0.25, c2 = 0.75;
        auto spec = make_spec(cfg, eps);
        spec.G = Nonlinearity::kpz(MuField::constant(mu_dist(rng)));
        spec.mu = nullptr;
        DirichletProblem p;
        p.box = make_box(cfg);
        p.op = spec;
        p.T = cfg.horizon;
        p.u0 = [c1](const Point&) { return c1; };
        p.boundary = [c1](const Point&, double) { return c1; };
        const auto lo = make_system(p);
        p.u0 = [c2](const Point&) { return c2; };
        p.boundary = [c2](const Point&, double) { return c2; };
        const auto hi = make_system(p);
        const auto cmp = evolve_comparison_pair(lo, hi, cfg.integrator, times);
        for (double g : cmp.gaps) observe(check, g, g == c2 - c1);
        check.detail = "expected gap " + fmt(c2 - c1, 6);
        rep.checks.push_back(check);
    }

    // Maximum principle with zero exterior data and nonnegative initial data.
    Table bounds("run,problem,method,mu,u0_sup,min_value,max_value");
    for (Method method : {Method::euler, Method::rk4}) {
        auto check = make_check(method == Method::euler ? "max_principle_euler" : "max_principle_rk4");
        IntegratorConfig ic = cfg.integrator;
        ic.method = method;
        std::mt19937_64 mp_rng(cfg.seed + 1000);
        for (std::size_t k = 0; k < std::max<std::size_t>(cfg.property.pairs / 2, 2); ++k) {
            const bool cauchy = k % 2 == 1;
            const double mu = mu_dist(mp_rng);
            auto spec = make_spec(cfg, eps);
            spec.G = Nonlinearity::kpz(MuField::constant(mu));
            spec.mu = nullptr;
            const auto data = random_profile(mp_rng, dim, 0.0, 1.0, 0.0);
            SemiDiscreteSystem sys;
            if (cauchy) {
                CauchyProblem p;
                p.dim = dim;
                p.half_width = cfg.geometry.half_width;
                p.initial_width = cfg.geometry.initial_width;
                p.op = spec;
                p.T = cfg.horizon;
                p.contamination_tol = kInfinity;
                p.u0 = data;
                sys = make_system(p);
            } else {
                DirichletProblem p;
                p.box = make_box(cfg);
                p.op = spec;
                p.T = cfg.horizon;
                p.u0 = data;
                sys = make_system(p);
            }
            const double sup0 = sup_over(sys.initial);
            double lo_v = kInfinity, hi_v = -kInfinity;
            EvolveOptions opts;
            opts.on_step = [&](const Field& u, double) {
                for (std::size_t node : u.grid().interior()) {
                    lo_v = std::min(lo_v, u[node]);
                    hi_v = std::max(hi_v, u[node]);
                }
            };
            evolve(sys, ic, opts);
            ++check.samples;
            if (!(lo_v >= -bound_tol && hi_v <= sup0 + bound_tol)) ++check.violations;
            check.min_observed = std::min(check.min_observed, lo_v);
            check.max_observed = std::max(check.max_observed, hi_v - sup0);
            bounds.row(k, cauchy ? "cauchy" : "dirichlet", method == Method::euler ? "euler" : "rk4", mu, sup0, lo_v,
                       hi_v);
        }
        check.detail = "min over runs of min u; max column holds max(u) - sup u0";
        rep.checks.push_back(check);
    }

    out.pass = rep.pass();
    out.metrics = {{"comparison_min_gap", std::min(dir_check.min_observed, cau_check.min_observed)},
                   {"comparison_violations", static_cast<double>(dir_check.violations + cau_check.violations)}};
    for (const auto& c : rep.checks) {
        if (c.name.rfind("max_principle", 0) == 0) out.metrics.emplace_back(c.name + "_violations", c.violations);
    }
    out.files["comparison_pairs.csv"] = pairs.str();
    out.files["max_principle.csv"] = bounds.str();
    out.files["comparison_checks.csv"] = csv_of(rep);
    out.properties = std::move(rep);
    return out;
}

ExperimentOutcome exp_decay_bounded(const ExperimentConfig& cfg) {
    require_explicit(cfg);
    ExperimentOutcome out;
    out.id = cfg.id;
    if (cfg.runs.empty()) throw ConfigError("decay_bounded needs at least one run");
    const double sup_ratio = gate(cfg, "sup_ratio");
    const double slack = gate(cfg, "rate_slack");
    const auto eps = first_epsilon(cfg);
    Table table("run,mu,t,l1,l2,linf,l2_bound");
    out.pass = true;
    double lambda = 0.0;
    for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
        const auto& run = cfg.runs[r];
        auto spec = make_spec(cfg, eps);
        spec.G = make_nonlinearity(cfg.nonlinearity, run.mu);
        spec.mu = nullptr;
        DirichletProblem p;
        p.box = make_box(cfg);
        p.op = spec;
        p.T = run.horizon;
        p.u0 = [&cfg](const Point& x) {
            return gaussian(x, cfg.kernel.dim, cfg.reference.amplitude, cfg.reference.variance);
        };
        const auto sys = make_system(p);
        if (r == 0) lambda = lambda1(*sys.grid, sys.op->kernel()).value;
        std::vector<NormSample> samples;
        EvolveOptions opts;
        opts.sample_times = uniform_times(run.horizon, cfg.sampling.count);
        opts.on_sample = [&](const Field& u) { samples.push_back(norms_of(u)); };
        evolve(sys, cfg.integrator, opts);
        const double l2_0 = samples.front().l2, sup0 = samples.front().linf;
        const bool absorption = run.mu <= 0.0 || cfg.nonlinearity.kind == "identity";
        std::size_t bound_violations = 0;
        for (const auto& s : samples) {
            const double bound = l2_0 * std::exp(-lambda * (1.0 - slack) * s.t);
            if (absorption && s.l2 > bound * (1.0 + 1e-12)) ++bound_violations;
            table.row(r, run.mu, s.t, s.l1, s.l2, s.linf, bound);
        }
        const double ratio = samples.back().linf / sup0;
        const bool ok = ratio < sup_ratio && bound_violations == 0;
        out.pass = out.pass && ok;
        const std::string tag = "run" + std::to_string(r);
        out.metrics.emplace_back(tag + "_mu", run.mu);
        out.metrics.emplace_back(tag + "_sup_ratio", ratio);
        if (absorption) out.metrics.emplace_back(tag + "_l2_bound_violations", bound_violations);
        out.decay.push_back(decay_report(tag + "_l2", samples, &NormSample::l2, 1.0, {}, false));
        out.decay.push_back(decay_report(tag + "_linf", samples, &NormSample::linf, 1.0, {}, false));
    }
    out.metrics.insert(out.metrics.begin(), {"lambda1", lambda});
    out.files["decay_bounded.csv"] = table.str();
    return out;
}

ExperimentOutcome exp_decay_cauchy(const ExperimentConfig& cfg) {
    require_explicit(cfg);
    ExperimentOutcome out;
    out.id = cfg.id;
    if (cfg.runs.empty()) throw ConfigError("decay_cauchy needs at least one run");
    const auto eps = first_epsilon(cfg);
    const int N = cfg.kernel.dim;
    const Window window{cfg.sampling.fit_lo, cfg.sampling.fit_hi};
    const double mass_tol = gate(cfg, "mass_step_tol");
    const double energy_slack = gate(cfg, "energy_slack");
    Table table("run,mu,t,l1,l2,l4,linf,l2_squared,dl2sq_dt,energy_bound");
    Table fits("run,mu,observable,exponent,target,intercept,residual,samples,good");
    out.pass = true;
    for (std::size_t r = 0; r < cfg.runs.size(); ++r) {
        const auto& run = cfg.runs[r];
        const bool identity = cfg.nonlinearity.kind == "identity";
        const bool absorption = identity || run.mu <= 0.0;
        const double theta = absorption ? 0.0 : std::abs(cfg.reference.amplitude) * std::abs(run.mu);
        if (!absorption && !(theta < 1.0)) {
            throw ConfigError("reaction run needs |u0|_inf |mu|_inf < 1, got " + fmt(theta, 6));
        }
        auto spec = make_spec(cfg, eps);
        spec.G = make_nonlinearity(cfg.nonlinearity, run.mu);
        spec.mu = nullptr;
        CauchyProblem p;
        p.dim = N;
        p.half_width = cfg.geometry.half_width;
        p.initial_width = std::max(cfg.geometry.initial_width, std::sqrt(cfg.reference.variance));
        p.op = spec;
        p.T = run.horizon;
        p.contamination_tol = cfg.geometry.contamination_tol;
        p.u0 = [&cfg](const Point& x) {
            return gaussian(x, cfg.kernel.dim, cfg.reference.amplitude, cfg.reference.variance);
        };
        const auto sys = make_system(p);
        const auto& dk = sys.op->kernel();
        std::vector<NormSample> samples;
        std::size_t energy_violations = 0, mass_violations = 0;
        double worst_mass_step = 0.0;
        double mass_prev = lq_norm(sys.initial, 1.0);
        const double mass0 = mass_prev;
        EvolveOptions opts;
        opts.sample_times = geometric_times(cfg.sampling.t_min, run.horizon, cfg.sampling.per_decade);
        opts.on_sample = [&](const Field& u) {
            const auto s = norms_of(u);
            samples.push_back(s);
            const double rate = l2_squared_rate(*sys.op, u);
            const double bound = -(1.0 - theta) * double_energy(u, dk);
            if (rate > bound + energy_slack) ++energy_violations;
            table.row(r, run.mu, s.t, s.l1, s.l2, s.l4, s.linf, s.l2 * s.l2, rate, bound);
        };
        opts.on_step = [&](const Field& u, double) {
            const double m = lq_norm(u, 1.0);
            const double step = absorption ? m - mass_prev : mass_prev - m;
            worst_mass_step = std::max(worst_mass_step, step / mass0);
            if (step > mass_tol * mass0) ++mass_violations;
            mass_prev = m;
        };
        const auto res = evolve(sys, cfg.integrator, opts);
        const std::string tag = "run" + std::to_string(r);
        if (!res.valid) {
            out.pass = false;
            out.notes.push_back(tag + " invalid: " + res.reason);
        }
        struct Obs {
            std::string name;
            double NormSample::*field;
            double power;
            double target;
        };
        const double half_n = 0.5 * N;
        const std::vector<Obs> observables = {{"l1", &NormSample::l1, 1.0, 0.0},
                                              {"l2", &NormSample::l2, 1.0, -half_n * 0.5},
                                              {"l2_squared", &NormSample::l2, 2.0, -half_n},
                                              {"l4", &NormSample::l4, 1.0, -half_n * 0.75},
                                              {"linf", &NormSample::linf, 1.0, -half_n}};
        PowerLawFit gated;
        for (const auto& o : observables) {
            auto rep = decay_report(tag + "_" + o.name, samples, o.field, o.power, window, res.valid);
            fits.row(r, run.mu, o.name, rep.fit.exponent, o.target, rep.fit.intercept, rep.fit.residual,
                     rep.fit.samples, rep.fit.good);
            if ((absorption && o.name == "l2") || (!absorption && o.name == "l2_squared")) gated = rep.fit;
            out.decay.push_back(std::move(rep));
        }
        const double lo = gate(cfg, absorption ? "absorption_l2_lo" : "reaction_l2sq_lo");
        const double hi = gate(cfg, absorption ? "absorption_l2_hi" : "reaction_l2sq_hi");
        const bool ok = res.valid && gated.exponent >= lo && gated.exponent <= hi && mass_violations == 0 &&
                        energy_violations == 0;
        out.pass = out.pass && ok;
        out.metrics.emplace_back(tag + "_mu", run.mu);
        out.metrics.emplace_back(tag + (absorption ? "_l2_exponent" : "_l2sq_exponent"), gated.exponent);
        out.metrics.emplace_back(tag + "_mass_violations", mass_violations);
        out.metrics.emplace_back(tag + "_worst_mass_step", worst_mass_step);
        out.metrics.emplace_back(tag + "_energy_violations", energy_violations);
    }
    out.files["decay_cauchy.csv"] = table.str();
    out.files["decay_fits.csv"] = fits.str();
    return out;
}

ExperimentOutcome exp_property_suite(const ExperimentConfig& cfg) {
    ExperimentOutcome out;
    out.id = cfg.id;
    const double class_tol = gate(cfg, "class_tol");
    const double dj_tol = gate(cfg, "dj_rel_tol");
    const std::size_t n = cfg.property.samples;

    const auto G = Nonlinearity::kpz(MuField::constant(cfg.nonlinearity.mu));
    CertifyBox box;
    box.tolerance = class_tol;
    PropertyReport rep = certify_class(G, n, cfg.seed, box);
    rep.name = "property_suite";

    {
        auto check = make_check("kpz_g_range");
        std::mt19937_64 rng(cfg.seed + 1);
        std::uniform_real_distribution<double> s_dist(-50.0, 50.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = G.g(0, s_dist(rng));
            observe(check, g, g >= 0.75 - class_tol && g <= 1.25 + class_tol);
        }
        check.detail = "G in [3/4, 5/4]";
        rep.checks.push_back(check);
    }

    rep.append(check_power_inequality(n, cfg.seed + 2, 1.0, 8.0));

    {
        auto check = make_check("dj_fourier_identity");
        std::mt19937_64 rng(cfg.seed + 3);
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        const double h = cfg.geometry.h.value_or(cfg.kernel.radius / cfg.geometry.k_pts);
        for (std::size_t f = 0; f < cfg.property.fields; ++f) {
            const int dim = f % 2 == 0 ? 1 : 2;
            const Profile profile = dim == 2 && cfg.kernel.profile == Profile::triangular ? Profile::bump : cfg.kernel.profile;
            const auto dk = discretize(make_kernel(profile, dim, cfg.kernel.radius), h, Normalization::mass);
            PeriodicField u;
            u.dim = dim;
            u.n = dim == 1 ? 4 * static_cast<std::size_t>(dk.reach) * 4 : 4 * static_cast<std::size_t>(dk.reach);
            u.h = h;
            u.values.resize(dim == 1 ? u.n : u.n * u.n);
            for (double& v : u.values) v = val(rng);
            const double direct = double_energy(u, dk);
            const double fourier = 2.0 * dj_functional(u, dk);
            const double rel = std::abs(direct - fourier) / direct;
            observe(check, rel, rel <= dj_tol);
        }
        check.detail = "relative gap between the direct double sum and twice the Fourier functional";
        rep.checks.push_back(check);
    }

    {
        auto check = make_check("fault_injection_detected");
        const auto mutated = G.with_declared_bounds(G.alpha1(), G.alpha2() - 0.05);
        const auto bad = certify_class(mutated, n, cfg.seed + 4, box);
        observe(check, static_cast<double>(bad.violations()), !bad.pass());
        check.detail = "alpha2 understated by 0.05; certification must report violations";
        rep.checks.push_back(check);
    }

    {
        auto check = make_check("gns_ratio_sweep");
        const double h = cfg.geometry.h.value_or(cfg.kernel.radius / cfg.geometry.k_pts);
        const auto dk = discretize(make_kernel(cfg.kernel.profile, 1, cfg.kernel.radius), h, Normalization::mass);
        const double L = 40.0;
        auto grid = std::make_shared<const Grid>(build_grid(Box{1, {-L, 0.0}, {L, 0.0}}, h, dk.support_radius));
        std::vector<double> ratios;
        for (double width : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            Field u(grid);
            for (std::size_t node : grid->interior()) u[node] = gaussian(grid->point(node), 1, 1.0, width * width);
            const double q = gns_ratio(u, dk);
            ratios.push_back(q);
            observe(check, q, q > 0.0);
        }
        const double spread = *std::max_element(ratios.begin(), ratios.end()) /
                              *std::min_element(ratios.begin(), ratios.end());
        if (!(spread <= gate(cfg, "gns_spread"))) ++check.violations;
        check.detail = "Gaussian widths 0.5..8; max/min ratio " + fmt(spread, 6);
        rep.checks.push_back(check);
        out.metrics.emplace_back("gns_spread", spread);
    }

    out.pass = rep.pass();
    out.metrics.insert(out.metrics.begin(), {"violations", static_cast<double>(rep.violations())});
    out.metrics.insert(out.metrics.begin() + 1, {"checks", static_cast<double>(rep.checks.size())});
    out.files["property_suite.csv"] = csv_of(rep);
    out.properties = std::move(rep);
    return out;
}

ExperimentOutcome exp_picard_crosscheck(const ExperimentConfig& cfg) {
    ExperimentOutcome out;
    out.id = cfg.id;
    if (cfg.nonlinearity.kind != "kpz" || !cfg.nonlinearity.mu_csv.empty()) {
        throw ConfigError("picard_crosscheck needs a constant-mu kpz nonlinearity");
    }
    const HopfColeSolution sol(cfg.nonlinearity.mu, cfg.reference.amplitude, cfg.reference.variance, cfg.kernel.dim);
    const auto data = dirichlet_data_from(sol);
    DirichletProblem p;
    p.box = make_box(cfg);
    p.op = make_spec(cfg, first_epsilon(cfg));
    p.u0 = data.u0;
    p.boundary = data.boundary;
    p.T = cfg.horizon;
    const auto sys = make_system(p);

    IntegratorConfig pc = cfg.integrator;
    pc.method = Method::picard;
    const double dtp = pc.picard.dt.value_or(pc.dt.value_or(stable_dt(sys, pc)));
    pc.picard.dt = dtp;
    const auto coarse = picard_solve(sys, pc);
    pc.picard.dt = dtp / 2.0;
    const auto fine = picard_solve(sys, pc);

    IntegratorConfig rc = cfg.integrator;
    rc.method = Method::rk4;
    rc.dt.reset();
    std::vector<Field> rk;
    EvolveOptions opts;
    opts.sample_times = coarse.times;
    opts.on_sample = [&](const Field& u) { rk.push_back(u); };
    evolve(sys, rc, opts);

    Table sweeps("sweep,diff,factor,predicted_factor");
    bool factors_ok = coarse.factors.size() + 1 == coarse.diffs.size();
    double worst_factor = 0.0;
    for (std::size_t k = 0; k < coarse.diffs.size(); ++k) {
        const double f = k == 0 ? std::nan("") : coarse.factors[k - 1];
        if (k > 0) {
            worst_factor = std::max(worst_factor, f);
            if (!(f < 1.0 && f <= coarse.predicted_factor * (1.0 + 1e-12))) factors_ok = false;
        }
        sweeps.row(k + 1, coarse.diffs[k], f, coarse.predicted_factor);
    }

    Table gaps("t,picard_rk4_gap,richardson_term");
    double gap = 0.0, term = 0.0;
    const bool aligned = rk.size() == coarse.times.size() && fine.times.size() == 2 * (coarse.times.size() - 1) + 1;
    if (aligned) {
        for (std::size_t k = 0; k < coarse.times.size(); ++k) {
            double g = 0.0, d = 0.0;
            for (std::size_t node : sys.grid->interior()) {
                g = std::max(g, std::abs(coarse.trajectory[k][node] - rk[k][node]));
                d = std::max(d, std::abs(coarse.trajectory[k][node] - fine.trajectory[2 * k][node]));
            }
            const double r = 4.0 / 3.0 * d;
            gaps.row(coarse.times[k], g, r);
            gap = std::max(gap, g);
            term = std::max(term, r);
        }
    } else {
        out.notes.push_back("Picard and RK4 sample times do not line up");
    }
    const double allowance = gate(cfg, "agreement_factor") * (cfg.integrator.picard.tolerance + term);
    out.pass = coarse.converged && fine.converged && factors_ok && aligned && gap <= allowance;
    out.metrics = {{"sweeps", static_cast<double>(coarse.sweeps)},
                   {"worst_factor", worst_factor},
                   {"predicted_factor", coarse.predicted_factor},
                   {"M", coarse.M},
                   {"C_tilde", coarse.C_tilde},
                   {"max_gap", gap},
                   {"allowance", allowance}};
    out.files["picard_sweeps.csv"] = sweeps.str();
    out.files["picard_gap.csv"] = gaps.str();
    return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    if (cfg.id == "quadratic_exactness") return exp_quadratic_exactness(cfg);
    if (cfg.id == "convergence_dirichlet") return exp_convergence_dirichlet(cfg);
    if (cfg.id == "convergence_cauchy") return exp_convergence_cauchy(cfg);
    if (cfg.id == "comparison") return exp_comparison(cfg);
    if (cfg.id == "decay_bounded") return exp_decay_bounded(cfg);
    if (cfg.id == "decay_cauchy") return exp_decay_cauchy(cfg);
    if (cfg.id == "property_suite") return exp_property_suite(cfg);
    if (cfg.id == "picard_crosscheck") return exp_picard_crosscheck(cfg);
    throw ConfigError("unknown experiment id '" + cfg.id + "'");
}

void write_outputs(const ExperimentOutcome& outcome, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        f << text;
    };
    for (const auto& [name, text] : outcome.files) put(name, text);
    for (const auto& r : outcome.decay) {
        std::ostringstream os;
        write_csv(os, r);
        put("decay_" + r.observable + ".csv", os.str());
    }
    put("config.json", to_json(cfg));
    std::string verdict = outcome.verdict_line() + "\n";
    for (const auto& n : outcome.notes) verdict += "NOTE " + n + "\n";
    put("verdict.txt", verdict);
}

}  // namespace nlkpz
