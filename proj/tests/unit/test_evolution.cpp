#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlkpz/analysis.hpp"
#include "nlkpz/error.hpp"
#include "nlkpz/evolution.hpp"

using namespace nlkpz;

namespace {

Box line(double a, double b) { return Box{1, {a, 0.0}, {b, 0.0}}; }

OperatorSpec spec(Nonlinearity G, double h, double rho = 0.5) {
    OperatorSpec s;
    s.kernel = make_kernel(Profile::uniform, 1, rho);
    s.G = std::move(G);
    s.h = h;
    return s;
}

Nonlinearity kpz(double mu) { return Nonlinearity::kpz(MuField::constant(mu)); }

DirichletProblem bump_problem(Nonlinearity G, double T = 1.0) {
    DirichletProblem p;
    p.box = line(-1, 1);
    p.op = spec(std::move(G), 0.125);
    p.u0 = [](const Point& x) { return std::max(0.0, 1.0 - x[0] * x[0]); };
    p.T = T;
    return p;
}

std::vector<double> interior(const Field& f) { return f.interior_values(); }

}  // namespace

TEST(Evolution, StableStepFormula) {
    DirichletProblem p = bump_problem(Nonlinearity::identity());
    p.op.kernel = make_kernel(Profile::uniform, 1, 1.0);
    p.op.h = 0.25;
    const auto sys = make_system(p);
    EXPECT_DOUBLE_EQ(stable_dt(sys, IntegratorConfig{}), 0.125);

    p.op.G = kpz(1.0);
    EXPECT_NEAR(stable_dt(make_system(p), IntegratorConfig{}), 0.25 / (2.0 * (1.0 + 3.0 * std::sqrt(3.0) / 16.0)), 1e-15);

    DirichletProblem r = bump_problem(Nonlinearity::identity());
    r.op.h.reset();
    r.op.kernel = make_kernel(Profile::bump, 1, 1.0);
    r.op.normalization = Normalization::mass_moment;
    r.op.epsilon = 0.2;
    const double dt1 = stable_dt(make_system(r), IntegratorConfig{});
    r.op.epsilon = 0.1;
    const double dt2 = stable_dt(make_system(r), IntegratorConfig{});
    EXPECT_NEAR(dt2 / dt1, 0.25, 1e-12);

    IntegratorConfig bad;
    bad.cfl_safety = 1.5;
    EXPECT_THROW(stable_dt(sys, bad), ConfigError);
}

TEST(Evolution, ConstantStateIsStationary) {
    for (Method m : {Method::euler, Method::rk4}) {
        DirichletProblem p = bump_problem(kpz(2.0), 2.0);
        p.u0 = [](const Point&) { return 0.7; };
        p.boundary = [](const Point&, double) { return 0.7; };
        IntegratorConfig cfg;
        cfg.method = m;
        const auto res = evolve(make_system(p), cfg);
        for (std::size_t i = 0; i < res.final.size(); ++i) EXPECT_EQ(res.final[i], 0.7);
        EXPECT_EQ(res.final.t(), 2.0);
    }
}

TEST(Evolution, SamplesLandOnRequestedTimes) {
    const auto sys = make_system(bump_problem(kpz(1.0), 1.0));
    EvolveOptions opts;
    opts.sample_times = {0.0, 0.1, 1.0 / 3.0, 0.5, 1.0};
    std::vector<double> seen;
    opts.on_sample = [&](const Field& f) { seen.push_back(f.t()); };
    std::size_t steps = 0;
    double longest = 0.0;
    opts.on_step = [&](const Field&, double dt) {
        ++steps;
        longest = std::max(longest, dt);
    };
    const auto res = evolve(sys, IntegratorConfig{}, opts);
    EXPECT_EQ(seen, opts.sample_times);
    EXPECT_EQ(steps, res.steps);
    EXPECT_LE(longest, stable_dt(sys, IntegratorConfig{}) * (1 + 1e-12));
}

TEST(Evolution, Rk4SelfConvergenceOrder) {
    DirichletProblem p = bump_problem(Nonlinearity::identity(), 1.0);
    p.boundary = [](const Point& x, double t) { return 0.2 * std::sin(3.0 * t) * x[0]; };
    const auto sys = make_system(p);
    const double dt = 1.0 / sys.op->lipschitz_bound();
    std::vector<std::vector<double>> sols;
    for (double f : {1.0, 0.5, 0.25}) {
        IntegratorConfig cfg;
        cfg.dt = dt * f;
        sols.push_back(interior(evolve(sys, cfg).final));
    }
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < sols[0].size(); ++i) {
        d1 = std::max(d1, std::abs(sols[0][i] - sols[1][i]));
        d2 = std::max(d2, std::abs(sols[1][i] - sols[2][i]));
    }
    EXPECT_GE(std::log2(d1 / d2), 3.7);
}

TEST(Evolution, MaximumPrinciple) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (double mu : {-2.0, -0.5, 0.5, 2.0}) {
        for (Method m : {Method::euler, Method::rk4}) {
            DirichletProblem p = bump_problem(kpz(mu), 3.0);
            std::vector<double> c(6);
            for (double& v : c) v = d(rng);
            p.u0 = [c](const Point& x) {
                return std::abs(c[0] * std::sin(7 * x[0] + c[1]) + c[2] * std::cos(13 * x[0] * c[3]));
            };
            const auto sys = make_system(p);
            IntegratorConfig cfg;
            cfg.method = m;
            double lo = 0.0, hi = 0.0;
            EvolveOptions opts;
            opts.on_step = [&](const Field& f, double) {
                for (std::size_t x : f.grid().interior()) {
                    lo = std::min(lo, f[x]);
                    hi = std::max(hi, f[x]);
                }
            };
            evolve(sys, cfg, opts);
            EXPECT_GE(lo, -1e-10);
            EXPECT_LE(hi, sys.u0_sup + 1e-10);
        }
    }
}

TEST(Evolution, LinearCaseIsLinear) {
    DirichletProblem p = bump_problem(Nonlinearity::identity(), 1.0);
    auto a = p, b = p, c = p;
    a.u0 = [](const Point& x) { return std::sin(3 * x[0]); };
    b.u0 = [](const Point& x) { return x[0] * x[0] - 0.3; };
    c.u0 = [](const Point& x) { return 2.0 * std::sin(3 * x[0]) - 0.5 * (x[0] * x[0] - 0.3); };
    const auto ua = interior(evolve(make_system(a), IntegratorConfig{}).final);
    const auto ub = interior(evolve(make_system(b), IntegratorConfig{}).final);
    const auto uc = interior(evolve(make_system(c), IntegratorConfig{}).final);
    for (std::size_t i = 0; i < ua.size(); ++i) EXPECT_NEAR(uc[i], 2.0 * ua[i] - 0.5 * ub[i], 1e-12);
}

TEST(Evolution, EulerUpdateIsMonotone) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-1.0, 1.0), pos(0.0, 0.5);
    for (int rep = 0; rep < 20; ++rep) {
        const double mu = 3.0 * d(rng);
        const double shift = pos(rng);
        const double c1 = d(rng), c2 = d(rng);
        DirichletProblem lo = bump_problem(kpz(mu), 1.0);
        lo.u0 = [=](const Point& x) { return c1 * std::sin(5 * x[0]) + c2 * x[0]; };
        lo.boundary = [=](const Point& x, double t) { return c2 * x[0] * std::cos(t); };
        DirichletProblem up = lo;
        up.u0 = [=](const Point& x) { return c1 * std::sin(5 * x[0]) + c2 * x[0] + shift * (1 + x[0] * x[0]); };
        up.boundary = [=](const Point& x, double t) { return c2 * x[0] * std::cos(t) + shift * std::exp(-t); };
        IntegratorConfig cfg;
        cfg.method = Method::euler;
        cfg.cfl_safety = 1.0;
        const auto r = evolve_comparison_pair(make_system(lo), make_system(up), cfg, {0.25, 0.5, 0.75, 1.0});
        EXPECT_EQ(r.gaps.size(), 4u);
        EXPECT_GE(r.min_gap, -1e-12);
    }
}

TEST(Evolution, ComparisonOfConstants) {
    DirichletProblem a = bump_problem(kpz(1.0), 1.0);
    a.u0 = [](const Point&) { return 0.2; };
    a.boundary = [](const Point&, double) { return 0.2; };
    DirichletProblem b = a;
    b.u0 = [](const Point&) { return 0.9; };
    b.boundary = [](const Point&, double) { return 0.9; };
    const auto r = evolve_comparison_pair(make_system(a), make_system(b), IntegratorConfig{}, {0.5, 1.0});
    for (double g : r.gaps) EXPECT_DOUBLE_EQ(g, 0.7);
    const auto same = evolve_comparison_pair(make_system(a), make_system(a), IntegratorConfig{}, {1.0});
    EXPECT_EQ(same.min_gap, 0.0);
}

TEST(Evolution, NonFiniteStateAborts) {
    DirichletProblem p = bump_problem(Nonlinearity::identity(), 1.0);
    p.boundary = [](const Point&, double t) { return t > 0.5 ? std::nan("") : 0.0; };
    try {
        evolve(make_system(p), IntegratorConfig{});
        FAIL() << "expected EvolutionError";
    } catch (const EvolutionError& e) {
        EXPECT_LE(e.last_valid_time(), 0.5);
        EXPECT_GT(e.last_valid_time(), 0.3);
    }
}

TEST(Evolution, OversizedStepRejected) {
    const auto sys = make_system(bump_problem(Nonlinearity::identity(), 1.0));
    IntegratorConfig cfg;
    cfg.dt = 2.0 / sys.op->lipschitz_bound();
    EXPECT_THROW(evolve(sys, cfg), ConfigError);
    cfg.method = Method::picard;
    cfg.dt.reset();
    EXPECT_THROW(evolve(sys, cfg), ConfigError);
}

TEST(Evolution, CauchyTruncationRuleAndContamination) {
    CauchyProblem p;
    p.op = spec(kpz(-0.5), 0.125);
    p.u0 = [](const Point& x) { return std::exp(-x[0] * x[0] / 2.0); };
    p.T = 10.0;
    const auto sys = make_system(p);
    const double D = 0.5 * sys.op->kernel().second_moment;
    const double L = 5 * 0.5 + 8 * std::sqrt(1.0 + 2 * D * 10.0);
    EXPECT_GE(sys.grid->box().hi[0], L);
    EXPECT_LT(sys.grid->box().hi[0], L + 0.125);
    EXPECT_TRUE(evolve(sys, IntegratorConfig{}).valid);

    p.half_width = 3.0;
    p.T = 40.0;
    const auto res = evolve(make_system(p), IntegratorConfig{});
    EXPECT_FALSE(res.valid);
    EXPECT_LT(res.invalid_since, 40.0);
    EXPECT_FALSE(res.reason.empty());
}

TEST(Evolution, CauchyMassDirection) {
    for (double mu : {-1.0, 1.0}) {
        CauchyProblem p;
        p.op = spec(kpz(mu), 0.125);
        p.u0 = [](const Point& x) { return std::exp(-x[0] * x[0]); };
        p.T = 5.0;
        const auto sys = make_system(p);
        double prev = lq_norm(sys.initial, 1.0);
        bool ok = true;
        EvolveOptions opts;
        opts.on_step = [&](const Field& f, double) {
            const double m = lq_norm(f, 1.0);
            if (mu < 0 && m > prev + 1e-12) ok = false;
            if (mu > 0 && m < prev - 1e-12) ok = false;
            prev = m;
        };
        IntegratorConfig cfg;
        cfg.method = Method::euler;
        evolve(sys, cfg, opts);
        EXPECT_TRUE(ok) << mu;
    }
}

TEST(Picard, ConstantDataConvergesInOneSweep) {
    DirichletProblem p = bump_problem(kpz(1.0), 1.0);
    p.u0 = [](const Point&) { return 0.3; };
    p.boundary = [](const Point&, double) { return 0.3; };
    const auto r = picard_solve(make_system(p), IntegratorConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.sweeps, 1);
    for (const auto& f : r.trajectory) {
        for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], 0.3);
    }
}

TEST(Picard, ContractsWithinPredictedBoundAndMatchesRk4) {
    DirichletProblem p = bump_problem(kpz(1.0), 0.5);
    p.box = line(0, 1);
    p.op = spec(kpz(1.0), 1.0 / 31, 0.15);
    p.u0 = [](const Point& x) { return std::sin(3.0 * x[0]); };
    p.boundary = [](const Point& x, double t) { return 0.1 * x[0] * (1.0 + t); };
    const auto sys = make_system(p);
    ASSERT_EQ(sys.grid->interior().size(), 32u);
    IntegratorConfig cfg;
    cfg.picard.dt = 0.01;
    const auto pr = picard_solve(sys, cfg);
    ASSERT_TRUE(pr.converged);
    EXPECT_LT(pr.predicted_factor, 1.0);
    for (double f : pr.factors) {
        EXPECT_LT(f, 1.0);
        EXPECT_LE(f, pr.predicted_factor);
    }
    // Trapezoid fixed point is second order: compare with a fine RK4 run.
    IntegratorConfig rk;
    rk.cfl_safety = 0.1;
    EvolveOptions opts;
    opts.sample_times = pr.times;
    std::vector<Field> ref;
    opts.on_sample = [&](const Field& f) { ref.push_back(f); };
    evolve(sys, rk, opts);
    ASSERT_EQ(ref.size(), pr.times.size());
    double gap = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        for (std::size_t x : sys.grid->interior()) gap = std::max(gap, std::abs(ref[k][x] - pr.trajectory[k][x]));
    }
    EXPECT_LT(gap, 1e-4);
    EXPECT_GT(gap, 1e-9);
}

TEST(Picard, TinyWeightOnLongHorizonFailsToContract) {
    DirichletProblem p = bump_problem(kpz(1.0), 40.0);
    p.u0 = [](const Point& x) { return std::cos(2 * x[0]); };
    const auto sys = make_system(p);
    IntegratorConfig cfg;
    cfg.picard.M = 1e-12;
    cfg.picard.dt = 0.5;
    EXPECT_THROW(picard_solve(sys, cfg), ContractionError);
}
