#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlkpz/analysis.hpp"
#include "nlkpz/dirichlet_form.hpp"
#include "nlkpz/error.hpp"
#include "oracles.hpp"

using namespace nlkpz;

namespace {

Box line(double a, double b) { return Box{1, {a, 0.0}, {b, 0.0}}; }

std::shared_ptr<const Grid> make(const Box& box, double h, double radius) {
    return std::make_shared<const Grid>(build_grid(box, h, radius));
}

PeriodicField random_periodic(int dim, std::size_t n, double h, std::mt19937_64& rng) {
    PeriodicField f{dim, n, h, {}};
    f.values = oracle::random_vector(dim == 1 ? n : n * n, rng);
    return f;
}

}  // namespace

TEST(Norms, IndicatorAndScaling) {
    auto g = make(line(0, 2), 0.1, 0.2);
    Field f(g);
    for (std::size_t k = 3; k < 10; ++k) f[g->interior()[k]] = 1.0;
    EXPECT_NEAR(lq_norm(f, 1.0), 7 * 0.1, 1e-15);
    EXPECT_NEAR(lq_norm(f, 2.0), std::sqrt(0.7), 1e-15);
    EXPECT_EQ(lq_norm(f, kInfinity), 1.0);
    // Collar values are not part of the norm.
    f[g->collar()[0]] = 100.0;
    EXPECT_EQ(lq_norm(f, kInfinity), 1.0);

    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        Field u(g, oracle::random_vector(g->size(), rng), 0.0);
        Field v = u;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= -2.5;
        for (double q : {1.0, 1.5, 2.0, 4.0, kInfinity}) EXPECT_NEAR(lq_norm(v, q), 2.5 * lq_norm(u, q), 1e-12);
    }
    EXPECT_THROW(lq_norm(f, 0.5), ConfigError);
}

TEST(Norms, InterpolationInequality) {
    auto g = make(line(0, 2), 0.05, 0.1);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> qs(1.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        Field u(g, oracle::random_vector(g->size(), rng), 0.0);
        const double q = qs(rng);
        const double bound = std::pow(lq_norm(u, 1.0), 2.0 / q - 1.0) * std::pow(lq_norm(u, 2.0), 2.0 - 2.0 / q);
        EXPECT_LE(lq_norm(u, q), bound * (1 + 1e-12));
    }
}

TEST(PowerLaw, ExactPowerLaw) {
    std::vector<double> t, v;
    for (int i = 0; i < 41; ++i) {
        t.push_back(std::pow(10.0, 2.0 + i / 20.0));
        v.push_back(3.0 * std::pow(t.back(), -0.25));
    }
    const auto fit = fit_power_law(t, v);
    EXPECT_NEAR(fit.exponent, -0.25, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    EXPECT_TRUE(fit.good);
    const auto windowed = fit_power_law(t, v, {500.0, 1000.0});
    EXPECT_EQ(windowed.samples, 7u);
}

TEST(PowerLaw, ExponentialIsFlaggedAndConstantIsFlat) {
    std::vector<double> t, e, c;
    for (int i = 0; i < 21; ++i) {
        t.push_back(std::pow(10.0, i / 20.0) * 1.0);
        e.push_back(std::exp(-t.back()));
        c.push_back(4.0);
    }
    EXPECT_FALSE(fit_power_law(t, e).good);
    const auto flat = fit_power_law(t, c);
    EXPECT_NEAR(flat.exponent, 0.0, 1e-14);
    EXPECT_TRUE(flat.good);
}

TEST(PowerLaw, RejectsBadInput) {
    std::vector<double> t{1, 2, 3, 4}, v{1, 1, 1, 1};
    EXPECT_THROW(fit_power_law(t, v), ConfigError);
    std::vector<double> t5{1, 2, 3, 4, 5}, v5{1, 1, 0, 1, 1};
    EXPECT_THROW(fit_power_law(t5, v5), ConfigError);
    std::vector<double> t6{1, 2, 3, 4, 5, 6}, v6{0, 1, 1, 1, 1, 1};
    EXPECT_NO_THROW(fit_power_law(t6, v6, {1.5, 10.0}));
}

TEST(Lambda1, MatchesDenseEigensolver) {
    const double h = 2.0 / 63;
    const Grid g = build_grid(line(-1, 1), h, 0.5);
    ASSERT_EQ(g.interior().size(), 64u);
    for (Profile p : {Profile::uniform, Profile::bump}) {
        const auto dk = discretize(make_kernel(p, 1, 0.5), h, Normalization::mass);
        const auto r = lambda1(g, dk);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_dirichlet_form(g, dk).dense());
        EXPECT_NEAR(r.value, es.eigenvalues()[0], 1e-9);
        EXPECT_GT(r.value, 0.0);
        EXPECT_LE(r.value, 1.0);
        EXPECT_NEAR(r.vector.norm(), 1.0, 1e-12);
        EXPECT_GT(r.vector.minCoeff(), 0.0);
        EXPECT_NEAR(rayleigh_quotient(g, dk, r.vector), r.value, 1e-9);
        std::mt19937_64 rng(3);
        for (int rep = 0; rep < 100; ++rep) {
            const auto v = oracle::random_vector(64, rng);
            const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(v.data(), 64);
            EXPECT_GE(rayleigh_quotient(g, dk, u), r.value - 1e-9);
        }
    }
}

TEST(Lambda1, SmallerDomainHasLargerEigenvalue) {
    const double h = 0.0625;
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 1.0), h, Normalization::mass);
    const double small = lambda1(build_grid(line(-1, 1), h, 1.0), dk).value;
    const double large = lambda1(build_grid(line(-2, 2), h, 1.0), dk).value;
    EXPECT_GT(small, large);
}

TEST(Lambda1, SparsePathOnLargeGrid) {
    const double h = 0.025;
    const Grid g = build_grid(Box{2, {0, 0}, {1, 1}}, h, 0.1);
    ASSERT_GT(g.interior().size(), 1000u);
    const auto dk = discretize(make_kernel(Profile::uniform, 2, 0.1), h, Normalization::mass);
    const auto r = lambda1(g, dk);
    EXPECT_FALSE(r.dense);
    const auto form = assemble_dirichlet_form(g, dk);
    const Eigen::VectorXd res = form.matrix * r.vector - r.value * r.vector;
    EXPECT_LE(res.norm(), 1e-9);
    EXPECT_GT(r.vector.minCoeff(), 0.0);
    EXPECT_GT(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
}

TEST(Fourier, ConstantFieldHasZeroEnergy) {
    const auto dk = discretize(make_kernel(Profile::bump, 2, 0.5), 0.1, Normalization::mass);
    PeriodicField f{2, 16, 0.1, std::vector<double>(256, 1.7)};
    EXPECT_NEAR(dj_functional(f, dk), 0.0, 1e-12);
    EXPECT_EQ(double_energy(f, dk), 0.0);
}

TEST(Fourier, DoubleEnergyIsTwiceFourierFunctional) {
    std::mt19937_64 rng(4);
    for (int dim : {1, 2}) {
        for (Profile p : {Profile::uniform, Profile::bump}) {
            const double h = 0.05;
            const auto dk = discretize(make_kernel(p, dim, 0.3), h, Normalization::mass);
            for (int rep = 0; rep < 5; ++rep) {
                const auto f = random_periodic(dim, dim == 1 ? 128 : 32, h, rng);
                const double de = double_energy(f, dk);
                const double dj = dj_functional(f, dk);
                EXPECT_NEAR(de / (2.0 * dj), 1.0, 1e-10);
            }
        }
    }
}

TEST(Fourier, SingleModeDiagonalizes) {
    const double h = 0.05;
    const std::size_t n = 200;
    const auto dk = discretize(make_kernel(Profile::triangular, 1, 0.5), h, Normalization::mass);
    const auto sym = fourier_symbol(dk, n);
    for (std::size_t k : {1u, 7u, 33u}) {
        PeriodicField f{1, n, h, std::vector<double>(n)};
        for (std::size_t x = 0; x < n; ++x) f.values[x] = std::cos(2.0 * std::numbers::pi * k * x / n);
        const double norm2 = h * n / 2.0;
        EXPECT_NEAR(dj_functional(f, dk), (1.0 - sym[k]) * norm2, 1e-12);
    }
}

TEST(Fourier, TwoNodePattern) {
    const double h = 0.1;
    const std::size_t n = 30;
    const auto dk = discretize(make_kernel(Profile::bump, 1, 0.5), h, Normalization::mass);
    const double c = 0.8;
    PeriodicField f{1, n, h, std::vector<double>(n, 0.0)};
    f.values[10] = c;
    f.values[11] = -c;
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t j = 0; j < dk.size(); ++j) {
        if (dk.offsets[j][0] == 0) w0 = dk.weights[j];
        if (dk.offsets[j][0] == 1) w1 = dk.weights[j];
    }
    const double expect = h * (8.0 * w1 * c * c + 4.0 * c * c * (dk.mass - w0 - w1));
    EXPECT_NEAR(double_energy(f, dk), expect, 1e-14);
}

TEST(Fourier, RejectsMismatch) {
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 1.0), 0.25, Normalization::mass);
    PeriodicField small{1, 8, 0.25, std::vector<double>(8, 0.0)};
    EXPECT_THROW(dj_functional(small, dk), ConfigError);
    PeriodicField wrong_h{1, 16, 0.2, std::vector<double>(16, 0.0)};
    EXPECT_THROW(dj_functional(wrong_h, dk), ConfigError);
}

TEST(Energy, ZeroExtensionMatchesDirichletForm) {
    std::mt19937_64 rng(5);
    const double h = 0.05;
    auto g = make(line(-1, 1), h, 0.3);
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 0.3), h, Normalization::mass);
    const auto form = assemble_dirichlet_form(*g, dk);
    NonlocalOperator op(g, dk, Nonlinearity::identity());
    for (int rep = 0; rep < 10; ++rep) {
        Field u(g, oracle::random_vector(g->size(), rng), 0.0);
        for (std::size_t c : g->collar()) u[c] = 0.0;
        const auto iv = u.interior_values();
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(iv.data(), iv.size());
        const double de = double_energy(u, dk);
        EXPECT_NEAR(de, 2.0 * h * form.quadratic(v), 1e-12 * de);
        EXPECT_NEAR(l2_squared_rate(op, u), -de, 1e-12 * de);
    }
}

TEST(Energy, GnsRatioBehaviour) {
    const double h = 0.125;
    auto g = make(line(-60, 60), h, 1.0);
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 1.0), h, Normalization::mass);
    double lo = INFINITY, hi = 0.0;
    for (double width : {2.0, 4.0, 8.0}) {
        Field u(g);
        for (std::size_t x : g->interior()) u[x] = std::exp(-g->point(x)[0] * g->point(x)[0] / (2 * width * width));
        const double r = gns_ratio(u, dk);
        EXPECT_GT(r, 0.0);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_LT(hi / lo, 10.0);
    EXPECT_THROW(gns_ratio(Field(g), dk), ConfigError);

    // Near-constant periodic fields have almost no energy.
    PeriodicField f{1, 64, h, std::vector<double>(64)};
    for (std::size_t x = 0; x < 64; ++x) f.values[x] = 1.0 + 1e-4 * std::cos(2 * std::numbers::pi * x / 64);
    EXPECT_LT(gns_ratio(f, dk), 1e-6);
}

TEST(Reports, ConvergenceOrderAndCsv) {
    ConvergenceReport r;
    r.epsilons = {0.2, 0.1, 0.05};
    r.errors = {4e-2, 1e-2, 2.5e-3};
    r.valid = {true, true, true};
    r.notes = {"", "", ""};
    finalize(r);
    EXPECT_NEAR(r.order, 2.0, 1e-12);
    EXPECT_TRUE(r.monotone);
    r.errors[2] = 2e-2;
    finalize(r);
    EXPECT_FALSE(r.monotone);
    std::ostringstream os;
    write_csv(os, r);
    EXPECT_EQ(os.str().substr(0, 32), "epsilon,sup_linf_error,valid,not");
}
