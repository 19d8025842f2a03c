#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "nlkpz/dirichlet_form.hpp"
#include "nlkpz/error.hpp"
#include "nlkpz/grid.hpp"
#include "nlkpz/nonlocal_operator.hpp"
#include "oracles.hpp"

using namespace nlkpz;

namespace {

Box line(double a, double b) { return Box{1, {a, 0.0}, {b, 0.0}}; }
Box square(double a, double b) { return Box{2, {a, a}, {b, b}}; }

std::shared_ptr<const Grid> make(const Box& box, double h, double radius) {
    return std::make_shared<const Grid>(build_grid(box, h, radius));
}

Nonlinearity kpz(double mu) { return Nonlinearity::kpz(MuField::constant(mu)); }

// Full-grid vector filled from a function of position.
std::vector<double> sample(const Grid& g, const std::function<double(const Point&)>& f) {
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = f(g.point(i));
    return u;
}

}  // namespace

TEST(Grid, LineWithTwoCollarLayers) {
    const Grid g = build_grid(line(-1, 1), 0.5, 1.0);
    std::set<double> in, col;
    for (std::size_t i : g.interior()) in.insert(g.point(i)[0]);
    for (std::size_t i : g.collar()) col.insert(g.point(i)[0]);
    EXPECT_EQ(in, (std::set<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
    EXPECT_EQ(col, (std::set<double>{-2.0, -1.5, 1.5, 2.0}));
    EXPECT_EQ(g.collar_layers(), 2);
    EXPECT_EQ(g.size(), 9u);
}

TEST(Grid, SquareWithOneRing) {
    const Grid g = build_grid(square(-1, 1), 0.5, 0.5);
    EXPECT_EQ(g.collar_layers(), 1);
    EXPECT_EQ(g.interior().size(), 25u);
    EXPECT_EQ(g.collar().size(), 24u);
    for (std::size_t i : g.collar()) {
        const Point p = g.point(i);
        EXPECT_TRUE(std::abs(p[0]) == 1.5 || std::abs(p[1]) == 1.5);
    }
    for (std::size_t i : g.interior()) {
        const Point p = g.point(i);
        EXPECT_LE(std::max(std::abs(p[0]), std::abs(p[1])), 1.0);
    }
}

TEST(Grid, CollarCoversKernelRadius) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> rad(0.05, 1.5);
    for (int i = 0; i < 200; ++i) {
        const double h = 0.05;
        const double r = std::max(rad(rng), h);
        const Grid g = build_grid(line(-1, 1), h, r);
        EXPECT_GE(g.collar_width(), r - 1e-12);
        EXPECT_LT(g.collar_width(), r + h);
        EXPECT_EQ(g.interior().size() + g.collar().size(), g.size());
    }
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(build_grid(line(-1, 1), 0.3, 1.0), ConfigError);
    EXPECT_THROW(build_grid(line(-1, 1), 0.0, 1.0), ConfigError);
    EXPECT_THROW(build_grid(line(1, 1), 0.5, 1.0), ConfigError);
    EXPECT_THROW(build_grid(line(-1, 1), 0.5, 0.25), ResolutionError);
}

TEST(Grid, EdgeRing) {
    const Grid g = build_grid(line(-1, 1), 0.25, 0.5);
    const auto ring = g.edge_ring(2);
    std::set<double> xs;
    for (std::size_t i : ring) xs.insert(g.point(i)[0]);
    EXPECT_EQ(xs, (std::set<double>{-1.0, -0.75, 0.75, 1.0}));
    const Grid s = build_grid(square(0, 1), 0.25, 0.25);
    EXPECT_EQ(s.edge_ring(1).size(), 16u);
}

TEST(Grid, FieldCsv) {
    auto g = make(line(0, 1), 0.5, 0.5);
    Field f(g, 0.25);
    f[g->interior()[1]] = 2.0;
    std::ostringstream os;
    write_csv(os, f);
    EXPECT_EQ(os.str(), "x,kind,value\n-0.5,collar,0\n0,interior,0\n0.5,interior,2\n1,interior,0\n1.5,collar,0\n");
    EXPECT_THROW(Field(g, std::vector<double>(3), 0.0), ConfigError);
}

TEST(Operator, ConstantFieldGivesZero) {
    for (double mu : {-2.0, 0.0, 1.0}) {
        auto g = make(line(-1, 1), 0.05, 0.25);
        const auto dk = discretize(make_kernel(Profile::bump, 1, 0.25), 0.05, Normalization::mass);
        NonlocalOperator op(g, dk, kpz(mu), Rescaling{0.25});
        std::vector<double> u(g->size(), 3.25), out(g->size(), 1.0);
        op.apply(u, out);
        for (double v : out) EXPECT_EQ(v, 0.0);
    }
}

TEST(Operator, QuadraticExactnessWithLatticeMoment) {
    for (Profile p : {Profile::uniform, Profile::bump, Profile::triangular}) {
        for (double eps : {0.2, 0.1}) {
            const double h = eps / 8;
            const auto dk = discretize(rescale(make_kernel(p, 1, 1.0), eps), h, Normalization::mass_moment);
            auto g = make(line(-1, 1), h, dk.support_radius);
            NonlocalOperator op(g, dk, Nonlinearity::identity(), Rescaling{eps});
            const auto u = sample(*g, [](const Point& x) { return x[0] * x[0]; });
            std::vector<double> out(g->size());
            op.apply(u, out);
            for (std::size_t i : g->interior()) ASSERT_NEAR(out[i], 2.0, 1e-8) << to_string(p) << " x=" << g->point(i)[0];
        }
    }
    const double eps = 0.2, h = eps / 8;
    const auto dk = discretize(rescale(make_kernel(Profile::bump, 2, 1.0), eps), h, Normalization::mass_moment);
    auto g = make(square(-0.5, 0.5), h, dk.support_radius);
    NonlocalOperator op(g, dk, Nonlinearity::identity(), Rescaling{eps});
    const auto u = sample(*g, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; });
    std::vector<double> out(g->size());
    op.apply(u, out);
    for (std::size_t i : g->interior()) ASSERT_NEAR(out[i], 4.0, 1e-8);
}

TEST(Operator, AnalyticMomentScaleUsesContinuumValue) {
    const double eps = 0.1, h = eps / 8;
    const auto k = rescale(make_kernel(Profile::uniform, 1, 1.0), eps);
    const auto dk = discretize(k, h, Normalization::mass);
    auto g = make(line(-1, 1), h, dk.support_radius);
    NonlocalOperator op(g, dk, Nonlinearity::identity(), Rescaling{eps});
    EXPECT_NEAR(op.moment_used(), eps * eps / 3.0, 1e-15);
    EXPECT_NEAR(op.scale(g->interior()[0]), 2.0 / (eps * eps / 3.0), 1e-9);
    // Quadratic then returns C_h / C = 1 + h/eps times 2.
    const auto u = sample(*g, [](const Point& x) { return x[0] * x[0]; });
    std::vector<double> out(g->size());
    op.apply(u, out);
    EXPECT_NEAR(out[g->interior()[7]], 2.0 * (1.0 + h / eps), 1e-9);
}

TEST(Operator, LinearCaseMatchesDenseMatrix) {
    // 64 interior nodes, unrescaled, G == 1: rhs = K u - m u.
    const double h = 1.0 / 63;
    auto g = make(line(0, 1), h, 0.1);
    const auto dk = discretize(make_kernel(Profile::bump, 1, 0.1), h, Normalization::mass);
    ASSERT_EQ(g->interior().size(), 64u);
    const std::size_t n = g->size();
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t x : g->interior()) {
        for (std::size_t j = 0; j < dk.size(); ++j) {
            const auto y = static_cast<std::size_t>(static_cast<long>(x) + dk.offsets[j][0]);
            A[x][y] += dk.weights[j];
            A[x][x] -= dk.weights[j];
        }
    }
    std::mt19937_64 rng(2);
    NonlocalOperator op(g, dk, Nonlinearity::identity());
    for (int rep = 0; rep < 10; ++rep) {
        const auto u = oracle::random_vector(n, rng);
        const auto ref = oracle::matvec(A, u);
        std::vector<double> out(n);
        op.apply(u, out);
        for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(out[i], ref[i], 1e-12);
    }
}

TEST(Operator, ShiftInvariance) {
    std::mt19937_64 rng(3);
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 0.5), 0.1, Normalization::mass);
    auto g = make(line(-1, 1), 0.1, 0.5);
    NonlocalOperator op(g, dk, kpz(1.3));
    for (int rep = 0; rep < 20; ++rep) {
        auto u = oracle::random_vector(g->size(), rng);
        std::vector<double> a(g->size()), b(g->size());
        op.apply(u, a);
        for (double& v : u) v += 0.5;
        op.apply(u, b);
        for (std::size_t i : g->interior()) EXPECT_NEAR(a[i], b[i], 1e-13);
    }
}

TEST(Operator, MassBalanceAgainstCollarFlux) {
    std::mt19937_64 rng(4);
    for (int dim : {1, 2}) {
        const double h = 0.1;
        const auto dk = discretize(make_kernel(Profile::uniform, dim, 0.4), h, Normalization::mass);
        auto g = make(dim == 1 ? line(-1, 1) : square(-0.5, 0.5), h, 0.4);
        NonlocalOperator op(g, dk, Nonlinearity::identity());
        auto u = oracle::random_vector(g->size(), rng, 0.0, 1.0);
        for (std::size_t c : g->collar()) u[c] = 0.0;
        std::vector<double> out(g->size());
        op.apply(u, out);
        double total = 0.0, leak = 0.0;
        for (std::size_t x : g->interior()) {
            total += out[x];
            for (std::size_t j = 0; j < dk.size(); ++j) {
                const auto y = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + g->flat_offset(dk.offsets[j]));
                if (g->kind(y) == NodeKind::collar) leak += dk.weights[j] * u[x];
            }
        }
        EXPECT_NEAR(total * g->cell_volume(), -leak * g->cell_volume(), 1e-12);
    }
}

TEST(Operator, LipschitzBoundHolds) {
    std::mt19937_64 rng(5);
    const double eps = 0.2, h = 0.025;
    const auto dk = discretize(rescale(make_kernel(Profile::bump, 1, 1.0), eps), h, Normalization::mass_moment);
    auto g = make(line(-1, 1), h, dk.support_radius);
    for (double mu : {-3.0, 0.5, 4.0}) {
        NonlocalOperator op(g, dk, kpz(mu), Rescaling{eps});
        double worst = 0.0;
        for (int rep = 0; rep < 200; ++rep) {
            const auto u = oracle::random_vector(g->size(), rng, -2.0, 2.0);
            const auto v = oracle::random_vector(g->size(), rng);
            const double d = 1e-3;
            std::vector<double> w(u), a(g->size()), b(g->size());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += d * v[i];
            op.apply(u, a);
            op.apply(w, b);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) den = std::max(den, std::abs(d * v[i]));
            for (std::size_t i : g->interior()) num = std::max(num, std::abs(b[i] - a[i]));
            worst = std::max(worst, num / den);
        }
        EXPECT_LE(worst, op.lipschitz_bound());
        EXPECT_GT(worst, 0.1 * op.lipschitz_bound());
    }
}

TEST(Operator, CheckedEvaluationRejectsBadInput) {
    auto g = make(line(-1, 1), 0.25, 1.0);
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 1.0), 0.25, Normalization::mass);
    Field u(g);
    std::vector<double> collar(g->collar().size(), 0.0);
    EXPECT_NO_THROW(nonlocal_rhs(g, dk, kpz(1.0), u, collar));
    std::vector<double> short_collar(collar.size() - 1, 0.0);
    EXPECT_THROW(nonlocal_rhs(g, dk, kpz(1.0), u, short_collar), ConfigError);
    u[g->interior()[3]] = std::nan("");
    EXPECT_THROW(nonlocal_rhs(g, dk, kpz(1.0), u, collar), ConfigError);

    Field v(g);
    std::vector<double> ones(collar.size(), 1.0);
    const Field r = nonlocal_rhs(g, dk, Nonlinearity::identity(), v, ones);
    // Leftmost interior node sees four collar neighbours at value one.
    EXPECT_NEAR(r[g->interior()[0]], 4.0 * 0.125 / 1.125, 1e-15);
    for (std::size_t c : g->collar()) EXPECT_EQ(r[c], 0.0);
}

TEST(DirichletForm, SymmetricWithLeakAndGershgorinRange) {
    const double h = 1.0 / 31;
    const Grid g = build_grid(line(0, 1), h, 0.2);
    const auto dk = discretize(make_kernel(Profile::uniform, 1, 0.2), h, Normalization::mass);
    const auto form = assemble_dirichlet_form(g, dk);
    ASSERT_EQ(form.size(), 32);
    const Eigen::MatrixXd A = form.dense();
    EXPECT_EQ((A - A.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(form.quadratic(Eigen::VectorXd::Ones(32)), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 2.0 * dk.mass + 1e-12);
}

TEST(DirichletForm, QuadraticMatchesPairSum) {
    std::mt19937_64 rng(6);
    for (int dim : {1, 2}) {
        const double h = 0.1;
        const Grid g = build_grid(dim == 1 ? line(-1, 1) : square(-0.5, 0.5), h, 0.4);
        const auto dk = discretize(make_kernel(Profile::bump, dim, 0.4), h, Normalization::mass);
        const auto form = assemble_dirichlet_form(g, dk);
        const auto vals = oracle::random_vector(g.interior().size(), rng);
        Eigen::VectorXd u(vals.size());
        std::vector<double> full(g.size(), 0.0);
        for (std::size_t k = 0; k < vals.size(); ++k) {
            u[k] = vals[k];
            full[g.interior()[k]] = vals[k];
        }
        // 1/2 sum over ordered pairs with zero extension; pairs with x outside
        // the grid are counted through the mirrored offset.
        double pairs = 0.0;
        for (std::size_t x : g.interior()) {
            for (std::size_t j = 0; j < dk.size(); ++j) {
                const auto y = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + g.flat_offset(dk.offsets[j]));
                const double d = full[y] - full[x];
                pairs += 0.5 * dk.weights[j] * d * d;
                if (g.kind(y) == NodeKind::collar) pairs += 0.5 * dk.weights[j] * full[x] * full[x];
            }
        }
        EXPECT_NEAR(form.quadratic(u), pairs, 1e-12 * pairs);
    }
}
