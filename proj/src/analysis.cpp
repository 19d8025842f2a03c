#include "nlkpz/analysis.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "nlkpz/dirichlet_form.hpp"
#include "nlkpz/error.hpp"
#include "nlkpz/summation.hpp"

namespace nlkpz {

double lq_norm(std::span<const double> values, std::span<const std::size_t> nodes, double cell_volume, double q) {
    if (!(q >= 1.0)) throw ConfigError("norm exponent must be at least 1");
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t i : nodes) m = std::max(m, std::abs(values[i]));
        return m;
    }
    if (q == 1.0) return cell_volume * pairwise_sum(nodes, [&](std::size_t i) { return std::abs(values[i]); });
    if (q == 2.0) {
        return std::sqrt(cell_volume * pairwise_sum(nodes, [&](std::size_t i) { return values[i] * values[i]; }));
    }
    const double s = pairwise_sum(nodes, [&](std::size_t i) { return std::pow(std::abs(values[i]), q); });
    return std::pow(cell_volume * s, 1.0 / q);
}

double lq_norm(const Field& f, double q) {
    return lq_norm(f.values(), f.grid().interior(), f.grid().cell_volume(), q);
}

PowerLawFit fit_power_law(std::span<const double> times, std::span<const double> values, Window window) {
    if (times.size() != values.size()) throw ConfigError("times and values differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < window.lo || times[i] > window.hi) continue;
        if (!(times[i] > 0.0) || !(values[i] > 0.0)) {
            throw ConfigError("power-law fit needs positive times and values inside the window");
        }
        lx.push_back(std::log(times[i]));
        ly.push_back(std::log(values[i]));
    }
    if (lx.size() < 5) throw ConfigError("power-law fit needs at least five samples in the window");
    const auto n = static_cast<double>(lx.size());
    const double mx = pairwise_sum(std::span<const double>(lx)) / n;
    const double my = pairwise_sum(std::span<const double>(ly)) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("power-law fit needs distinct times");
    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.samples = lx.size();
    fit.good = fit.residual <= kPowerLawResidualLimit;
    return fit;
}

namespace {

template <class Solver, class Matrix>
Lambda1Result inverse_iteration(const Solver& solver, const Matrix& A, double tol, int max_iter) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    Lambda1Result res;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd y = solver.solve(x);
        y.normalize();
        const Eigen::VectorXd Ay = A * y;
        const double lambda = y.dot(Ay);
        const double residual = (Ay - lambda * y).norm();
        x = y;
        if (residual <= tol) {
            res.value = lambda;
            res.iterations = it;
            if (x.sum() < 0.0) x = -x;
            res.vector = x;
            return res;
        }
    }
    throw Error("inverse power iteration stagnated after " + std::to_string(max_iter) + " iterations");
}

}  // namespace

Lambda1Result lambda1(const Grid& grid, const DiscreteKernel& dk, double tolerance, int max_iter) {
    const DirichletForm form = assemble_dirichlet_form(grid, dk);
    if (form.size() == 0) throw ConfigError("no interior nodes");
    if (form.size() <= 1000) {
        const Eigen::MatrixXd A = form.dense();
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) throw Error("Dirichlet form is not positive definite");
        auto r = inverse_iteration(llt, A, tolerance, max_iter);
        r.dense = true;
        return r;
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(form.matrix);
    if (ldlt.info() != Eigen::Success) throw Error("sparse factorization of the Dirichlet form failed");
    return inverse_iteration(ldlt, form.matrix, tolerance, max_iter);
}

double rayleigh_quotient(const Grid& grid, const DiscreteKernel& dk, const Eigen::VectorXd& u) {
    const DirichletForm form = assemble_dirichlet_form(grid, dk);
    if (u.size() != form.size()) throw ConfigError("vector length does not match interior node count");
    return form.quadratic(u) / u.squaredNorm();
}

namespace {

void check_periodic(const PeriodicField& u, const DiscreteKernel& dk) {
    if (u.dim != dk.dim) throw ConfigError("periodic field and kernel dimensions differ");
    const std::size_t expect = u.dim == 1 ? u.n : u.n * u.n;
    if (u.values.size() != expect) throw ConfigError("periodic field has the wrong number of values");
    if (std::abs(u.h - dk.h) > 1e-12 * dk.h) throw ConfigError("periodic field spacing differs from the kernel's");
    if (u.n < 2 * static_cast<std::size_t>(dk.reach) + 1) throw ConfigError("periodic lattice smaller than the kernel support");
}

}  // namespace

double dj_functional(const PeriodicField& u, const DiscreteKernel& dk) {
    check_periodic(u, dk);
    const std::size_t total = u.values.size();
    std::vector<std::complex<double>> in(total), out(total);
    for (std::size_t i = 0; i < total; ++i) in[i] = u.values[i];
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    const int n = static_cast<int>(u.n);
    fftw_plan plan = u.dim == 1 ? fftw_plan_dft_1d(n, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE)
                                : fftw_plan_dft_2d(n, n, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    const std::vector<double> symbol = fourier_symbol(dk, u.n);
    std::vector<double> terms(total);
    for (std::size_t k = 0; k < total; ++k) terms[k] = (symbol[0] - symbol[k]) * std::norm(out[k]);
    const double cell = std::pow(u.h, u.dim);
    return cell / static_cast<double>(total) * pairwise_sum(std::span<const double>(terms));
}

double double_energy(const PeriodicField& u, const DiscreteKernel& dk) {
    check_periodic(u, dk);
    const auto n = static_cast<long>(u.n);
    auto wrap = [n](long i) { return ((i % n) + n) % n; };
    const std::size_t total = u.values.size();
    std::vector<double> per_node(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        const long ix = static_cast<long>(idx) % n;
        const long iy = static_cast<long>(idx) / n;
        double acc = 0.0;
        for (std::size_t j = 0; j < dk.size(); ++j) {
            const long jx = wrap(ix + dk.offsets[j][0]);
            const long jy = u.dim == 2 ? wrap(iy + dk.offsets[j][1]) : 0;
            const double d = u.values[static_cast<std::size_t>(jx + n * jy)] - u.values[idx];
            acc += dk.weights[j] * d * d;
        }
        per_node[idx] = acc;
    }
    return std::pow(u.h, u.dim) * pairwise_sum(std::span<const double>(per_node));
}

double double_energy(const Field& u, const DiscreteKernel& dk) {
    const Grid& g = u.grid();
    if (dk.reach > g.collar_layers()) throw ConfigError("collar is narrower than the kernel reach");
    const auto interior = g.interior();
    std::vector<double> per_node(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        const std::size_t x = interior[k];
        const double ux = u[x];
        double acc = 0.0;
        for (std::size_t j = 0; j < dk.size(); ++j) {
            const auto y = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + g.flat_offset(dk.offsets[j]));
            if (g.kind(y) == NodeKind::interior) {
                const double d = u[y] - ux;
                acc += dk.weights[j] * d * d;
            } else {
                // The pair (x, y) and its mirror (y, x) with u(y) = 0.
                acc += 2.0 * dk.weights[j] * ux * ux;
            }
        }
        per_node[k] = acc;
    }
    return g.cell_volume() * pairwise_sum(std::span<const double>(per_node));
}

namespace {

double gns_denominator(double l1, double l2, int dim) {
    if (!(l2 > 0.0)) throw ConfigError("GNS ratio of a zero field");
    const double nash = std::pow(l1, -4.0 / dim) * std::pow(l2, 2.0 + 4.0 / dim);
    return std::min(nash, l2 * l2);
}

}  // namespace

double gns_ratio(const Field& u, const DiscreteKernel& dk) {
    return double_energy(u, dk) / gns_denominator(lq_norm(u, 1.0), lq_norm(u, 2.0), u.grid().dim());
}

double gns_ratio(const PeriodicField& u, const DiscreteKernel& dk) {
    std::vector<std::size_t> all(u.values.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const double cell = std::pow(u.h, u.dim);
    const double l1 = lq_norm(u.values, all, cell, 1.0);
    const double l2 = lq_norm(u.values, all, cell, 2.0);
    return double_energy(u, dk) / gns_denominator(l1, l2, u.dim);
}

double l2_squared_rate(const NonlocalOperator& op, const Field& u) {
    std::vector<double> rhs(u.size());
    op.apply(u.values(), rhs);
    const auto interior = op.grid().interior();
    return 2.0 * op.grid().cell_volume() * pairwise_sum(interior, [&](std::size_t x) { return u[x] * rhs[x]; });
}

void finalize(ConvergenceReport& r) {
    std::vector<double> le, lr;
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
        if (i < r.valid.size() && !r.valid[i]) continue;
        le.push_back(std::log(r.epsilons[i]));
        lr.push_back(std::log(r.errors[i]));
    }
    r.monotone = le.size() == r.epsilons.size() && le.size() >= 2;
    for (std::size_t i = 1; i < r.errors.size() && r.monotone; ++i) {
        if (!(r.epsilons[i] < r.epsilons[i - 1]) || !(r.errors[i] < r.errors[i - 1])) r.monotone = false;
    }
    r.order = 0.0;
    if (le.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < le.size(); ++i) {
            mx += le[i];
            my += lr[i];
        }
        mx /= static_cast<double>(le.size());
        my /= static_cast<double>(le.size());
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < le.size(); ++i) {
            sxx += (le[i] - mx) * (le[i] - mx);
            sxy += (le[i] - mx) * (lr[i] - my);
        }
        if (sxx > 0.0) r.order = sxy / sxx;
    }
}

void write_csv(std::ostream& os, const DecayReport& r) {
    const auto prec = os.precision(17);
    os << "observable,t,value\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) os << r.observable << ',' << r.times[i] << ',' << r.values[i] << '\n';
    os.precision(prec);
}

void write_csv(std::ostream& os, const ConvergenceReport& r) {
    const auto prec = os.precision(17);
    os << "epsilon,sup_linf_error,valid,note\n";
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
        const bool ok = i < r.valid.size() ? r.valid[i] : true;
        os << r.epsilons[i] << ',' << r.errors[i] << ',' << (ok ? 1 : 0) << ',' << (i < r.notes.size() ? r.notes[i] : "")
           << '\n';
    }
    os.precision(prec);
}

}  // namespace nlkpz
