#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlkpz/grid.hpp"
#include "nlkpz/kernel.hpp"
#include "nlkpz/nonlocal_operator.hpp"

namespace nlkpz {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (h^N sum |u|^q)^{1/q} over the listed nodes; q = inf gives the max.
double lq_norm(std::span<const double> values, std::span<const std::size_t> nodes, double cell_volume, double q);
/// Interior nodes only.
double lq_norm(const Field& f, double q);

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;
    /// RMS residual of log(value) about the fitted line.
    double residual = 0.0;
    std::size_t samples = 0;
    /// residual <= kPowerLawResidualLimit.
    bool good = false;
};

inline constexpr double kPowerLawResidualLimit = 0.05;

struct Window {
    double lo = 0.0;
    double hi = kInfinity;
};

/// Least squares of log(value) on log(time) over samples with time in the
/// window. Throws ConfigError on fewer than five samples or a nonpositive
/// value inside the window.
PowerLawFit fit_power_law(std::span<const double> times, std::span<const double> values, Window window = {});

struct Lambda1Result {
    double value = 0.0;
    /// Unit-norm eigenvector in grid.interior() order, positive sum.
    Eigen::VectorXd vector;
    int iterations = 0;
    bool dense = false;
};

/// Smallest eigenvalue of the zero-extension Dirichlet form by inverse power
/// iteration (dense Cholesky up to 1000 nodes, sparse LDL^T above).
Lambda1Result lambda1(const Grid& grid, const DiscreteKernel& dk, double tolerance = 1e-10, int max_iter = 10000);

/// Rayleigh quotient <A u, u> / <u, u> of the Dirichlet form.
double rayleigh_quotient(const Grid& grid, const DiscreteKernel& dk, const Eigen::VectorXd& u);

/// Field on the periodic lattice (Z / n)^N with spacing h, index i0 + n i1.
struct PeriodicField {
    int dim = 1;
    std::size_t n = 0;
    double h = 1.0;
    std::vector<double> values;
};

/// h^N / n^N sum_k (J^(0) - J^(k)) |u^(k)|^2 via FFT.
double dj_functional(const PeriodicField& u, const DiscreteKernel& dk);
/// h^N sum_x sum_j w_j (u(x + z_j) - u(x))^2, periodic wrap.
double double_energy(const PeriodicField& u, const DiscreteKernel& dk);
/// Same double sum over the whole lattice with u extended by zero outside
/// the interior nodes of the field's grid.
double double_energy(const Field& u, const DiscreteKernel& dk);

/// double_energy / min(|u|_1^{-4/N} |u|_2^{2+4/N}, |u|_2^2). Throws on a
/// zero field.
double gns_ratio(const Field& u, const DiscreteKernel& dk);
double gns_ratio(const PeriodicField& u, const DiscreteKernel& dk);

/// d/dt |u|_2^2 along the semi-discrete flow: 2 h^N sum_interior u rhs(u).
double l2_squared_rate(const NonlocalOperator& op, const Field& u);

struct DecayReport {
    std::string observable;
    std::vector<double> times;
    std::vector<double> values;
    Window window;
    PowerLawFit fit;
};

struct ConvergenceReport {
    std::vector<double> epsilons;
    std::vector<double> errors;
    std::vector<bool> valid;
    std::vector<std::string> notes;
    /// Slope of log(error) against log(eps) over valid runs.
    double order = 0.0;
    bool monotone = false;
};

/// Fills order and monotone from epsilons/errors/valid.
void finalize(ConvergenceReport& r);

void write_csv(std::ostream& os, const DecayReport& r);
void write_csv(std::ostream& os, const ConvergenceReport& r);

}  // namespace nlkpz
