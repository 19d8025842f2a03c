#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlkpz/grid.hpp"
#include "nlkpz/kernel.hpp"
#include "nlkpz/nonlinearity.hpp"
#include "nlkpz/nonlocal_operator.hpp"

namespace nlkpz {

using SpaceFn = std::function<double(const Point&)>;
using SpaceTimeFn = std::function<double(const Point&, double)>;

/// Kernel, nonlinearity and lattice resolution shared by both problem types.
struct OperatorSpec {
    KernelSpec kernel;
    /// Rescaled operator with kernel J_eps when set.
    std::optional<double> epsilon;
    Normalization normalization = Normalization::mass;
    Nonlinearity G = Nonlinearity::identity();
    /// When set, G is replaced by G_mu with mu sampled at every grid node.
    SpaceFn mu;
    /// Grid spacing; defaults to (eps) rho / k_pts.
    std::optional<double> h;
    int k_pts = 8;
};

/// u_t = L u in the box, u = boundary(x, t) on the collar, u(., 0) = u0.
struct DirichletProblem {
    Box box;
    OperatorSpec op;
    SpaceFn u0;
    /// Collar data; zero when empty.
    SpaceTimeFn boundary;
    double T = 1.0;
};

/// Whole-space problem truncated to (-L, L)^N with zero exterior values.
struct CauchyProblem {
    int dim = 1;
    /// Truncation half-width; when empty it is chosen as
    /// 5 (kernel radius) + 8 sqrt(initial_width^2 + 2 D T), D the effective
    /// diffusivity of the linearized operator.
    std::optional<double> half_width;
    double initial_width = 1.0;
    OperatorSpec op;
    SpaceFn u0;
    double T = 1.0;
    /// Allowed sup of |u| on the interior ring next to the box edge,
    /// relative to sup |u0|.
    double contamination_tol = 1e-6;
};

/// Method-of-lines system ready to integrate.
struct SemiDiscreteSystem {
    std::shared_ptr<const Grid> grid;
    std::shared_ptr<const NonlocalOperator> op;
    /// Initial state with the collar filled at t = 0.
    Field initial;
    double T = 0.0;
    SpaceTimeFn boundary;
    bool cauchy = false;
    double contamination_tol = 0.0;
    std::vector<std::size_t> monitor;
    double u0_sup = 0.0;

    void fill_collar(std::span<double> u, double t) const;
};

double truncation_half_width(const CauchyProblem& p, const DiscreteKernel& dk, double effective_diffusivity);
SemiDiscreteSystem make_system(const DirichletProblem& p);
SemiDiscreteSystem make_system(const CauchyProblem& p);

enum class Method { euler, rk4, picard };

struct PicardConfig {
    /// Weight in max_k exp(-M t_k) |v(t_k)|_{L1}; defaults to 2 C~.
    std::optional<double> M;
    double tolerance = 1e-10;
    int max_sweeps = 200;
    /// Trapezoid time step; defaults to the integrator step.
    std::optional<double> dt;
};

struct IntegratorConfig {
    Method method = Method::rk4;
    double cfl_safety = 0.25;
    std::optional<double> dt;
    PicardConfig picard;
};

/// cfl_safety / (2 alpha2 scale_max mass).
double stable_dt(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg);

struct EvolveOptions {
    /// Times in [0, T] at which on_sample fires; steps are shortened to land
    /// on them exactly.
    std::vector<double> sample_times;
    std::function<void(const Field&)> on_sample;
    /// Fires after every step with the new state and the step length.
    std::function<void(const Field&, double)> on_step;
};

struct EvolveResult {
    Field final;
    bool valid = true;
    std::string reason;
    std::size_t steps = 0;
    double dt = 0.0;
    double invalid_since = std::numeric_limits<double>::quiet_NaN();
};

/// Explicit Euler or classical RK4. The collar is refreshed at every stage
/// time. Throws EvolutionError on a non-finite state and ConfigError when a
/// requested dt exceeds 1 / (2 alpha2 scale_max mass). A Cauchy
/// contamination breach stops the run and marks the result invalid.
EvolveResult evolve(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg, const EvolveOptions& opts = {});

struct PicardResult {
    std::vector<double> times;
    std::vector<Field> trajectory;
    /// Weighted-norm distance between successive iterates, one per sweep.
    std::vector<double> diffs;
    /// diffs[k] / diffs[k-1].
    std::vector<double> factors;
    /// Contraction bound of the discrete trapezoid map in the weighted norm.
    double predicted_factor = 0.0;
    double M = 0.0;
    double C_tilde = 0.0;
    int sweeps = 0;
    bool converged = false;
};

/// Fixed-point iteration of
///   v(t) = u0 + int_0^t L v(tau) d tau
/// with the trapezoid rule on a uniform time grid and collar values pinned
/// to the boundary data. Throws ContractionError after two consecutive
/// sweeps with factor >= 1.
PicardResult picard_solve(const SemiDiscreteSystem& sys, const IntegratorConfig& cfg);

struct ComparisonResult {
    std::vector<double> times;
    /// min over interior nodes of (upper - lower) at each sample.
    std::vector<double> gaps;
    double min_gap = std::numeric_limits<double>::infinity();
};

/// Evolves both systems with the same integrator (they must share one grid)
/// and records the ordered gap at the sample times.
ComparisonResult evolve_comparison_pair(const SemiDiscreteSystem& lower, const SemiDiscreteSystem& upper,
                                        const IntegratorConfig& cfg, std::vector<double> sample_times);

}  // namespace nlkpz
