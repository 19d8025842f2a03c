#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlkpz/evolution.hpp"
#include "nlkpz/grid.hpp"
#include "nlkpz/kernel.hpp"

namespace nlkpz {

struct Derivatives {
    double t = 0.0;
    Point grad{0.0, 0.0};
    double laplacian = 0.0;
};

/// Exact solution of v_t = Delta v + mu |grad v|^2 obtained from the heat
/// solution w = 1 + a (s0/s)^{N/2} exp(-|x|^2 / (2 s)), s = s0 + 2t, via
/// v = log(w) / mu.
class HopfColeSolution {
public:
    /// mu != 0, amplitude > -1, variance s0 > 0, dim in {1, 2}.
    HopfColeSolution(double mu, double amplitude, double variance, int dim);

    double mu() const noexcept { return mu_; }
    double amplitude() const noexcept { return a_; }
    double variance() const noexcept { return s0_; }
    int dim() const noexcept { return dim_; }

    /// Gaussian part g(x,t) = (s0/s)^{N/2} exp(-|x|^2/(2s)).
    double gaussian(const Point& x, double t) const noexcept;
    double w(const Point& x, double t) const noexcept;
    Derivatives w_derivatives(const Point& x, double t) const noexcept;
    double v(const Point& x, double t) const noexcept;
    Derivatives v_derivatives(const Point& x, double t) const noexcept;

    /// Amplitude and variance of the Gaussian part at time t.
    double amplitude_at(double t) const noexcept;
    double variance_at(double t) const noexcept { return s0_ + 2.0 * t; }

private:
    double mu_;
    double a_;
    double s0_;
    int dim_;
};

struct SpaceTimePoint {
    Point x{0.0, 0.0};
    double t = 0.0;
};

/// max |v_t - Delta v - mu |grad v|^2| over the samples, analytic derivatives.
double residual_kpz(const HopfColeSolution& sol, std::span<const SpaceTimePoint> samples);
/// max |w_t - Delta w| over the samples.
double residual_heat(const HopfColeSolution& sol, std::span<const SpaceTimePoint> samples);

/// Uniform random samples in [-extent, extent]^N x [0, t_max].
std::vector<SpaceTimePoint> random_space_time(int dim, double extent, double t_max, std::size_t count,
                                              std::uint64_t seed);

struct DirichletData {
    SpaceFn u0;
    SpaceTimeFn boundary;
};

/// Samplers of the exact solution for the initial datum and the collar.
DirichletData dirichlet_data_from(const HopfColeSolution& sol);

/// Reference values on every node of the grid at time t.
Field sample_reference(const HopfColeSolution& sol, std::shared_ptr<const Grid> grid, double t);

}  // namespace nlkpz
