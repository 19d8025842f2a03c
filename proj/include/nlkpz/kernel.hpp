#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlkpz {

using Point = std::array<double, 2>;

/// Radial kernel shapes. Every profile is supported on the closed ball of
/// radius rho and normalized to unit mass.
enum class Profile {
    uniform,     ///< indicator of the closed ball
    bump,        ///< (1 - |z|^2/rho^2)^2
    triangular,  ///< 1 - |z|/rho, dimension 1 only
};

std::string_view to_string(Profile p);
Profile profile_from_string(std::string_view name);

/// Admissible convolution kernel J: nonnegative, radial, compactly supported,
/// unit mass, finite second moment C(J) = int J(z) z_N^2 dz.
class KernelSpec {
public:
    /// Uniform kernel on [-1, 1].
    KernelSpec();

    Profile profile() const noexcept { return profile_; }
    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return radius_; }
    /// Constant c such that J(z) = c * shape(|z|/rho).
    double normalization() const noexcept { return normalization_; }
    double second_moment() const noexcept { return second_moment_; }
    double mass() const noexcept { return 1.0; }

    /// J as a function of |z|.
    double radial(double r) const noexcept;
    double operator()(const Point& z) const noexcept;
    /// sup J, attained at the origin.
    double sup() const noexcept { return radial(0.0); }

private:
    friend KernelSpec make_kernel(Profile, int, double);
    KernelSpec(Profile p, int dim, double radius, double c, double moment)
        : profile_(p), dim_(dim), radius_(radius), normalization_(c), second_moment_(moment) {}

    Profile profile_;
    int dim_;
    double radius_;
    double normalization_;
    double second_moment_;
};

/// Throws ConfigError on unsupported dimension, nonpositive radius or a
/// profile not defined in the requested dimension.
KernelSpec make_kernel(Profile profile, int dim, double radius);

double second_moment(const KernelSpec& k);

/// J_eps(z) = eps^-N J(z/eps).
class RescaledKernel {
public:
    RescaledKernel(KernelSpec base, double epsilon);

    const KernelSpec& base() const noexcept { return base_; }
    double epsilon() const noexcept { return epsilon_; }
    int dim() const noexcept { return base_.dim(); }
    double radius() const noexcept { return epsilon_ * base_.radius(); }
    double mass() const noexcept { return 1.0; }
    double second_moment() const noexcept { return epsilon_ * epsilon_ * base_.second_moment(); }

    double radial(double r) const noexcept;
    double operator()(const Point& z) const noexcept;

private:
    KernelSpec base_;
    double epsilon_;
    double scale_;  // eps^-N
};

RescaledKernel rescale(const KernelSpec& k, double epsilon);

enum class Normalization {
    raw,          ///< weights h^N J(z_j)
    mass,         ///< weights scaled to sum to exactly one
    mass_moment,  ///< as mass; rescaled operators use the lattice moment C_h
};

std::string_view to_string(Normalization n);
Normalization normalization_from_string(std::string_view name);

/// Lattice quadrature of a kernel: all offsets with |z| <= support radius.
struct DiscreteKernel {
    int dim = 1;
    double h = 0.0;
    double support_radius = 0.0;
    /// Largest |offset component|, i.e. the number of collar layers needed.
    int reach = 0;
    std::vector<std::array<int, 2>> offsets;
    std::vector<double> weights;
    Normalization mode = Normalization::raw;
    /// Sum of weights (pairwise order).
    double mass = 0.0;
    /// C_h = sum_j w_j (z_j,N)^2, physical units.
    double second_moment = 0.0;
    /// Continuum second moment of the kernel that was sampled.
    double continuum_second_moment = 0.0;

    std::size_t size() const noexcept { return weights.size(); }
    /// Pointwise density bound max_j w_j / h^N.
    double sup_density() const noexcept;
    /// Discrete measure of the support, (#offsets) h^N.
    double support_measure() const noexcept;
};

/// Throws ResolutionError when the support radius holds fewer than four
/// lattice spacings.
DiscreteKernel discretize(const KernelSpec& k, double h, Normalization mode);
DiscreteKernel discretize(const RescaledKernel& k, double h, Normalization mode);

/// Symbol of the zero-padded discrete kernel on a periodic n^N lattice,
/// index k_0 + n k_1. Real because the weights are even.
std::vector<double> fourier_symbol(const DiscreteKernel& dk, std::size_t n);

/// CSV dump: offset columns then weight.
void write_csv(std::ostream& os, const DiscreteKernel& dk);

}  // namespace nlkpz
