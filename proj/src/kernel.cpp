#include "nlkpz/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "nlkpz/error.hpp"
#include "nlkpz/summation.hpp"

namespace nlkpz {

namespace {

// Relative slack used when deciding whether a lattice point lies on the
// closed support.
constexpr double kSupportSlack = 1e-12;

// Unit-radius shape functions; all vanish outside [0,1].
double shape(Profile p, double t) noexcept {
    if (t > 1.0 + kSupportSlack) return 0.0;
    t = std::min(t, 1.0);
    switch (p) {
        case Profile::uniform:
            return 1.0;
        case Profile::bump: {
            const double a = 1.0 - t * t;
            return a * a;
        }
        case Profile::triangular:
            return 1.0 - t;
    }
    return 0.0;
}

// Mass and int shape(|z|) z_N^2 dz over the unit ball, in closed form.
struct UnitIntegrals {
    double mass;
    double moment;
};

UnitIntegrals unit_integrals(Profile p, int dim) {
    const double pi = std::numbers::pi;
    if (dim == 1) {
        switch (p) {
            case Profile::uniform: return {2.0, 2.0 / 3.0};
            case Profile::bump: return {16.0 / 15.0, 16.0 / 105.0};
            case Profile::triangular: return {1.0, 1.0 / 6.0};
        }
    } else {
        switch (p) {
            case Profile::uniform: return {pi, pi / 4.0};
            case Profile::bump: return {pi / 3.0, pi / 24.0};
            case Profile::triangular: break;
        }
    }
    throw ConfigError("triangular profile is only defined in dimension 1");
}

}  // namespace

std::string_view to_string(Profile p) {
    switch (p) {
        case Profile::uniform: return "uniform";
        case Profile::bump: return "bump";
        case Profile::triangular: return "triangular";
    }
    return "?";
}

Profile profile_from_string(std::string_view name) {
    if (name == "uniform") return Profile::uniform;
    if (name == "bump") return Profile::bump;
    if (name == "triangular") return Profile::triangular;
    throw ConfigError("unknown kernel profile '" + std::string(name) + "'");
}

std::string_view to_string(Normalization n) {
    switch (n) {
        case Normalization::raw: return "raw";
        case Normalization::mass: return "mass";
        case Normalization::mass_moment: return "mass+moment";
    }
    return "?";
}

Normalization normalization_from_string(std::string_view name) {
    if (name == "raw") return Normalization::raw;
    if (name == "mass") return Normalization::mass;
    if (name == "mass+moment" || name == "mass_moment") return Normalization::mass_moment;
    throw ConfigError("unknown normalization '" + std::string(name) + "'");
}

double KernelSpec::radial(double r) const noexcept {
    return normalization_ * shape(profile_, r / radius_);
}

double KernelSpec::operator()(const Point& z) const noexcept {
    const double r2 = dim_ == 1 ? z[0] * z[0] : z[0] * z[0] + z[1] * z[1];
    return radial(std::sqrt(r2));
}

KernelSpec make_kernel(Profile profile, int dim, double radius) {
    if (dim != 1 && dim != 2) throw ConfigError("kernel dimension must be 1 or 2");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("kernel radius must be positive");
    const UnitIntegrals u = unit_integrals(profile, dim);
    // J(z) = c shape(|z|/rho): mass c rho^N u.mass, moment c rho^{N+2} u.moment.
    const double c = 1.0 / (u.mass * std::pow(radius, dim));
    const double moment = u.moment / u.mass * radius * radius;
    return KernelSpec(profile, dim, radius, c, moment);
}

KernelSpec::KernelSpec() : KernelSpec(make_kernel(Profile::uniform, 1, 1.0)) {}

double second_moment(const KernelSpec& k) { return k.second_moment(); }

RescaledKernel::RescaledKernel(KernelSpec base, double epsilon) : base_(base), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("rescaling epsilon must be positive");
    scale_ = std::pow(epsilon, -base_.dim());
}

double RescaledKernel::radial(double r) const noexcept { return scale_ * base_.radial(r / epsilon_); }

double RescaledKernel::operator()(const Point& z) const noexcept {
    return scale_ * base_(Point{z[0] / epsilon_, z[1] / epsilon_});
}

RescaledKernel rescale(const KernelSpec& k, double epsilon) { return RescaledKernel(k, epsilon); }

double DiscreteKernel::sup_density() const noexcept {
    const double m = weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
    return m / std::pow(h, dim);
}

double DiscreteKernel::support_measure() const noexcept {
    return static_cast<double>(weights.size()) * std::pow(h, dim);
}

namespace {

template <class Radial>
DiscreteKernel sample_lattice(int dim, double radius, double continuum_moment, double h,
                              Normalization mode, Radial&& radial) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("lattice spacing must be positive");
    const double per_radius = radius / h;
    if (per_radius < 4.0 * (1.0 - kSupportSlack)) {
        throw ResolutionError("kernel support radius " + std::to_string(radius) + " spans only " +
                                  std::to_string(per_radius) + " lattice spacings; need h <= " +
                                  std::to_string(radius / 4.0),
                              radius / 4.0);
    }

    DiscreteKernel dk;
    dk.dim = dim;
    dk.h = h;
    dk.support_radius = radius;
    dk.mode = mode;
    dk.continuum_second_moment = continuum_moment;
    const int reach = static_cast<int>(std::floor(per_radius * (1.0 + kSupportSlack)));
    dk.reach = reach;
    const double r2max = per_radius * per_radius * (1.0 + 2.0 * kSupportSlack);
    const int ylo = dim == 2 ? -reach : 0;
    const int yhi = dim == 2 ? reach : 0;
    const double hn = std::pow(h, dim);
    for (int j = ylo; j <= yhi; ++j) {
        for (int i = -reach; i <= reach; ++i) {
            const double r2 = double(i) * i + double(j) * j;
            if (r2 > r2max) continue;
            // Points on the support boundary take the boundary value.
            const double r = std::min(std::sqrt(r2) * h, radius);
            dk.offsets.push_back({i, j});
            dk.weights.push_back(hn * radial(r));
        }
    }

    if (mode != Normalization::raw) {
        const double raw_mass = pairwise_sum(dk.weights);
        for (double& w : dk.weights) w /= raw_mass;
        // Fold the rounding residue into the central weight until the
        // pairwise sum is exactly one.
        const std::size_t centre = dk.weights.size() / 2;
        for (int it = 0; it < 8; ++it) {
            const double s = pairwise_sum(dk.weights);
            if (s == 1.0) break;
            dk.weights[centre] += 1.0 - s;
        }
    }
    dk.mass = pairwise_sum(dk.weights);

    std::vector<double> moment_terms(dk.weights.size());
    for (std::size_t k = 0; k < dk.weights.size(); ++k) {
        const double z = dk.offsets[k][dim - 1] * h;
        moment_terms[k] = dk.weights[k] * z * z;
    }
    dk.second_moment = pairwise_sum(moment_terms);
    return dk;
}

}  // namespace

DiscreteKernel discretize(const KernelSpec& k, double h, Normalization mode) {
    return sample_lattice(k.dim(), k.radius(), k.second_moment(), h, mode,
                          [&](double r) { return k.radial(r); });
}

DiscreteKernel discretize(const RescaledKernel& k, double h, Normalization mode) {
    return sample_lattice(k.dim(), k.radius(), k.second_moment(), h, mode,
                          [&](double r) { return k.radial(r); });
}

std::vector<double> fourier_symbol(const DiscreteKernel& dk, std::size_t n) {
    if (n < static_cast<std::size_t>(2 * dk.reach + 1)) {
        throw ConfigError("periodic grid of size " + std::to_string(n) +
                          " is smaller than the kernel stencil (" + std::to_string(2 * dk.reach + 1) + ")");
    }
    const std::size_t ny = dk.dim == 2 ? n : 1;
    std::vector<double> symbol(n * ny);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::vector<double> terms(dk.size());
    for (std::size_t ky = 0; ky < ny; ++ky) {
        for (std::size_t kx = 0; kx < n; ++kx) {
            for (std::size_t j = 0; j < dk.size(); ++j) {
                // Reduce the phase modulo n exactly before scaling.
                const long long px = (static_cast<long long>(kx) * dk.offsets[j][0]) % static_cast<long long>(n);
                const long long py = (static_cast<long long>(ky) * dk.offsets[j][1]) % static_cast<long long>(n);
                terms[j] = dk.weights[j] * std::cos(step * static_cast<double>(px + py));
            }
            symbol[kx + n * ky] = pairwise_sum(terms);
        }
    }
    return symbol;
}

void write_csv(std::ostream& os, const DiscreteKernel& dk) {
    os << (dk.dim == 1 ? "offset,weight\n" : "offset_x,offset_y,weight\n");
    const auto prec = os.precision(17);
    for (std::size_t j = 0; j < dk.size(); ++j) {
        os << dk.offsets[j][0] << ',';
        if (dk.dim == 2) os << dk.offsets[j][1] << ',';
        os << dk.weights[j] << '\n';
    }
    os.precision(prec);
}

}  // namespace nlkpz
