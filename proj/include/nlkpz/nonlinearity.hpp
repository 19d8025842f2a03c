#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "nlkpz/report.hpp"

namespace nlkpz {

/// Spatially varying KPZ coefficient mu(x), indexed by grid node.
class MuField {
public:
    enum class Kind { constant, sampled };

    static MuField constant(double mu);
    static MuField sampled(std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    bool is_constant() const noexcept { return kind_ == Kind::constant; }
    double at(std::size_t node) const noexcept { return kind_ == Kind::constant ? value_ : values_[node]; }
    /// Number of nodes for sampled fields, zero for constants.
    std::size_t size() const noexcept { return values_.size(); }
    double sup_norm() const noexcept { return sup_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }

private:
    MuField() = default;
    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    std::vector<double> values_;
    double sup_ = 0.0, min_ = 0.0, max_ = 0.0;
};

/// Flux law G == 1 evaluated at one node.
struct IdentityLocal {
    double g(double) const noexcept { return 1.0; }
    double dg(double) const noexcept { return 0.0; }
    double flux(double s) const noexcept { return s; }
    double dflux(double) const noexcept { return 1.0; }
    double psi(double, double) const noexcept { return 1.0; }
};

/// G_mu(s) = 1 + mu s / (2 (1 + mu^2 s^2)) at one node.
struct KpzLocal {
    double mu;

    double g(double s) const noexcept { return 1.0 + mu * s / (2.0 * (1.0 + mu * mu * s * s)); }
    double dg(double s) const noexcept {
        const double m2s2 = mu * mu * s * s;
        const double d = 1.0 + m2s2;
        return 0.5 * mu * (1.0 - m2s2) / (d * d);
    }
    double flux(double s) const noexcept { return s + mu * s * s / (2.0 * (1.0 + mu * mu * s * s)); }
    double dflux(double s) const noexcept { return g(s) + s * dg(s); }
    /// Exact difference quotient of the flux; symmetric in its arguments.
    double psi(double s, double sigma) const noexcept {
        return 1.0 + mu * (s + sigma) / (2.0 * ((1.0 + mu * mu * s * s) * (1.0 + mu * mu * sigma * sigma)));
    }
};

/// G(s) = 1 + clamp(slope s, -cap, cap). Test law with declared bounds.
struct AffineLocal {
    double slope;
    double cap;

    double g(double s) const noexcept { return 1.0 + std::clamp(slope * s, -cap, cap); }
    double dg(double s) const noexcept { return std::abs(slope * s) < cap ? slope : 0.0; }
    double flux(double s) const noexcept { return s * g(s); }
    double dflux(double s) const noexcept { return g(s) + s * dg(s); }
    double psi(double s, double sigma) const noexcept {
        if (s == sigma) return dflux(s);
        if (std::isinf(cap)) return 1.0 + slope * (s + sigma);
        return (flux(s) - flux(sigma)) / (s - sigma);
    }
};

struct IdentityLaw {
    IdentityLocal at(std::size_t) const noexcept { return {}; }
};
struct KpzLaw {
    MuField mu;
    KpzLocal at(std::size_t x) const noexcept { return {mu.at(x)}; }
};
struct AffineLaw {
    double slope;
    double cap;
    AffineLocal at(std::size_t) const noexcept { return {slope, cap}; }
};

/// Nonlinearity G(x, s) of the class
///   alpha1 <= (G(x,s) s - G(x,sigma) sigma) / (s - sigma) <= alpha2.
/// The position x is a grid node index; laws without x dependence ignore it.
class Nonlinearity {
public:
    enum class Kind { identity, kpz, affine };

    static Nonlinearity identity();
    static Nonlinearity kpz(MuField mu);
    /// Capped affine test law. Declared bounds are taken on trust, which is
    /// what certify_class is for. cap = +inf gives the unbounded 1 + slope s.
    static Nonlinearity affine(double slope, double cap, double alpha1, double alpha2);

    /// Same law, different claimed cone bounds (fault injection).
    Nonlinearity with_declared_bounds(double alpha1, double alpha2) const;

    Kind kind() const noexcept;
    double alpha1() const noexcept { return alpha1_; }
    double alpha2() const noexcept { return alpha2_; }
    /// Number of nodes the law is sampled on; zero if x-independent.
    std::size_t node_count() const noexcept;
    const MuField* mu() const noexcept;

    double g(std::size_t x, double s) const noexcept;
    double dg_ds(std::size_t x, double s) const noexcept;
    double flux(std::size_t x, double s) const noexcept;
    double psi(std::size_t x, double s, double sigma) const noexcept;
    /// 2 G_s(x,0) / G(x,0).
    double mu_of(std::size_t x) const noexcept;

    /// flux(s) <= s for all s (absorption) / flux(s) >= s (reaction).
    bool is_absorption() const noexcept;
    bool is_reaction() const noexcept;

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), law_);
    }

private:
    using Law = std::variant<IdentityLaw, KpzLaw, AffineLaw>;
    Nonlinearity(Law law, double a1, double a2);

    Law law_;
    double alpha1_;
    double alpha2_;
};

/// 3 sqrt(3) / 16, the half-width of the G_mu monotonicity cone.
inline const double kKpzConeHalfWidth = 3.0 * std::sqrt(3.0) / 16.0;

double g_eval(const Nonlinearity& G, std::size_t x, double s);
double flux(const Nonlinearity& G, std::size_t x, double s);
double psi(const Nonlinearity& G, std::size_t x, double s, double sigma);
double mu_of(const Nonlinearity& G, std::size_t x);

struct CertifyBox {
    /// Half-width of the bulk sampling interval for s and sigma; default
    /// 10 / max(|mu|_inf, 1).
    std::optional<double> half_width;
    double tail = 1e3;
    double tolerance = 1e-12;
};

/// Empirical check of the class condition on random (x, s, sigma).
PropertyReport certify_class(const Nonlinearity& G, std::size_t sample_count, std::uint64_t seed,
                             const CertifyBox& box = {});

/// c(q) = 4 (q - 1) / q^2.
double power_gap_constant(double q);

/// a^p - b^p without cancellation when a and b are close.
double power_difference(double a, double b, double p);

/// Samples (a - b)(a^{q-1} - b^{q-1}) >= c(q) (a^{q/2} - b^{q/2})^2 for
/// a, b >= 0 and q in [q_min, q_max].
PropertyReport check_power_inequality(std::size_t sample_count, std::uint64_t seed, double q_min = 1.0,
                                      double q_max = 8.0);

}  // namespace nlkpz
