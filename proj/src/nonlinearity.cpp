#include "nlkpz/nonlinearity.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "nlkpz/error.hpp"

namespace nlkpz {

MuField MuField::constant(double mu) {
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    MuField f;
    f.kind_ = Kind::constant;
    f.value_ = mu;
    f.sup_ = std::abs(mu);
    f.min_ = f.max_ = mu;
    return f;
}

MuField MuField::sampled(std::vector<double> values) {
    if (values.empty()) throw ConfigError("sampled mu field is empty");
    MuField f;
    f.kind_ = Kind::sampled;
    f.min_ = f.max_ = values.front();
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("mu field has non-finite samples");
        f.sup_ = std::max(f.sup_, std::abs(v));
        f.min_ = std::min(f.min_, v);
        f.max_ = std::max(f.max_, v);
    }
    f.values_ = std::move(values);
    return f;
}

Nonlinearity::Nonlinearity(Law law, double a1, double a2) : law_(std::move(law)), alpha1_(a1), alpha2_(a2) {
    if (!(a1 > 0.0) || !(a2 >= a1)) throw ConfigError("cone bounds must satisfy 0 < alpha1 <= alpha2");
}

Nonlinearity Nonlinearity::identity() { return Nonlinearity(IdentityLaw{}, 1.0, 1.0); }

Nonlinearity Nonlinearity::kpz(MuField mu) {
    return Nonlinearity(KpzLaw{std::move(mu)}, 1.0 - kKpzConeHalfWidth, 1.0 + kKpzConeHalfWidth);
}

Nonlinearity Nonlinearity::affine(double slope, double cap, double alpha1, double alpha2) {
    if (!std::isfinite(slope) || !(cap >= 0.0)) throw ConfigError("affine law needs finite slope and cap >= 0");
    return Nonlinearity(AffineLaw{slope, cap}, alpha1, alpha2);
}

Nonlinearity Nonlinearity::with_declared_bounds(double alpha1, double alpha2) const {
    return Nonlinearity(law_, alpha1, alpha2);
}

Nonlinearity::Kind Nonlinearity::kind() const noexcept {
    return static_cast<Kind>(law_.index());
}

std::size_t Nonlinearity::node_count() const noexcept {
    if (const auto* k = std::get_if<KpzLaw>(&law_)) return k->mu.size();
    return 0;
}

const MuField* Nonlinearity::mu() const noexcept {
    if (const auto* k = std::get_if<KpzLaw>(&law_)) return &k->mu;
    return nullptr;
}

double Nonlinearity::g(std::size_t x, double s) const noexcept {
    return visit([&](const auto& law) { return law.at(x).g(s); });
}

double Nonlinearity::dg_ds(std::size_t x, double s) const noexcept {
    return visit([&](const auto& law) { return law.at(x).dg(s); });
}

double Nonlinearity::flux(std::size_t x, double s) const noexcept {
    return visit([&](const auto& law) { return law.at(x).flux(s); });
}

double Nonlinearity::psi(std::size_t x, double s, double sigma) const noexcept {
    return visit([&](const auto& law) { return law.at(x).psi(s, sigma); });
}

double Nonlinearity::mu_of(std::size_t x) const noexcept { return 2.0 * dg_ds(x, 0.0) / g(x, 0.0); }

bool Nonlinearity::is_absorption() const noexcept {
    switch (kind()) {
        case Kind::identity: return true;
        case Kind::kpz: return mu()->max() <= 0.0;
        case Kind::affine: return std::get<AffineLaw>(law_).slope <= 0.0;
    }
    return false;
}

bool Nonlinearity::is_reaction() const noexcept {
    switch (kind()) {
        case Kind::identity: return true;
        case Kind::kpz: return mu()->min() >= 0.0;
        case Kind::affine: return std::get<AffineLaw>(law_).slope >= 0.0;
    }
    return false;
}

double g_eval(const Nonlinearity& G, std::size_t x, double s) { return G.g(x, s); }
double flux(const Nonlinearity& G, std::size_t x, double s) { return G.flux(x, s); }
double psi(const Nonlinearity& G, std::size_t x, double s, double sigma) { return G.psi(x, s, sigma); }
double mu_of(const Nonlinearity& G, std::size_t x) { return G.mu_of(x); }

PropertyReport certify_class(const Nonlinearity& G, std::size_t sample_count, std::uint64_t seed,
                             const CertifyBox& box) {
    if (sample_count == 0) throw ConfigError("certify_class needs at least one sample");
    double scale = 1.0;
    if (const MuField* mu = G.mu()) scale = std::max(mu->sup_norm(), 1.0);
    if (G.kind() == Nonlinearity::Kind::affine) scale = std::max(std::abs(G.mu_of(0)) / 2.0, 1.0);
    const double half = box.half_width.value_or(10.0 / scale);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bulk(-half, half);
    std::bernoulli_distribution coin(0.5);
    const std::size_t nodes = std::max<std::size_t>(G.node_count(), 1);
    std::uniform_int_distribution<std::size_t> node(0, nodes - 1);

    PropertyCheck quotient{"class_condition", 0, 0, std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity(), ""};
    PropertyCheck bounds{"g_within_cone", 0, 0, std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity(), ""};
    const double lo = G.alpha1() - box.tolerance;
    const double hi = G.alpha2() + box.tolerance;
    for (std::size_t i = 0; i < sample_count; ++i) {
        const std::size_t x = node(rng);
        double s = bulk(rng);
        double sigma = bulk(rng);
        // Every tenth sample probes the tails, alternating one-sided and
        // two-sided placements.
        if (i % 10 == 9) {
            s = coin(rng) ? box.tail : -box.tail;
            if (i % 20 == 19) sigma = -s;
        }
        const double q = G.psi(x, s, sigma);
        quotient.samples++;
        quotient.min_observed = std::min(quotient.min_observed, q);
        quotient.max_observed = std::max(quotient.max_observed, q);
        if (!(q >= lo && q <= hi)) quotient.violations++;

        const double g = G.g(x, s);
        bounds.samples++;
        bounds.min_observed = std::min(bounds.min_observed, g);
        bounds.max_observed = std::max(bounds.max_observed, g);
        if (!(g >= lo && g <= hi)) bounds.violations++;
    }
    std::ostringstream detail;
    detail.precision(17);
    detail << "declared [" << G.alpha1() << " " << G.alpha2() << "] box " << half;
    quotient.detail = bounds.detail = detail.str();
    return PropertyReport{"nonlinearity_class", {quotient, bounds}};
}

double power_gap_constant(double q) { return 4.0 * (q - 1.0) / (q * q); }

double power_difference(double a, double b, double p) {
    if (a == b) return 0.0;
    if (a < b) return -power_difference(b, a, p);
    if (b == 0.0) return p == 0.0 ? 0.0 : std::pow(a, p);
    return std::pow(b, p) * std::expm1(p * std::log1p((a - b) / b));
}

PropertyReport check_power_inequality(std::size_t sample_count, std::uint64_t seed, double q_min, double q_max) {
    if (!(q_min >= 1.0) || !(q_max >= q_min)) throw ConfigError("power inequality needs 1 <= q_min <= q_max");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(0.0, 10.0);
    std::uniform_real_distribution<double> exponent(q_min, q_max);
    PropertyCheck check{"power_inequality", 0, 0, std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity(), ""};
    for (std::size_t i = 0; i < sample_count; ++i) {
        double a = value(rng);
        double b = value(rng);
        // Exercise the boundary cases: a zero argument and a near-diagonal pair.
        if (i % 50 == 0) b = 0.0;
        if (i % 50 == 1) b = a * (1.0 + 1e-9);
        const double q = exponent(rng);
        const double lhs = (a - b) * power_difference(a, b, q - 1.0);
        const double d = power_difference(a, b, q / 2.0);
        const double rhs = power_gap_constant(q) * d * d;
        check.samples++;
        if (rhs > 0.0) {
            const double ratio = lhs / rhs;
            check.min_observed = std::min(check.min_observed, ratio);
            check.max_observed = std::max(check.max_observed, ratio);
        }
        if (lhs < rhs - 1e-12 * std::max(std::abs(lhs), rhs)) check.violations++;
    }
    check.detail = "min/max of lhs/rhs";
    return PropertyReport{"power_inequality", {check}};
}

}  // namespace nlkpz
