#include "nlkpz/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include "nlkpz/error.hpp"

namespace nlkpz {

QuasilinearSurrogate::QuasilinearSurrogate(std::function<double(double)> mu, std::function<double(double)> v0,
                                           Settings s)
    : s_(s) {
    if (!(s.hi > s.lo) || !(s.h > 0.0) || !(s.T > 0.0) || !(s.snapshot_dt > 0.0) || !(s.dt_factor > 0.0)) {
        throw ConfigError("invalid surrogate settings");
    }
    const double cells = (s.hi - s.lo) / s.h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells) throw ConfigError("surrogate interval is not a multiple of h");
    n_ = static_cast<std::size_t>(std::round(cells)) + 1;
    if (n_ < 8) throw ConfigError("surrogate grid too coarse");

    std::vector<double> v(n_);
    mu_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const double x = s.lo + static_cast<double>(i) * s.h;
        v[i] = v0(x);
        mu_[i] = mu(x);
    }

    const auto n_snap = static_cast<std::size_t>(std::ceil(s.T / s.snapshot_dt - 1e-9));
    const double dts = s.T / static_cast<double>(n_snap);
    const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(dts / (s.dt_factor * s.h * s.h) - 1e-9)));
    const double dt = dts / static_cast<double>(sub);

    std::vector<double> k1(n_), k2(n_), k3(n_), k4(n_), st(n_);
    auto record = [&](double t) {
        times_.push_back(t);
        v_.push_back(v);
        rhs(v, k1);
        vt_.push_back(k1);
    };
    record(0.0);
    for (std::size_t k = 1; k <= n_snap; ++k) {
        for (std::size_t j = 0; j < sub; ++j) {
            rhs(v, k1);
            for (std::size_t i = 0; i < n_; ++i) st[i] = v[i] + 0.5 * dt * k1[i];
            rhs(st, k2);
            for (std::size_t i = 0; i < n_; ++i) st[i] = v[i] + 0.5 * dt * k2[i];
            rhs(st, k3);
            for (std::size_t i = 0; i < n_; ++i) st[i] = v[i] + dt * k3[i];
            rhs(st, k4);
            for (std::size_t i = 0; i < n_; ++i) v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for (double x : v) {
            if (!std::isfinite(x)) throw EvolutionError("surrogate solution became non-finite", (k - 1) * dts);
        }
        record(k == n_snap ? s.T : static_cast<double>(k) * dts);
    }
}

void QuasilinearSurrogate::rhs(const std::vector<double>& v, std::vector<double>& out) const {
    const double ih2 = 1.0 / (s_.h * s_.h);
    const double i2h = 0.5 / s_.h;
    out.front() = 0.0;
    out.back() = 0.0;
    for (std::size_t i = 1; i + 1 < n_; ++i) {
        const double vx = (v[i + 1] - v[i - 1]) * i2h;
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * ih2 + mu_[i] * vx * vx;
    }
}

double QuasilinearSurrogate::interp(const std::vector<double>& f, double x) const {
    const double pos = (x - s_.lo) / s_.h;
    auto i0 = static_cast<long>(std::floor(pos)) - 1;
    i0 = std::clamp<long>(i0, 0, static_cast<long>(n_) - 4);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) l *= (pos - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
        }
        sum += l * f[static_cast<std::size_t>(i0 + a)];
    }
    return sum;
}

double QuasilinearSurrogate::operator()(double x, double t) const {
    if (x < s_.lo || x > s_.hi || t < 0.0 || t > s_.T * (1.0 + 1e-12)) {
        throw ConfigError("surrogate evaluated outside its domain");
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    if (k + 1 >= times_.size()) k = times_.size() - 2;
    const double t0 = times_[k];
    const double dt = times_[k + 1] - t0;
    const double tau = (t - t0) / dt;
    const double p0 = interp(v_[k], x), p1 = interp(v_[k + 1], x);
    const double m0 = interp(vt_[k], x) * dt, m1 = interp(vt_[k + 1], x) * dt;
    const double tau2 = tau * tau, tau3 = tau2 * tau;
    return (2 * tau3 - 3 * tau2 + 1) * p0 + (tau3 - 2 * tau2 + tau) * m0 + (-2 * tau3 + 3 * tau2) * p1 +
           (tau3 - tau2) * m1;
}

double surrogate_self_difference(const QuasilinearSurrogate& coarse, const QuasilinearSurrogate& fine, double a,
                                 double b, const std::vector<double>& times, std::size_t points) {
    double worst = 0.0;
    for (double t : times) {
        for (std::size_t i = 0; i < points; ++i) {
            const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
            worst = std::max(worst, std::abs(coarse(x, t) - fine(x, t)));
        }
    }
    return worst;
}

}  // namespace nlkpz
