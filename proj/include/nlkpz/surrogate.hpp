#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nlkpz {

/// Fine-grid solution of the one-dimensional quasilinear problem
///   v_t = v_xx + mu(x) v_x^2  on (lo, hi),  v(lo), v(hi) held at v0,
/// by second-order central differences and RK4 in time. Snapshots of v and
/// v_t are stored on a time lattice and evaluated with cubic Lagrange
/// interpolation in x and cubic Hermite interpolation in t.
class QuasilinearSurrogate {
public:
    struct Settings {
        double lo = -8.0;
        double hi = 8.0;
        double h = 0.005;
        double T = 0.25;
        /// RK4 step as a multiple of h^2.
        double dt_factor = 0.2;
        /// Snapshot spacing in time.
        double snapshot_dt = 1.0 / 256.0;
    };

    QuasilinearSurrogate(std::function<double(double)> mu, std::function<double(double)> v0, Settings s);

    const Settings& settings() const noexcept { return s_; }
    std::size_t nodes() const noexcept { return n_; }
    double operator()(double x, double t) const;

    /// Nodal values of the last snapshot at or before t (no time interpolation).
    const std::vector<double>& snapshot(std::size_t k) const { return v_[k]; }
    double snapshot_time(std::size_t k) const { return times_[k]; }
    std::size_t snapshot_count() const noexcept { return times_.size(); }

private:
    void rhs(const std::vector<double>& v, std::vector<double>& out) const;
    double interp(const std::vector<double>& f, double x) const;

    Settings s_;
    std::size_t n_ = 0;
    std::vector<double> mu_;
    std::vector<double> times_;
    std::vector<std::vector<double>> v_;
    std::vector<std::vector<double>> vt_;
};

/// Sup-norm discrepancy between a surrogate and one at half the spacing,
/// over [a, b] x sample times; divided by 3 it estimates the error of the
/// finer solution.
double surrogate_self_difference(const QuasilinearSurrogate& coarse, const QuasilinearSurrogate& fine, double a,
                                 double b, const std::vector<double>& times, std::size_t points = 401);

}  // namespace nlkpz
