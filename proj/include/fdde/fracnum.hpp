#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fdde/error.hpp"
#include "fdde/grid.hpp"
#include "fdde/special_functions.hpp"

namespace fdde {

namespace detail {

inline void check_order(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("fractional order alpha must lie in (0,1)");
    }
}

// Σ_{m≥2} C(p,m) x^m for |x| ≤ 1/4, i.e. (1+x)^p - 1 - p·x without the
// cancellation of the direct formula.
inline double binomial_tail(double p, double x) {
    double coef = p * (p - 1.0) / 2.0;
    double xm = x * x;
    double sum = 0.0;
    for (int m = 2; m < 80; ++m) {
        const double term = coef * xm;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        coef *= (p - m) / (m + 1.0);
        xm *= x;
    }
    return sum;
}

// (k+1)^p - 2k^p + (k-1)^p, k ≥ 1
inline double second_difference_pow(double p, std::size_t k) {
    const double kd = static_cast<double>(k);
    if (k < 4) {
        return std::pow(kd + 1.0, p) - 2.0 * std::pow(kd, p) + std::pow(kd - 1.0, p);
    }
    const double x = 1.0 / kd;
    return std::pow(kd, p) * (binomial_tail(p, x) + binomial_tail(p, -x));
}

// (n-1)^{α+1} - (n-α-1)·n^α, n ≥ 1
inline double first_endpoint_weight(double alpha, std::size_t n) {
    const double nd = static_cast<double>(n);
    const double p = alpha + 1.0;
    if (n < 4) {
        return std::pow(nd - 1.0, p) - (nd - alpha - 1.0) * std::pow(nd, alpha);
    }
    return std::pow(nd, p) * binomial_tail(p, -1.0 / nd);
}

// (k+1)^q - k^q
inline double first_difference_pow(double q, std::size_t k) {
    if (k == 0) return 1.0;
    const double kd = static_cast<double>(k);
    return std::pow(kd, q) * std::expm1(q * std::log1p(1.0 / kd));
}

}  // namespace detail

/// Product-trapezoid weights for the Riemann–Liouville integral I^α on a
/// uniform mesh: the integrand is replaced by its piecewise-linear
/// interpolant and the kernel (t_n - s)^{α-1}/Γ(α) is integrated exactly.
///
///   I^α f(t_n) ≈ dt^α/Γ(α+2) · Σ_{j=0}^{n} a_{n,j} f_j
///
/// with a_{n,0} = (n-1)^{α+1} - (n-α-1)n^α, a_{n,n} = 1 and, for
/// 0 < j < n, a_{n,j} = (n-j+1)^{α+1} - 2(n-j)^{α+1} + (n-j-1)^{α+1}.
/// Interior weights depend only on n - j and are tabulated once.
class ProductTrapezoid {
public:
    ProductTrapezoid(std::size_t N, double dt, double alpha) : alpha_(alpha) {
        detail::check_order(alpha);
        if (!(dt > 0.0)) throw DomainError("product trapezoid: dt must be > 0");
        scale_ = std::pow(dt, alpha) / gamma(alpha + 2.0);
        interior_.resize(N + 1, 0.0);
        first_.resize(N + 1, 0.0);
        for (std::size_t k = 1; k <= N; ++k) {
            interior_[k] = detail::second_difference_pow(alpha + 1.0, k);
            first_[k] = detail::first_endpoint_weight(alpha, k);
        }
    }

    std::size_t steps() const { return interior_.size() - 1; }
    double alpha() const { return alpha_; }
    double scale() const { return scale_; }

    /// Unscaled weight a_{n,j}.
    double weight(std::size_t n, std::size_t j) const {
        if (j == n) return 1.0;
        if (j == 0) return first_[n];
        return interior_[n - j];
    }

    /// Unscaled partial sum Σ_{j=begin}^{end-1} a_{n,j} f_j, ascending j.
    double partial(std::span<const double> f, std::size_t n, std::size_t begin,
                   std::size_t end) const {
        if (n == 0) return 0.0;
        double s = 0.0;
        std::size_t j = begin;
        if (j == 0 && j < end) {
            s += first_[n] * f[0];
            ++j;
        }
        for (; j < end && j < n; ++j) s += interior_[n - j] * f[j];
        if (end > n && j <= n) s += f[n];
        return s;
    }

    /// I^α f(t_n).
    double at(std::span<const double> f, std::size_t n) const {
        return scale_ * partial(f, n, 0, n + 1);
    }

    std::vector<double> apply(std::span<const double> f) const {
        std::vector<double> out(f.size(), 0.0);
        for (std::size_t n = 1; n < f.size(); ++n) out[n] = at(f, n);
        return out;
    }

private:
    double alpha_;
    double scale_ = 0.0;
    std::vector<double> interior_;
    std::vector<double> first_;
};

/// I^α of the piecewise-linear interpolant of `samples` (values at
/// t_k = k·dt), evaluated at every node. Exact for linear integrands.
inline std::vector<double> rl_integral(std::span<const double> samples, double dt, double alpha) {
    if (samples.empty()) return {};
    return ProductTrapezoid(samples.size() - 1, dt, alpha).apply(samples);
}

/// I^α applied to the [0,T] part of `gf`; the result lives on [0,T].
inline GridFunction rl_integral_grid(const GridFunction& gf, double alpha) {
    const Grid g = gf.grid().main_part();
    return GridFunction(g, rl_integral(gf.main_values(), g.dt(), alpha));
}

/// L1 approximation of the Caputo derivative of order α ∈ (0,1):
///
///   D^α u(t_n) ≈ dt^{-α}/Γ(2-α) · Σ_{j=0}^{n-1} b_{n-j-1} (u_{j+1} - u_j),
///   b_k = (k+1)^{1-α} - k^{1-α}.
///
/// The value at t_0 is continued from t_1.
inline std::vector<double> caputo_l1(std::span<const double> u, double dt, double alpha) {
    detail::check_order(alpha);
    if (u.size() < 2) throw DomainError("caputo_l1: need at least two nodes");
    if (!(dt > 0.0)) throw DomainError("caputo_l1: dt must be > 0");
    const std::size_t N = u.size() - 1;
    const double q = 1.0 - alpha;
    std::vector<double> b(N);
    for (std::size_t k = 0; k < N; ++k) b[k] = detail::first_difference_pow(q, k);
    std::vector<double> diff(N);
    for (std::size_t j = 0; j < N; ++j) diff[j] = u[j + 1] - u[j];

    const double scale = std::pow(dt, -alpha) / gamma(2.0 - alpha);
    std::vector<double> out(N + 1);
    for (std::size_t n = 1; n <= N; ++n) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += b[n - j - 1] * diff[j];
        out[n] = scale * s;
    }
    out[0] = out[1];
    return out;
}

inline GridFunction caputo_l1(const GridFunction& gf, double alpha) {
    const Grid g = gf.grid().main_part();
    return GridFunction(g, caputo_l1(gf.main_values(), g.dt(), alpha));
}

/// Discrete Caputo derivative that exactly inverts the product-trapezoid
/// integral: returns d with rl_integral(d)(t_n) = u_n - u_0 for n ≥ 1 and
/// d_0 = d_1. Unlike L1 it is exact for u_0 + c·t^α/Γ(α+1), so trajectories
/// with the t^α start typical of Caputo problems carry no O(1) error at the
/// first nodes. Lower-triangular forward substitution, O(N²).
inline std::vector<double> caputo_product_trapezoid(std::span<const double> u, double dt,
                                                    double alpha) {
    detail::check_order(alpha);
    if (u.size() < 2) throw DomainError("caputo_product_trapezoid: need at least two nodes");
    const std::size_t N = u.size() - 1;
    const ProductTrapezoid quad(N, dt, alpha);
    std::vector<double> d(N + 1, 0.0);
    // n = 1 with d_0 = d_1: (a_{1,0} + 1)·d_1 = (u_1 - u_0)/scale
    d[1] = (u[1] - u[0]) / quad.scale() / (quad.weight(1, 0) + 1.0);
    d[0] = d[1];
    for (std::size_t n = 2; n <= N; ++n) {
        d[n] = (u[n] - u[0]) / quad.scale() - quad.partial(d, n, 0, n);
    }
    return d;
}

inline GridFunction caputo_product_trapezoid(const GridFunction& gf, double alpha) {
    const Grid g = gf.grid().main_part();
    return GridFunction(g, caputo_product_trapezoid(gf.main_values(), g.dt(), alpha));
}

}  // namespace fdde
