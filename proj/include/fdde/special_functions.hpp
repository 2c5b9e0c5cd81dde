#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "fdde/error.hpp"

namespace fdde {

/// Coefficient set for the Lanczos approximation
///
///   Γ(z+1) = √(2π) (z+g+½)^{z+½} e^{-(z+g+½)} [c₀ + Σ_{k≥1} c_k / (z+k)]
///
/// The default table (g = 7, nine terms) gives close to full double
/// precision on (0, 171). Exposed so the self-test can inject a corrupted
/// table and check that it notices.
struct LanczosTable {
    double g;
    std::array<double, 9> c;
};

inline constexpr LanczosTable default_lanczos{
    7.0,
    {0.99999999999980993, 676.5203681218851, -1259.1392167224028,
     771.32342877765313, -176.61502916214059, 12.507343278686905,
     -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7}};

namespace detail {

inline double lanczos_series(double z, const LanczosTable& tab) {
    double a = tab.c[0];
    for (std::size_t k = 1; k < tab.c.size(); ++k) {
        a += tab.c[k] / (z + static_cast<double>(k));
    }
    return a;
}

inline void check_gamma_arg(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("gamma: argument must be finite and > 0");
    }
}

}  // namespace detail

/// Γ(x) for x > 0.
inline double gamma(double x, const LanczosTable& tab = default_lanczos) {
    detail::check_gamma_arg(x);
    if (x < 0.5) {
        // Γ(x) = Γ(x+1)/x keeps the series argument away from 0.
        return gamma(x + 1.0, tab) / x;
    }
    const double z = x - 1.0;
    const double t = z + tab.g + 0.5;
    // split the power so t^{z+½} does not overflow before e^{-t} is applied
    const double half = std::pow(t, 0.5 * (z + 0.5));
    constexpr double sqrt_2pi = 2.5066282746310002;
    return sqrt_2pi * half * (half * std::exp(-t)) * detail::lanczos_series(z, tab);
}

/// ln Γ(x) for x > 0; finite well past the point where Γ overflows.
inline double log_gamma(double x, const LanczosTable& tab = default_lanczos) {
    detail::check_gamma_arg(x);
    if (x < 0.5) {
        return log_gamma(x + 1.0, tab) - std::log(x);
    }
    const double z = x - 1.0;
    const double t = z + tab.g + 0.5;
    constexpr double log_sqrt_2pi = 0.91893853320467274;
    return log_sqrt_2pi + (z + 0.5) * std::log(t) - t +
           std::log(detail::lanczos_series(z, tab));
}

struct SpecialFnConfig {
    double ml_series_tol = 1e-17;
    std::size_t ml_max_terms = 2000;
};

/// Mittag-Leffler function E_α(z) = Σ z^k / Γ(αk+1) for real z, α ∈ (0,2).
///
/// Direct series with Neumaier-compensated summation. Stops once two
/// consecutive terms fall below `ml_series_tol` relative to the running
/// sum. Meant for moderate |z| (the series cancels badly for large negative
/// z); used by the tests as an exact-solution oracle.
inline double mittag_leffler(double alpha, double z, const SpecialFnConfig& cfg = {}) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw DomainError("mittag_leffler: alpha must lie in (0,2)");
    }
    if (!std::isfinite(z)) {
        throw DomainError("mittag_leffler: z must be finite");
    }
    if (!(cfg.ml_series_tol > 0.0) || cfg.ml_max_terms < 1) {
        throw DomainError("mittag_leffler: invalid series configuration");
    }
    if (z == 0.0) {
        return 1.0;
    }

    double sum = 1.0;
    double comp = 0.0;
    double zk = 1.0;
    const double log_abs_z = std::log(std::abs(z));
    int small_run = 0;

    for (std::size_t k = 1; k < cfg.ml_max_terms; ++k) {
        const double arg = alpha * static_cast<double>(k) + 1.0;
        zk *= z;
        double term;
        if (arg < 170.0 && std::isfinite(zk)) {
            term = zk / gamma(arg);
        } else {
            term = std::exp(static_cast<double>(k) * log_abs_z - log_gamma(arg));
            if (z < 0.0 && (k % 2 == 1)) {
                term = -term;
            }
        }

        const double next = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            comp += (sum - next) + term;
        } else {
            comp += (term - next) + sum;
        }
        sum = next;

        if (std::abs(term) <= cfg.ml_series_tol * std::abs(sum + comp)) {
            if (++small_run == 2) {
                return sum + comp;
            }
        } else {
            small_run = 0;
        }
    }
    throw ConvergenceError("mittag_leffler: series did not reach tolerance within "
                               "ml_max_terms",
                           {});
}

}  // namespace fdde
