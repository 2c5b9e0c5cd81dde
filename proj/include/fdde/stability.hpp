#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fdde/error.hpp"
#include "fdde/fracnum.hpp"
#include "fdde/grid.hpp"
#include "fdde/problem.hpp"
#include "fdde/solver.hpp"
#include "fdde/special_functions.hpp"

namespace fdde {

/// Pointwise defect Ψ = D^α ϑ - f(t, ϑ(t), ϑ(g(t))) of a candidate ϑ.
struct DefectReport {
    GridFunction psi;                     // on [0, T]
    double epsilon = 0.0;                 // max |Ψ| over nodes
    double discretization_estimate = 0.0; // max |Ψ_N - Ψ_{N/2}| on the coarse nodes
};

namespace detail {

// Ψ from the discrete Caputo derivative that inverts the product-trapezoid
// integral: Σ_j a_{n,j}(F_j + Ψ_j) = (u_n - u_0)/scale for n ≥ 1, with
// Ψ_0 = Ψ_1 closing the system. The defect of the converged discrete
// solution is then 0 up to rounding.
inline std::vector<double> defect_values(const Problem& p, const GridFunction& cand) {
    const Grid& grid = cand.grid();
    const std::vector<LagRef> lags = lag_table(p, grid);
    const std::size_t M = grid.zero_index();
    const std::size_t N = grid.steps();
    const auto u = cand.values();
    std::vector<double> F(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
        F[k] = eval_rhs(p.f, grid.main_node(k), u[M + k], read_lag(u, lags[k]));
    }
    const ProductTrapezoid quad(N, grid.dt(), p.alpha);
    const double a10 = quad.weight(1, 0);
    std::vector<double> psi(N + 1);
    std::vector<double> d(N + 1);
    psi[1] = ((u[M + 1] - u[M]) / quad.scale() - a10 * F[0] - F[1]) / (a10 + 1.0);
    psi[0] = psi[1];
    d[0] = F[0] + psi[0];
    d[1] = F[1] + psi[1];
    for (std::size_t n = 2; n <= N; ++n) {
        d[n] = (u[M + n] - u[M]) / quad.scale() - quad.partial(d, n, 0, n);
        psi[n] = d[n] - F[n];
    }
    return psi;
}

inline void require_problem_grid(const Problem& p, const Grid& grid) {
    if (grid.T() != p.T || grid.h() != p.h) {
        throw GridMismatch("candidate grid does not span the problem's [-h, T]");
    }
}

}  // namespace detail

/// Defect of `candidate`, measured with the discrete Caputo derivative that
/// inverts the solver's product-trapezoid quadrature. The discretization
/// estimate repeats the measurement on the half-resolution restriction of
/// the candidate and takes the largest difference at the shared nodes.
inline DefectReport compute_defect(const Problem& p, const GridFunction& candidate) {
    const Grid& grid = candidate.grid();
    detail::require_problem_grid(p, grid);
    std::vector<double> psi = detail::defect_values(p, candidate);

    DefectReport rep{GridFunction(grid.main_part(), psi)};
    for (double x : psi) rep.epsilon = std::max(rep.epsilon, std::abs(x));

    if (grid.steps() >= 4) {
        const Grid coarse(p.T, p.h, grid.steps() / 2);
        const GridFunction restricted =
            GridFunction::sample(coarse, [&](double x) { return interpolate(candidate, x); });
        const std::vector<double> psi_coarse = detail::defect_values(p, restricted);
        for (std::size_t m = 0; m < psi_coarse.size(); ++m) {
            const double fine = interpolate(rep.psi, coarse.main_node(m));
            rep.discretization_estimate =
                std::max(rep.discretization_estimate, std::abs(fine - psi_coarse[m]));
        }
    }
    return rep;
}

/// Fixed point z* of the dominating operator
///
///   (A z)(t) = 0                                              t < 0
///   (A z)(t) = εT^α/Γ(α+1) + L·I^α[z(s) + z(g(s))](t)         t ∈ [0,T]
///
/// iterated from z ≡ 0 in the Bielecki norm with λ = 2L/τ^α. The node t = 0
/// belongs to the [0,T] branch. The stop is relative to ‖z‖, so the result
/// scales exactly with ε.
inline GridFunction solve_zstar(const Problem& p, const Grid& grid, double epsilon,
                                const PicardConfig& cfg = {}) {
    cfg.check();
    if (!(epsilon >= 0.0 && std::isfinite(epsilon))) {
        throw DomainError("solve_zstar: epsilon must be finite and >= 0");
    }
    detail::require_problem_grid(p, grid);
    const auto [tau, lambda] = detail::tau_and_lambda(p, cfg, LipschitzMode::both);
    const std::size_t M = grid.zero_index();
    const std::vector<double> w = detail::bielecki_weights(grid, tau, M, grid.size());

    const ProductTrapezoid quad(grid.steps(), grid.dt(), p.alpha);
    const std::vector<detail::LagRef> lags = detail::lag_table(p, grid);
    const double floor_term = epsilon * std::pow(p.T, p.alpha) / gamma(p.alpha + 1.0);
    std::vector<double> integrand(grid.steps() + 1);

    auto map = [&](std::span<const double> z, std::span<double> out) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(M), 0.0);
        for (std::size_t k = 0; k < integrand.size(); ++k) {
            integrand[k] = z[M + k] + detail::read_lag(z, lags[k]);
        }
        out[M] = floor_term;
        for (std::size_t k = 1; k < integrand.size(); ++k) {
            out[M + k] = floor_term + p.L * quad.at(integrand, k);
        }
    };

    std::vector<double> z(grid.size(), 0.0);
    detail::iterate_fixed_point(z, map, w, M, z.size(), lambda, cfg, 0, 0.0);
    return GridFunction(grid, std::move(z));
}

inline GridFunction solve_zstar(const Problem& p, double epsilon, const PicardConfig& cfg = {}) {
    return solve_zstar(p, Grid(p.T, p.h, cfg.N), epsilon, cfg);
}

/// Constant of the closed-form bound |ϑ - υ| ≤ c·ε,
///
///   c = T^α e^{(h+T)τ} / ((1-λ) Γ(α+1)),  λ = 2L/τ^α.
///
/// Valid but typically enormous. `log_c` stays finite when c overflows.
struct ClosedFormBound {
    double c = 0.0;
    double log_c = 0.0;
    double tau = 1.0;
    double lambda = 0.0;
    bool overflow = false;
};

inline ClosedFormBound closed_form_constant(double alpha, double T, double h, double L,
                                            double lambda_target) {
    detail::check_order(alpha);
    if (!(T > 0.0) || !(h >= 0.0)) throw DomainError("closed_form_constant: need T > 0, h >= 0");
    ClosedFormBound b;
    b.tau = select_tau(L, alpha, lambda_target, LipschitzMode::both);
    b.lambda = contraction_constant(L, alpha, b.tau, LipschitzMode::both);
    b.log_c = alpha * std::log(T) + (h + T) * b.tau - std::log1p(-b.lambda) -
              log_gamma(alpha + 1.0);
    b.overflow = b.log_c > std::log(std::numeric_limits<double>::max());
    b.c = b.overflow ? std::numeric_limits<double>::infinity() : std::exp(b.log_c);
    return b;
}

/// The closed-form constant for λ_target ∈ {0.25, 0.5, 0.75}; the smallest
/// is returned. τ is free subject to λ < 1, and c is not monotone in it.
inline ClosedFormBound best_closed_form_constant(double alpha, double T, double h, double L,
                                                 std::array<ClosedFormBound, 3>* all = nullptr) {
    static constexpr std::array<double, 3> targets{0.25, 0.5, 0.75};
    std::array<ClosedFormBound, 3> scan;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        scan[i] = closed_form_constant(alpha, T, h, L, targets[i]);
    }
    if (all) *all = scan;
    return *std::min_element(scan.begin(), scan.end(),
                             [](const auto& a, const auto& b) { return a.log_c < b.log_c; });
}

struct Certificate {
    double epsilon = 0.0;
    double discretization_estimate = 0.0;
    double slack = 0.0;
    GridFunction comparison;   // υ: solution with the candidate's history
    GridFunction z_star;
    GridFunction abs_diff;     // |ϑ - υ|
    std::vector<double> margins;  // z* - |ϑ - υ| per node
    ClosedFormBound closed_form;
    double tau_used = 1.0;
    double lambda_used = 0.0;
    bool pointwise_pass = false;
    bool closed_form_pass = false;

    double worst_margin() const {
        return margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
    }
};

struct CertifyOptions {
    /// Test hook: reads the comparison solution this many nodes late on
    /// [0,T], as if it had been computed on a shifted grid. Must stay 0
    /// outside fault-injection tests.
    std::size_t misalign_comparison = 0;
};

/// Hyers–Ulam certificate for one candidate trajectory.
///
/// υ solves the problem with the candidate's own history; ε is the measured
/// defect; z* the dominating fixed point. `pointwise_pass` checks
/// |ϑ - υ| ≤ z* + slack at every node with slack = max(1e-8, 10·estimate);
/// `closed_form_pass` checks max |ϑ - υ| ≤ c·ε + slack.
inline Certificate certify(const Problem& p, const GridFunction& candidate,
                           const PicardConfig& cfg = {}, const CertifyOptions& opts = {}) {
    cfg.check();
    if (p.lipschitz_mode != LipschitzMode::both) {
        throw DomainError("certify: needs the both-argument Lipschitz condition");
    }
    const Grid& grid = candidate.grid();
    detail::require_problem_grid(p, grid);

    std::vector<double> start(candidate.values().begin(), candidate.values().end());
    std::fill(start.begin() + static_cast<std::ptrdiff_t>(grid.zero_index()) + 1, start.end(),
              candidate.at_zero());
    auto [upsilon, solve_rep] = picard_solve_from(p, GridFunction(grid, std::move(start)), cfg);
    if (opts.misalign_comparison > 0) {
        std::vector<double> shifted(upsilon.values().begin(), upsilon.values().end());
        const std::size_t M = grid.zero_index();
        for (std::size_t k = grid.steps(); k > 0; --k) {
            shifted[M + k] = upsilon[M + (k > opts.misalign_comparison ? k - opts.misalign_comparison : 0)];
        }
        upsilon = GridFunction(grid, std::move(shifted));
    }

    DefectReport defect = compute_defect(p, candidate);
    GridFunction z = solve_zstar(p, grid, defect.epsilon, cfg);

    std::vector<double> diff(grid.size());
    std::vector<double> margins(grid.size());
    const double slack = std::max(1e-8, 10.0 * defect.discretization_estimate);
    bool pointwise = true;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        diff[i] = std::abs(candidate[i] - upsilon[i]);
        margins[i] = z[i] - diff[i];
        pointwise = pointwise && diff[i] <= z[i] + slack;
        max_diff = std::max(max_diff, diff[i]);
    }

    const ClosedFormBound cf = closed_form_constant(p.alpha, p.T, p.h, p.L, cfg.lambda_target);

    Certificate cert{defect.epsilon,
                     defect.discretization_estimate,
                     slack,
                     std::move(upsilon),
                     std::move(z),
                     GridFunction(grid, std::move(diff)),
                     std::move(margins),
                     cf,
                     solve_rep.tau,
                     solve_rep.lambda,
                     pointwise,
                     false};
    cert.closed_form_pass = cf.overflow ? (defect.epsilon > 0.0 || max_diff <= slack)
                                        : max_diff <= cf.c * defect.epsilon + slack;
    return cert;
}

}  // namespace fdde
