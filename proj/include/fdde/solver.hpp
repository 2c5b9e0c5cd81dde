#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdde/error.hpp"
#include "fdde/fracnum.hpp"
#include "fdde/grid.hpp"
#include "fdde/problem.hpp"

namespace fdde {

struct PicardConfig {
    std::size_t N = 1024;
    double tol = 1e-10;
    double lambda_target = 0.5;
    std::size_t max_iter = 500;
    std::optional<double> tau_override;
    double rho = 0.5;  // partition safety factor for the progressive solver

    static PicardConfig from(const Numerics& n) {
        PicardConfig c;
        c.N = n.N;
        c.tol = n.tol;
        c.lambda_target = n.lambda_target;
        c.rho = n.rho;
        return c;
    }

    void check() const {
        if (N < 2) throw DomainError("picard config: N must be >= 2");
        if (!(tol > 0.0)) throw DomainError("picard config: tol must be > 0");
        if (!(lambda_target > 0.0 && lambda_target < 1.0)) {
            throw DomainError("picard config: lambda_target must lie in (0,1)");
        }
        if (max_iter < 1) throw DomainError("picard config: max_iter must be >= 1");
        if (tau_override && !(*tau_override > 0.0)) {
            throw DomainError("picard config: tau_override must be > 0");
        }
        if (!(rho > 0.0 && rho < 1.0)) throw DomainError("picard config: rho must lie in (0,1)");
    }
};

/// History of one fixed-point iteration.
///
/// `residual` is the weighted distance between the returned iterate and its
/// image, divided by `scale` = max(1, weighted norm of the iterate); for
/// solutions of order one the division is a no-op.
struct IterationLog {
    std::size_t iterations = 0;
    std::vector<double> distances;
    std::vector<double> ratios;
    double residual = 0.0;
    double scale = 1.0;
};

struct StepReport {
    std::size_t index = 0;  // 1-based
    double S_begin = 0.0;
    double S_end = 0.0;
    IterationLog log;
};

/// Diagnostics of a solve. For a progressive solve the per-iteration
/// history lives in `steps`; the top-level `iterations` is the total and
/// `residual` the largest step residual.
struct SolveReport {
    double tau = 1.0;
    double lambda = 0.0;
    std::size_t N = 0;
    std::size_t iterations = 0;
    std::vector<double> distances;
    std::vector<double> ratios;
    double residual = 0.0;
    /// λ/(1-λ)·d_last: the sup-norm error bound implied by the a posteriori
    /// estimate, since every weight is at least 1 (global solve only).
    double sup_error_bound = 0.0;
    std::size_t partitions = 0;  // progressive: n
    double S = 0.0;              // progressive: step length
    std::vector<StepReport> steps;
};

/// τ for which the operator contracts with constant lambda_target:
/// 2L/τ^α in both-argument mode, L/τ^α in second-argument mode. τ = 1 when
/// L = 0.
inline double select_tau(double L, double alpha, double lambda_target, LipschitzMode mode) {
    if (!(L >= 0.0 && std::isfinite(L))) throw DomainError("select_tau: L must be >= 0");
    detail::check_order(alpha);
    if (!(lambda_target > 0.0 && lambda_target < 1.0)) {
        throw DomainError("select_tau: lambda_target must lie in (0,1)");
    }
    if (L == 0.0) return 1.0;
    const double k = mode == LipschitzMode::both ? 2.0 : 1.0;
    return std::pow(k * L / lambda_target, 1.0 / alpha);
}

/// Contraction constant implied by τ.
inline double contraction_constant(double L, double alpha, double tau, LipschitzMode mode) {
    const double k = mode == LipschitzMode::both ? 2.0 : 1.0;
    return k * L / std::pow(tau, alpha);
}

/// max_t |a(t) - b(t)| e^{-τ(t+h)}: the Bielecki distance with its weight
/// rescaled so that the largest weight (at t = -h) is 1.
inline double bielecki_distance(const GridFunction& a, const GridFunction& b, double tau) {
    require_same_grid(a, b);
    if (!(tau > 0.0)) throw DomainError("bielecki_distance: tau must be > 0");
    const Grid& g = a.grid();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]) * std::exp(-tau * (g.node(i) + g.h())));
    }
    return d;
}

namespace detail {

// Where u(g(t_k)) is read from: u[index] + frac·(u[index+1] - u[index]).
struct LagRef {
    std::size_t index;
    double frac;
};

inline std::vector<LagRef> lag_table(const Problem& p, const Grid& grid) {
    const std::size_t M = grid.zero_index();
    std::vector<LagRef> refs(grid.steps() + 1);

    if (p.delay && grid.uniform()) {
        const double shift = *p.delay / grid.dt();
        const double rounded = std::round(shift);
        if (std::abs(shift - rounded) <= 1e-9 * std::max(1.0, shift) &&
            static_cast<std::size_t>(rounded) <= M) {
            const auto R = static_cast<std::size_t>(rounded);
            for (std::size_t k = 0; k < refs.size(); ++k) refs[k] = {M + k - R, 0.0};
            return refs;
        }
    }

    const double slack = 1e-12 * std::max(1.0, grid.h() + grid.T());
    const double last = static_cast<double>(grid.size() - 1);
    for (std::size_t k = 0; k < refs.size(); ++k) {
        const double t = grid.main_node(k);
        double x;
        try {
            x = p.lag(t);
        } catch (const EvalError& e) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " (evaluating g at t = %.17g)", t);
            throw EvalError(e.what() + std::string(buf));
        }
        if (!(x >= -grid.h() - slack && x <= grid.T() + slack)) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "lag g(t) = %.17g at t = %.17g leaves [-h, T]", x, t);
            throw DomainError(buf);
        }
        double pos = (x < 0.0 && M > 0) ? (x + grid.h()) / grid.history_dt()
                                        : static_cast<double>(M) + std::max(x, 0.0) / grid.dt();
        pos = std::clamp(pos, 0.0, last);
        const double nearest = std::round(pos);
        if (std::abs(pos - nearest) <= 1e-9) {
            refs[k] = {static_cast<std::size_t>(nearest), 0.0};
        } else {
            const auto i = static_cast<std::size_t>(std::floor(pos));
            refs[k] = {i, pos - static_cast<double>(i)};
        }
    }
    return refs;
}

inline double read_lag(std::span<const double> u, const LagRef& ref) {
    if (ref.frac == 0.0) return u[ref.index];
    return u[ref.index] + ref.frac * (u[ref.index + 1] - u[ref.index]);
}

inline double eval_rhs(const Expr& f, double t, double u, double v) {
    try {
        return f(t, u, v);
    } catch (const EvalError& e) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " (evaluating f at t = %.17g)", t);
        throw EvalError(e.what() + std::string(buf));
    }
}

// Differences within this many ulps of a node value count as converged.
inline constexpr double roundoff_ulps = 16.0;

// max_i w_i·|a_i - b_i| over [begin, end), with differences at roundoff
// level treated as 0. Early nodes of a Volterra iteration settle into ulp
// cycles; the large weights there would otherwise keep d above tol forever.
inline double weighted_distance(std::span<const double> a, std::span<const double> b,
                                std::span<const double> w, std::size_t begin, std::size_t end) {
    constexpr double noise = roundoff_ulps * std::numeric_limits<double>::epsilon();
    double d = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double diff = std::abs(a[i] - b[i]);
        const double floor = noise * std::max(std::abs(a[i]), std::abs(b[i]));
        if (diff > floor) d = std::max(d, diff * w[i]);
    }
    return d;
}

inline double weighted_norm(std::span<const double> a, std::span<const double> w,
                            std::size_t begin, std::size_t end) {
    double d = 0.0;
    for (std::size_t i = begin; i < end; ++i) d = std::max(d, std::abs(a[i]) * w[i]);
    return d;
}

// Picard iteration u ← map(u) with the a posteriori Banach stop
// λ/(1-λ)·d ≤ tol·max(scale_floor, max |u|), d the weighted distance over
// the nodes [begin, end), the only ones the map may change. With weights
// ≥ 1 the left side bounds the sup-norm error of the limit. scale_floor = 0
// gives a purely relative, scale-invariant stop.
template <class Map>
IterationLog iterate_fixed_point(std::vector<double>& u, Map&& map, std::span<const double> w,
                                 std::size_t begin, std::size_t end, double lambda,
                                 const PicardConfig& cfg, std::size_t step = 0,
                                 double scale_floor = 1.0) {
    IterationLog log;
    std::vector<double> next(u.size());
    const std::vector<double> ones(u.size(), 1.0);
    const double factor = lambda / (1.0 - lambda);
    for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
        map(std::span<const double>(u), std::span<double>(next));
        for (std::size_t i = begin; i < end; ++i) {
            if (!std::isfinite(next[i])) {
                std::string what = "fixed-point iterate " + std::to_string(k) +
                                   " is not finite; the iteration diverges";
                if (step > 0) what += " (progressive step " + std::to_string(step) + ")";
                throw ConvergenceError(what, log.distances, step);
            }
        }
        const double d = weighted_distance(u, next, w, begin, end);
        if (!log.distances.empty() && log.distances.back() > 0.0) {
            log.ratios.push_back(d / log.distances.back());
        }
        log.distances.push_back(d);
        log.iterations = k;
        u.swap(next);
        log.scale = std::max(scale_floor, weighted_norm(u, ones, begin, end));
        if (factor * d <= cfg.tol * log.scale) {
            map(std::span<const double>(u), std::span<double>(next));
            const double r = weighted_distance(u, next, w, begin, end);
            log.residual = log.scale > 0.0 ? r / log.scale : r;
            return log;
        }
    }
    std::string what = "fixed-point iteration did not converge within " +
                       std::to_string(cfg.max_iter) + " iterations";
    if (step > 0) what += " (progressive step " + std::to_string(step) + ")";
    throw ConvergenceError(what, log.distances, step);
}

inline std::vector<double> initial_iterate(const Problem& p, const Grid& grid) {
    std::vector<double> u(grid.size());
    const std::size_t M = grid.zero_index();
    for (std::size_t i = 0; i <= M; ++i) u[i] = p.phi(grid.node(i));
    std::fill(u.begin() + static_cast<std::ptrdiff_t>(M) + 1, u.end(), u[M]);
    return u;
}

}  // namespace detail

/// The integral operator of the problem on a fixed grid:
///
///   (F u)(t) = u(t)                                   on [-h, 0]
///   (F u)(t) = u(0) + I^α[s ↦ f(s, u(s), u(g(s)))](t)  on [0, T]
///
/// History is copied from the argument, which is expected to carry φ there
/// (or, for a stability comparison, the candidate's own history).
class PicardOperator {
public:
    PicardOperator(const Problem& p, Grid grid)
        : problem_(&p),
          grid_(std::move(grid)),
          quad_(grid_.steps(), grid_.dt(), p.alpha),
          lags_(detail::lag_table(p, grid_)),
          rhs_(grid_.steps() + 1) {}

    const Grid& grid() const { return grid_; }
    const ProductTrapezoid& quadrature() const { return quad_; }
    const std::vector<detail::LagRef>& lags() const { return lags_; }

    double rhs_at(std::span<const double> u, std::size_t k) const {
        const std::size_t M = grid_.zero_index();
        return detail::eval_rhs(problem_->f, grid_.main_node(k), u[M + k],
                                detail::read_lag(u, lags_[k]));
    }

    void operator()(std::span<const double> u, std::span<double> out) const {
        const std::size_t M = grid_.zero_index();
        std::copy(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(M) + 1, out.begin());
        for (std::size_t k = 0; k < rhs_.size(); ++k) rhs_[k] = rhs_at(u, k);
        for (std::size_t k = 1; k < rhs_.size(); ++k) out[M + k] = u[M] + quad_.at(rhs_, k);
    }

    GridFunction apply(const GridFunction& traj) const {
        if (!(traj.grid() == grid_)) throw GridMismatch("picard operator: trajectory grid differs");
        std::vector<double> out(grid_.size());
        (*this)(traj.values(), out);
        return GridFunction(grid_, std::move(out));
    }

private:
    const Problem* problem_;
    Grid grid_;
    ProductTrapezoid quad_;
    std::vector<detail::LagRef> lags_;
    mutable std::vector<double> rhs_;
};

/// One application of the integral operator to `traj`.
inline GridFunction apply_picard_operator(const Problem& p, const GridFunction& traj) {
    return PicardOperator(p, traj.grid()).apply(traj);
}

namespace detail {

inline std::pair<double, double> tau_and_lambda(const Problem& p, const PicardConfig& cfg,
                                                LipschitzMode mode) {
    const double tau =
        cfg.tau_override ? *cfg.tau_override : select_tau(p.L, p.alpha, cfg.lambda_target, mode);
    const double lambda = contraction_constant(p.L, p.alpha, tau, mode);
    if (!(lambda < 1.0)) {
        throw DomainError("tau = " + std::to_string(tau) + " gives contraction constant >= 1");
    }
    return {tau, lambda};
}

// Bielecki weights e^{-τ(t - t_end)} on the active nodes [begin, end), so
// the weight is 1 at the right end t_end of the window and grows towards its
// left end; 0 elsewhere.
inline std::vector<double> bielecki_weights(const Grid& grid, double tau, std::size_t begin,
                                            std::size_t end) {
    const double t_end = grid.node(end - 1);
    if (tau * (t_end - grid.node(begin)) > 700.0) {
        throw DomainError("Bielecki weight e^{tau*(window length)} overflows; "
                          "raise lambda_target or shorten the horizon");
    }
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t i = begin; i < end; ++i) w[i] = std::exp(-tau * (grid.node(i) - t_end));
    return w;
}

}  // namespace detail

/// Global Picard iteration in the Bielecki norm from a given first iterate,
/// whose history part is kept. The grid is taken from `start`.
inline std::pair<GridFunction, SolveReport> picard_solve_from(const Problem& p,
                                                              const GridFunction& start,
                                                              const PicardConfig& cfg = {}) {
    cfg.check();
    if (p.lipschitz_mode != LipschitzMode::both) {
        throw DomainError("picard_solve: needs the both-argument Lipschitz condition; "
                          "use progressive_solve for second_only problems");
    }
    const Grid& grid = start.grid();
    if (grid.T() != p.T || grid.h() != p.h) {
        throw GridMismatch("picard_solve: start grid does not cover [-h, T] of the problem");
    }
    const auto [tau, lambda] = detail::tau_and_lambda(p, cfg, LipschitzMode::both);
    const std::size_t M = grid.zero_index();
    const std::vector<double> w = detail::bielecki_weights(grid, tau, M, grid.size());

    const PicardOperator op(p, grid);
    std::vector<double> u(start.values().begin(), start.values().end());
    IterationLog log = detail::iterate_fixed_point(u, op, w, M, u.size(), lambda, cfg);

    SolveReport rep;
    rep.tau = tau;
    rep.lambda = lambda;
    rep.N = grid.steps();
    rep.iterations = log.iterations;
    rep.distances = std::move(log.distances);
    rep.ratios = std::move(log.ratios);
    rep.residual = log.residual;
    rep.sup_error_bound = lambda / (1.0 - lambda) * rep.distances.back();
    return {GridFunction(grid, std::move(u)), std::move(rep)};
}

/// Global Picard iteration in the Bielecki norm, valid under the
/// both-argument Lipschitz condition.
///
/// Starts from φ on the history and the constant φ(0) on [0,T] and stops
/// when λ/(1-λ)·d_k ≤ tol·max(1, max |u_k|), d_k being the Bielecki distance
/// between consecutive iterates with weight e^{-τ(t-T)}. That weight is at
/// least 1, so the left side also bounds the sup-norm error.
inline std::pair<GridFunction, SolveReport> picard_solve(const Problem& p,
                                                         const PicardConfig& cfg = {}) {
    cfg.check();
    const Grid grid(p.T, p.h, cfg.N);
    return picard_solve_from(p, GridFunction(grid, detail::initial_iterate(p, grid)), cfg);
}

struct Partition {
    std::size_t n;
    double S;
};

/// Splits [0,T] into n equal steps of length S = T/n ≤ rho·r < r, with
/// n = max(1, ⌈T/(rho·r)⌉).
inline Partition make_partition(double T, double r, double rho = 0.5) {
    if (!(T > 0.0 && std::isfinite(T))) throw DomainError("make_partition: T must be > 0");
    if (!(r > 0.0 && std::isfinite(r))) throw DomainError("make_partition: r must be > 0");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("make_partition: rho must lie in (0,1)");
    const double ratio = T / (rho * r);
    // ignore the last few ulps so exact multiples are not pushed up by one
    const double n = std::max(1.0, std::ceil(ratio * (1.0 - 1e-12)));
    return {static_cast<std::size_t>(n), T / n};
}

namespace detail {

// Smallest N' ≥ N with N' a multiple of n and r, h whole multiples of T/N'.
inline std::size_t commensurate_steps(std::size_t N, std::size_t n, double T, double r, double h) {
    auto whole = [](double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, x); };
    const std::size_t first = (N + n - 1) / n * n;
    const std::size_t limit = std::max<std::size_t>(first, 64 * N);
    for (std::size_t Np = first; Np <= limit; Np += n) {
        const double per_unit = static_cast<double>(Np) / T;
        if (whole(r * per_unit) && whole(h * per_unit)) return Np;
    }
    throw DomainError("progressive_solve: no grid with at most " + std::to_string(limit) +
                      " steps makes dt divide the step length, r and h");
}

}  // namespace detail

/// Observer called after each progressive step with the full node vector.
using StepObserver = std::function<void(std::size_t step, std::span<const double> values)>;

/// Progressive contractions for a constant delay r.
///
/// [0,T] is split by make_partition. Step i freezes every node on
/// [-h, S_{i-1}] and iterates only on (S_{i-1}, S_i]; since S < r the delayed
/// argument of every active node is frozen, so the step is a contraction with
/// λ = L/τ^α whatever the dependence of f on its third argument. N is raised
/// until dt divides S, r and h. The frozen part of each quadrature sum is
/// computed once per step.
///
/// Distances in step i use the Bielecki weight e^{-τ(t - S_i)}, which is 1 at
/// the right end of the active window.
inline std::pair<GridFunction, SolveReport> progressive_solve(const Problem& p,
                                                              const PicardConfig& cfg = {},
                                                              const StepObserver& observer = {}) {
    cfg.check();
    if (!p.delay) throw DomainError("progressive_solve: needs a constant delay (g = constant)");
    const double r = *p.delay;
    const Partition part = make_partition(p.T, r, cfg.rho);
    const std::size_t N = detail::commensurate_steps(cfg.N, part.n, p.T, r, p.h);
    const Grid grid(p.T, p.h, N);
    const std::size_t M = grid.zero_index();
    const std::size_t per_step = N / part.n;

    const auto [tau, lambda] = detail::tau_and_lambda(p, cfg, LipschitzMode::second_only);

    const PicardOperator op(p, grid);
    const ProductTrapezoid& quad = op.quadrature();
    std::vector<double> u = detail::initial_iterate(p, grid);
    std::vector<double> rhs(N + 1, 0.0);
    std::vector<double> base(N + 1, 0.0);

    SolveReport rep;
    rep.tau = tau;
    rep.lambda = lambda;
    rep.N = N;
    rep.partitions = part.n;
    rep.S = part.S;

    for (std::size_t i = 1; i <= part.n; ++i) {
        const std::size_t k_lo = (i - 1) * per_step;  // last frozen main node
        const std::size_t k_hi = i * per_step;
        const double S_begin = grid.main_node(k_lo);

        for (std::size_t k = 0; k <= k_lo; ++k) rhs[k] = op.rhs_at(u, k);
        for (std::size_t k = k_lo + 1; k <= k_hi; ++k) {
            base[k] = quad.partial(rhs, k, 0, k_lo + 1);
            u[M + k] = u[M + k_lo];
        }

        const double u0 = u[M];
        auto step_map = [&](std::span<const double> cur, std::span<double> out) {
            std::copy(cur.begin(), cur.end(), out.begin());
            for (std::size_t k = k_lo + 1; k <= k_hi; ++k) rhs[k] = op.rhs_at(cur, k);
            for (std::size_t k = k_lo + 1; k <= k_hi; ++k) {
                out[M + k] = u0 + quad.scale() * (base[k] + quad.partial(rhs, k, k_lo + 1, k + 1));
            }
        };

        const std::vector<double> w = detail::bielecki_weights(grid, tau, M + k_lo + 1, M + k_hi + 1);
        StepReport sr;
        sr.index = i;
        sr.S_begin = S_begin;
        sr.S_end = grid.main_node(k_hi);
        sr.log = detail::iterate_fixed_point(u, step_map, w, M + k_lo + 1, M + k_hi + 1, lambda,
                                             cfg, i);
        rep.iterations += sr.log.iterations;
        rep.residual = std::max(rep.residual, sr.log.residual);
        rep.steps.push_back(std::move(sr));
        if (observer) observer(i, u);
    }
    return {GridFunction(grid, std::move(u)), std::move(rep)};
}

}  // namespace fdde
