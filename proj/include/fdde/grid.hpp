#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdde/error.hpp"

namespace fdde {

/// Uniform mesh over [-h, T].
///
/// [0,T] is split into N steps of width dt = T/N. The history [-h,0] is
/// meshed with M = round(h/dt) steps (at least one when h > 0) of width
/// h/M, which equals dt whenever h is a multiple of dt. Node indices run
/// 0..M+N; index M is t = 0, index M+k is t_k = k·dt.
class Grid {
public:
    Grid(double T, double h, std::size_t N) : T_(T), h_(h), N_(N) {
        if (!(std::isfinite(T) && T > 0.0)) throw DomainError("grid: T must be finite and > 0");
        if (!(std::isfinite(h) && h >= 0.0)) throw DomainError("grid: h must be finite and >= 0");
        if (N < 1) throw DomainError("grid: N must be >= 1");
        dt_ = T / static_cast<double>(N);
        if (h > 0.0) {
            const double ratio = h / dt_;
            M_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio)));
            const double m = static_cast<double>(M_);
            history_dt_ = std::abs(ratio - m) <= 1e-9 * m ? dt_ : h / m;
        } else {
            M_ = 0;
            history_dt_ = dt_;
        }
    }

    double T() const { return T_; }
    double h() const { return h_; }
    double dt() const { return dt_; }
    double history_dt() const { return history_dt_; }

    /// Steps on [0, T].
    std::size_t steps() const { return N_; }
    /// Steps on [-h, 0].
    std::size_t history_steps() const { return M_; }
    std::size_t size() const { return M_ + N_ + 1; }
    /// Index of the node t = 0.
    std::size_t zero_index() const { return M_; }

    /// True when history and main spacing coincide, so delayed lookups by
    /// index arithmetic are exact across t = 0.
    bool uniform() const { return M_ == 0 || history_dt_ == dt_; }

    double node(std::size_t i) const {
        if (i < M_) return -static_cast<double>(M_ - i) * history_dt_;
        if (i == M_ + N_) return T_;
        return static_cast<double>(i - M_) * dt_;
    }

    /// Main-interval node t_k, k = 0..N.
    double main_node(std::size_t k) const { return node(M_ + k); }

    /// The same mesh restricted to [0, T].
    Grid main_part() const { return Grid(T_, 0.0, N_); }

    bool operator==(const Grid& o) const {
        return T_ == o.T_ && h_ == o.h_ && N_ == o.N_;
    }

private:
    double T_;
    double h_;
    std::size_t N_;
    double dt_ = 0.0;
    double history_dt_ = 0.0;
    std::size_t M_ = 0;
};

/// A trajectory sampled at every node of a Grid. Values are finite.
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw GridMismatch("grid function: expected " + std::to_string(grid_.size()) +
                               " values, got " + std::to_string(values_.size()));
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw DomainError("grid function: non-finite value at node " + std::to_string(i));
            }
        }
    }

    template <class Fn>
    static GridFunction sample(const Grid& grid, Fn&& fn) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
        return GridFunction(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double node(std::size_t i) const { return grid_.node(i); }

    std::span<const double> values() const { return values_; }
    /// Values at t_0..t_N.
    std::span<const double> main_values() const {
        return std::span<const double>(values_).subspan(grid_.zero_index());
    }
    /// Values at the history nodes, excluding t = 0.
    std::span<const double> history_values() const {
        return std::span<const double>(values_).first(grid_.zero_index());
    }

    /// Value at t = 0.
    double at_zero() const { return values_[grid_.zero_index()]; }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) throw GridMismatch("grid functions live on different grids");
}

/// Piecewise-linear evaluation of `gf` at x ∈ [-h, T]; exact at nodes.
/// Points up to 1e-12·max(1, h+T) outside the interval are clamped.
inline double interpolate(const GridFunction& gf, double x) {
    const Grid& g = gf.grid();
    const double slack = 1e-12 * std::max(1.0, g.h() + g.T());
    if (!(x >= -g.h() - slack && x <= g.T() + slack)) {
        throw DomainError("interpolate: point outside [-h, T]");
    }
    double pos;
    if (x < 0.0 && g.history_steps() > 0) {
        pos = (x + g.h()) / g.history_dt();
    } else {
        pos = static_cast<double>(g.zero_index()) + std::max(x, 0.0) / g.dt();
    }
    const double last = static_cast<double>(gf.size() - 1);
    pos = std::clamp(pos, 0.0, last);
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-9) {
        return gf[static_cast<std::size_t>(nearest)];
    }
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return gf[i] + frac * (gf[i + 1] - gf[i]);
}

}  // namespace fdde
