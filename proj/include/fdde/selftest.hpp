#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "fdde/fixtures.hpp"
#include "fdde/fracnum.hpp"
#include "fdde/problem.hpp"
#include "fdde/solver.hpp"
#include "fdde/special_functions.hpp"

namespace fdde {

struct SelftestOptions {
    /// Γ coefficients used by the gamma checks and by every expected value
    /// derived from Γ. Replaced in tests to inject a fault.
    LanczosTable lanczos = default_lanczos;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

inline std::vector<std::pair<std::string, std::function<CheckResult()>>> selftest_checks(
    const SelftestOptions& opt) {
    const LanczosTable tab = opt.lanczos;
    auto G = [tab](double x) { return gamma(x, tab); };

    std::vector<std::pair<std::string, std::function<CheckResult()>>> checks;

    checks.emplace_back("gamma identities", [G] {
        const double sqrt_pi = std::sqrt(std::numbers::pi);
        double err = 0.0;
        err = std::max(err, std::abs(G(1.0) - 1.0));
        err = std::max(err, std::abs(G(0.5) - sqrt_pi) / sqrt_pi);
        err = std::max(err, std::abs(G(5.0) - 24.0) / 24.0);
        err = std::max(err, std::abs(G(1.5) - 0.886226925452758) / 0.886226925452758);
        return CheckResult{"", err <= 1e-13, fmt("max rel err %.3g", err)};
    });

    checks.emplace_back("power rule on 1 and t", [G] {
        const std::size_t N = 64;
        const double dt = 1.0 / N;
        std::vector<double> one(N + 1, 1.0), lin(N + 1);
        for (std::size_t k = 0; k <= N; ++k) lin[k] = k * dt;
        const double e1 = std::abs(rl_integral(one, dt, 0.5).back() - 1.0 / G(1.5));
        const double e2 = std::abs(rl_integral(lin, dt, 0.5).back() - 1.0 / G(2.5));
        return CheckResult{"", std::max(e1, e2) <= 1e-10, fmt("errors %.3g, %.3g", e1, e2)};
    });

    checks.emplace_back("power rule on t^2, order 2", [G] {
        auto err = [&](std::size_t N) {
            const double dt = 1.0 / static_cast<double>(N);
            std::vector<double> sq(N + 1);
            for (std::size_t k = 0; k <= N; ++k) sq[k] = (k * dt) * (k * dt);
            return std::abs(rl_integral(sq, dt, 0.5).back() - 2.0 / G(3.5));
        };
        const double ratio = err(256) / err(512);
        return CheckResult{"", ratio >= 3.5, fmt("error ratio %.3f", ratio)};
    });

    checks.emplace_back("exponential kernel bound", [] {
        const std::size_t N = 8192;
        const double dt = 1.0 / N;
        std::size_t violations = 0;
        double worst = -1.0;
        for (double tau : {1.0, 4.0, 16.0}) {
            std::vector<double> e(N + 1);
            for (std::size_t k = 0; k <= N; ++k) e[k] = std::exp(tau * k * dt);
            for (double alpha : {0.25, 0.5, 0.75}) {
                const std::vector<double> q = rl_integral(e, dt, alpha);
                const double ta = std::pow(tau, alpha);
                for (std::size_t k = 1; k <= N; ++k) {
                    const double rel = q[k] * ta / e[k] - 1.0;
                    worst = std::max(worst, rel);
                    if (rel > 1e-6) ++violations;
                }
            }
        }
        return CheckResult{"", violations == 0,
                           fmt("%.0f violations, worst rel excess %.3g",
                               static_cast<double>(violations), worst)};
    });

    checks.emplace_back("Mittag-Leffler values", [] {
        const double e1 = std::abs(mittag_leffler(1.0, 1.0) - std::numbers::e) / std::numbers::e;
        const double e2 = std::abs(mittag_leffler(0.5, -1.0) - 0.427583576155807004) / 0.4275835761;
        const double e3 = std::abs(mittag_leffler(0.5, 2.0) - 108.940904389977972) / 108.94090439;
        const double err = std::max({e1, e2, e3});
        return CheckResult{"", err <= 1e-13, fmt("max rel err %.3g", err)};
    });

    checks.emplace_back("Mittag-Leffler trajectory", [] {
        Problem p;
        p.alpha = 0.5;
        p.T = 1.0;
        p.h = 0.0;
        p.f = parse_expr("-v");
        p.g = parse_expr("t", vars_t);
        p.phi = parse_expr("1", vars_t);
        p.L = 1.0;
        PicardConfig cfg;
        cfg.N = 1024;
        const auto [u, rep] = picard_solve(p, cfg);
        double err = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double t = u.node(k);
            err = std::max(err, std::abs(u[k] - mittag_leffler(0.5, -std::sqrt(t))));
        }
        return CheckResult{"", err <= 5e-3, fmt("max abs err %.3g", err)};
    });

    checks.emplace_back("quadratic-lag fixture", [] {
        const Problem p = load_problem(fixtures::quadratic_lag);
        const auto [u, rep] = picard_solve(p, PicardConfig::from(p.numerics));
        double worst = 0.0;
        for (std::size_t i = 1; i < rep.ratios.size(); ++i) worst = std::max(worst, rep.ratios[i]);
        return CheckResult{"", worst <= 0.55 && validate_problem(p).pass(),
                           fmt("%.0f iterations, worst ratio %.3f",
                               static_cast<double>(rep.iterations), worst)};
    });

    checks.emplace_back("constant-delay fixture", [] {
        const Problem p = load_problem(fixtures::constant_delay);
        const auto [u, rep] = progressive_solve(p, PicardConfig::from(p.numerics));
        const bool ok = rep.steps.size() == 20 && std::isfinite(u.values().back());
        return CheckResult{"", ok,
                           fmt("%.0f steps, u(T) = %.6g", static_cast<double>(rep.steps.size()),
                               u.values().back())};
    });

    return checks;
}

}  // namespace detail

/// Runs the built-in oracle checks. A check that throws counts as failed.
inline std::vector<CheckResult> run_selftest(const SelftestOptions& opt = {}) {
    std::vector<CheckResult> out;
    for (auto& [name, fn] : detail::selftest_checks(opt)) {
        CheckResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("threw: ") + e.what();
        }
        r.name = name;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fdde
