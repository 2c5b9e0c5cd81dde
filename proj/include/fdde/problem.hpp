#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fdde/error.hpp"
#include "fdde/expr.hpp"

namespace fdde {

/// Which Lipschitz hypothesis the user asserts for f(t, u, v).
enum class LipschitzMode {
    both,         // |Δf| ≤ L(|Δu| + |Δv|)
    second_only,  // |Δf| ≤ L|Δu| with v held fixed; constant delay only
};

/// Numerical settings that may be stored alongside a problem.
struct Numerics {
    std::size_t N = 1024;
    double tol = 1e-10;
    double lambda_target = 0.5;
    double rho = 0.5;
};

/// A fractional delay problem
///
///   D^α u(t) = f(t, u(t), u(g(t))),  t ∈ [0, T]
///   u(t) = φ(t),                     t ∈ [-h, 0]
///
/// with either a general lag g(t) ≤ t or a constant delay g(t) = t - r.
struct Problem {
    double alpha = 0.5;
    double T = 1.0;
    double h = 0.0;
    Expr f;
    Expr g;                         // empty for constant delay
    std::optional<double> delay;    // r, set iff constant delay
    Expr phi;
    double L = 0.0;
    bool L_estimated = false;       // L came from estimate_lipschitz
    LipschitzMode lipschitz_mode = LipschitzMode::both;
    Numerics numerics;

    bool constant_delay() const { return delay.has_value(); }

    /// The lag g(t); for constant delay this is t - r.
    double lag(double t) const { return delay ? t - *delay : g(t); }
};

/// Throws ConfigError naming the first violated structural invariant.
inline void check_problem(const Problem& p) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0,1)");
    if (!(std::isfinite(p.T) && p.T > 0.0)) throw ConfigError("T", "must be > 0");
    if (!(std::isfinite(p.h) && p.h >= 0.0)) throw ConfigError("h", "must be >= 0");
    if (!(std::isfinite(p.L) && p.L >= 0.0)) throw ConfigError("L", "must be >= 0");
    if (p.f.empty()) throw ConfigError("f", "missing");
    if (p.phi.empty()) throw ConfigError("phi", "missing");
    if (!p.f.variables().subset_of(vars_tuv)) throw ConfigError("f", "may use only t, u, v");
    if (!p.phi.variables().subset_of(vars_t)) throw ConfigError("phi", "may use only t");
    if (p.delay) {
        if (!(std::isfinite(*p.delay) && *p.delay > 0.0)) throw ConfigError("r", "must be > 0");
        if (p.h < *p.delay) throw ConfigError("h", "must be >= r for a constant delay");
    } else {
        if (p.g.empty()) throw ConfigError("g", "missing");
        if (!p.g.variables().subset_of(vars_t)) throw ConfigError("g", "may use only t");
        if (p.lipschitz_mode == LipschitzMode::second_only) {
            throw ConfigError("lipschitz_mode", "second_only requires g = constant");
        }
    }
    const Numerics& n = p.numerics;
    if (n.N < 2) throw ConfigError("N", "must be >= 2");
    if (!(n.tol > 0.0)) throw ConfigError("tol", "must be > 0");
    if (!(n.lambda_target > 0.0 && n.lambda_target < 1.0)) {
        throw ConfigError("lambda_target", "must lie in (0,1)");
    }
    if (!(n.rho > 0.0 && n.rho < 1.0)) throw ConfigError("rho", "must lie in (0,1)");
}

/// Axis-aligned sampling box for estimate_lipschitz.
struct LipschitzBox {
    double t_lo, t_hi;
    double u_lo, u_hi;
    double v_lo, v_hi;
};

/// Largest difference quotient of f seen on a sampled box.
///
/// Adjacent samples along u (and along v in `both` mode) are compared at
/// every sampled (t, u, v). For the l1 denominator |Δu| + |Δv| the supremum
/// is max(|∂f/∂u|, |∂f/∂v|), which axis-aligned pairs already realise.
/// The result is a lower bound on the true constant: an estimate only.
inline double estimate_lipschitz(const Expr& f, const LipschitzBox& box, std::size_t n_samples,
                                 LipschitzMode mode) {
    if (n_samples < 2) throw DomainError("estimate_lipschitz: need at least 2 samples per axis");
    const bool use_v = mode == LipschitzMode::both;
    if (!(box.u_hi > box.u_lo)) throw DomainError("estimate_lipschitz: degenerate u range");
    if (use_v && !(box.v_hi > box.v_lo)) throw DomainError("estimate_lipschitz: degenerate v range");
    if (!(box.t_hi >= box.t_lo)) throw DomainError("estimate_lipschitz: inverted t range");

    const double m = static_cast<double>(n_samples - 1);
    auto at = [m](double lo, double hi, std::size_t i) {
        return lo + (hi - lo) * static_cast<double>(i) / m;
    };

    double best = 0.0;
    for (std::size_t it = 0; it < n_samples; ++it) {
        const double t = at(box.t_lo, box.t_hi, it);
        for (std::size_t iv = 0; iv < n_samples; ++iv) {
            const double v = at(box.v_lo, box.v_hi, iv);
            double prev = f(t, box.u_lo, v);
            for (std::size_t iu = 1; iu < n_samples; ++iu) {
                const double u0 = at(box.u_lo, box.u_hi, iu - 1);
                const double u1 = at(box.u_lo, box.u_hi, iu);
                const double cur = f(t, u1, v);
                best = std::max(best, std::abs(cur - prev) / (u1 - u0));
                prev = cur;
            }
        }
        if (!use_v) continue;
        for (std::size_t iu = 0; iu < n_samples; ++iu) {
            const double u = at(box.u_lo, box.u_hi, iu);
            double prev = f(t, u, box.v_lo);
            for (std::size_t iv = 1; iv < n_samples; ++iv) {
                const double v0 = at(box.v_lo, box.v_hi, iv - 1);
                const double v1 = at(box.v_lo, box.v_hi, iv);
                const double cur = f(t, u, v1);
                best = std::max(best, std::abs(cur - prev) / (v1 - v0));
                prev = cur;
            }
        }
    }
    return best;
}

/// Box used when a problem file omits L: t over [0,T], u and v over
/// [-10, 10] widened to cover the sampled history.
inline LipschitzBox default_lipschitz_box(const Problem& p) {
    double bound = 10.0;
    const double lo = p.delay ? -*p.delay : -p.h;
    for (int i = 0; i <= 100; ++i) {
        const double t = lo * (1.0 - i / 100.0);
        bound = std::max(bound, 1.0 + std::abs(p.phi(t)));
    }
    return {0.0, p.T, -bound, bound, -bound, bound};
}

struct Violation {
    double t;
    double g_t;
    std::string reason;
};

struct ValidationReport {
    std::size_t n_samples = 0;
    std::vector<Violation> violations;

    bool pass() const { return violations.empty(); }
};

/// Sample-based check of the lag hypothesis: g(t) ≤ t and -h ≤ g(t) ≤ T on
/// n_samples equally spaced t ∈ [0,T]; r ≤ h for a constant delay.
inline ValidationReport validate_problem(const Problem& p, std::size_t n_samples = 10001) {
    if (n_samples < 2) throw DomainError("validate_problem: need at least 2 samples");
    ValidationReport rep;
    rep.n_samples = n_samples;
    if (p.delay) {
        if (*p.delay > p.h) {
            rep.violations.push_back({0.0, -*p.delay, "delay r exceeds history depth h"});
        }
        return rep;
    }
    const double slack = 1e-12 * std::max(1.0, p.T + p.h);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = p.T * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        double gt;
        try {
            gt = p.g(t);
        } catch (const EvalError& e) {
            char buf[64];
            std::snprintf(buf, sizeof buf, " at t = %.17g", t);
            throw EvalError(std::string(e.what()) + buf);
        }
        if (gt > t + slack) {
            rep.violations.push_back({t, gt, "g(t) > t"});
        } else if (gt < -p.h - slack) {
            rep.violations.push_back({t, gt, "g(t) < -h"});
        } else if (gt > p.T + slack) {
            rep.violations.push_back({t, gt, "g(t) > T"});
        }
    }
    return rep;
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(key, "cannot parse '" + text + "' as a number");
    }
    if (used != text.size() || !std::isfinite(v)) {
        throw ConfigError(key, "cannot parse '" + text + "' as a number");
    }
    return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (v < 0.0 || v != std::floor(v) || v > 1e9) {
        throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    }
    return static_cast<std::size_t>(v);
}

inline Expr parse_keyed_expr(const std::string& key, const std::string& text, VarSet allowed) {
    try {
        return parse_expr(text, allowed);
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace detail

/// Parses the line-oriented `key = value` problem format.
///
/// Keys: alpha, T, h, f, g, r, phi, L, lipschitz_mode, N, tol,
/// lambda_target, rho. `#` starts a comment. `g = constant` selects a
/// constant delay r; h then defaults to r. A missing L is replaced by
/// estimate_lipschitz over default_lipschitz_box and flagged as estimated.
inline Problem load_problem(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    static const char* const known[] = {"alpha", "T",   "h",             "f",  "g",   "r",  "phi",
                                        "L",     "lipschitz_mode", "N", "tol", "lambda_target",
                                        "rho"};
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError(key, "unknown key (line " + std::to_string(lineno) + ")");
        }
        if (value.empty()) throw ConfigError(key, "empty value");
        if (!kv.emplace(key, value).second) throw ConfigError(key, "duplicate key");
    }

    auto require = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(key, "missing required key");
        return it->second;
    };
    auto optional = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    Problem p;
    p.alpha = detail::parse_real("alpha", require("alpha"));
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0,1)");
    p.T = detail::parse_real("T", require("T"));
    p.f = detail::parse_keyed_expr("f", require("f"), vars_tuv);
    p.phi = detail::parse_keyed_expr("phi", require("phi"), vars_t);

    const std::string& g = require("g");
    if (g == "constant") {
        p.delay = detail::parse_real("r", require("r"));
    } else {
        if (optional("r")) throw ConfigError("r", "only valid with g = constant");
        p.g = detail::parse_keyed_expr("g", g, vars_t);
    }

    if (const auto* s = optional("h")) {
        p.h = detail::parse_real("h", *s);
    } else if (p.delay) {
        p.h = *p.delay;
    } else {
        throw ConfigError("h", "missing required key (no default for a general lag)");
    }

    if (const auto* s = optional("lipschitz_mode")) {
        if (*s == "both") {
            p.lipschitz_mode = LipschitzMode::both;
        } else if (*s == "second_only") {
            p.lipschitz_mode = LipschitzMode::second_only;
        } else {
            throw ConfigError("lipschitz_mode", "expected 'both' or 'second_only'");
        }
    }

    if (const auto* s = optional("N")) p.numerics.N = detail::parse_count("N", *s);
    if (const auto* s = optional("tol")) p.numerics.tol = detail::parse_real("tol", *s);
    if (const auto* s = optional("lambda_target")) {
        p.numerics.lambda_target = detail::parse_real("lambda_target", *s);
    }
    if (const auto* s = optional("rho")) p.numerics.rho = detail::parse_real("rho", *s);

    if (const auto* s = optional("L")) {
        p.L = detail::parse_real("L", *s);
        check_problem(p);
    } else {
        p.L = 0.0;
        check_problem(p);
        p.L = estimate_lipschitz(p.f, default_lipschitz_box(p), 41, p.lipschitz_mode);
        p.L_estimated = true;
    }
    return p;
}

/// Inverse of load_problem. Reals are printed with 17 significant digits.
inline std::string to_config_text(const Problem& p) {
    auto real = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    std::string out;
    out += "alpha = " + real(p.alpha) + "\n";
    out += "T = " + real(p.T) + "\n";
    out += "h = " + real(p.h) + "\n";
    out += "f = " + p.f.to_string() + "\n";
    if (p.delay) {
        out += "g = constant\n";
        out += "r = " + real(*p.delay) + "\n";
    } else {
        out += "g = " + p.g.to_string() + "\n";
    }
    out += "phi = " + p.phi.to_string() + "\n";
    if (!p.L_estimated) out += "L = " + real(p.L) + "\n";
    out += std::string("lipschitz_mode = ") +
           (p.lipschitz_mode == LipschitzMode::both ? "both" : "second_only") + "\n";
    out += "N = " + std::to_string(p.numerics.N) + "\n";
    out += "tol = " + real(p.numerics.tol) + "\n";
    out += "lambda_target = " + real(p.numerics.lambda_target) + "\n";
    out += "rho = " + real(p.numerics.rho) + "\n";
    return out;
}

}  // namespace fdde
