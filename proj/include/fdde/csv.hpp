#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fdde/error.hpp"
#include "fdde/grid.hpp"

namespace fdde {

/// Formats x with 17 significant digits, enough to round-trip a binary64.
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes `t,u` followed by one row per node, ascending in t.
inline void write_trajectory_csv(std::ostream& out, const GridFunction& gf) {
    out << "t,u\n";
    for (std::size_t i = 0; i < gf.size(); ++i) {
        out << format_real(gf.node(i)) << ',' << format_real(gf[i]) << '\n';
    }
}

/// Raw (t, u) samples read back from a trajectory CSV.
struct Samples {
    std::vector<double> t;
    std::vector<double> u;
};

class CsvError : public Error {
public:
    using Error::Error;
};

/// Reads a `t,u` CSV. Rows must be strictly ascending in t and finite.
inline Samples read_trajectory_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    Samples s;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != "t,u") throw CsvError("csv: expected header 't,u'");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw CsvError("csv line " + std::to_string(lineno) + ": expected two columns");
        }
        auto field = [&](const std::string& f) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f.size() || !std::isfinite(v)) {
                throw CsvError("csv line " + std::to_string(lineno) + ": bad number '" + f + "'");
            }
            return v;
        };
        const double t = field(line.substr(0, comma));
        const double u = field(line.substr(comma + 1));
        if (!s.t.empty() && !(t > s.t.back())) {
            throw CsvError("csv line " + std::to_string(lineno) + ": t is not strictly ascending");
        }
        s.t.push_back(t);
        s.u.push_back(u);
    }
    if (!header) throw CsvError("csv: empty input");
    if (s.t.size() < 2) throw CsvError("csv: need at least two rows");
    return s;
}

/// Piecewise-linear interpolation through sorted samples.
inline double interpolate_samples(const Samples& s, double x) {
    const double slack = 1e-12 * std::max(1.0, s.t.back() - s.t.front());
    if (x < s.t.front() - slack || x > s.t.back() + slack) {
        throw DomainError("csv samples do not cover t = " + format_real(x));
    }
    const auto it = std::lower_bound(s.t.begin(), s.t.end(), x);
    if (it == s.t.begin()) return s.u.front();
    if (it == s.t.end()) return s.u.back();
    const auto i = static_cast<std::size_t>(it - s.t.begin());
    if (*it == x) return s.u[i];
    const double frac = (x - s.t[i - 1]) / (s.t[i] - s.t[i - 1]);
    return s.u[i - 1] + frac * (s.u[i] - s.u[i - 1]);
}

/// Samples laid onto the problem mesh. If the rows are exactly the nodes of
/// Grid(T, h, N) for some N, they are taken verbatim; otherwise they are
/// resampled by linear interpolation onto Grid(T, h, fallback_N) and
/// `resampled` is set.
struct GridAssignment {
    GridFunction values;
    bool resampled;
};

inline GridAssignment assign_to_grid(const Samples& s, double T, double h, std::size_t fallback_N) {
    const double scale = std::max(1.0, T + h);
    const auto zero = std::find_if(s.t.begin(), s.t.end(),
                                   [&](double t) { return std::abs(t) <= 1e-12 * scale; });
    if (zero != s.t.end()) {
        const auto N = static_cast<std::size_t>(s.t.end() - zero) - 1;
        if (N >= 1) {
            const Grid g(T, h, N);
            bool match = g.size() == s.t.size();
            for (std::size_t i = 0; match && i < g.size(); ++i) {
                match = std::abs(g.node(i) - s.t[i]) <= 1e-9 * scale;
            }
            if (match) return {GridFunction(g, s.u), false};
        }
    }
    const Grid g(T, h, fallback_N);
    return {GridFunction::sample(g, [&](double x) { return interpolate_samples(s, x); }), true};
}

}  // namespace fdde
