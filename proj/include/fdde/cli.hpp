#pragma once

#include <cstddef>
#include <exception>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "fdde/csv.hpp"
#include "fdde/error.hpp"
#include "fdde/problem.hpp"
#include "fdde/selftest.hpp"
#include "fdde/solver.hpp"
#include "fdde/stability.hpp"

namespace fdde::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 1;
inline constexpr int exit_not_converged = 2;
inline constexpr int exit_certificate_failed = 3;
inline constexpr int exit_selftest_failed = 4;

enum class Command { solve, certify, selftest };

struct RunConfig {
    Command command = Command::selftest;
    std::string problem_path;
    std::string candidate_path;  // certify only
    std::string out_path;
    std::string report_path;
    std::optional<std::size_t> N;
    std::optional<double> tol;
    std::optional<double> lambda_target;
    std::optional<double> rho;
    std::optional<std::size_t> max_iter;
    CertifyOptions certify_options;  // test hooks, not reachable from the command line
    SelftestOptions selftest_options;
};

/// Throws ConfigError if a path required by the command is empty.
inline void check_run_config(const RunConfig& cfg) {
    if (cfg.command == Command::selftest) return;
    if (cfg.problem_path.empty()) throw ConfigError("problem", "path is empty");
    if (cfg.out_path.empty()) throw ConfigError("out", "path is empty");
    if (cfg.report_path.empty()) throw ConfigError("report", "path is empty");
    if (cfg.command == Command::certify && cfg.candidate_path.empty()) {
        throw ConfigError("candidate", "path is empty");
    }
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out.flush()) throw Error("write to '" + path + "' failed");
}

inline PicardConfig picard_config(const Problem& p, const RunConfig& cfg) {
    PicardConfig pc = PicardConfig::from(p.numerics);
    if (cfg.N) pc.N = *cfg.N;
    if (cfg.tol) pc.tol = *cfg.tol;
    if (cfg.lambda_target) pc.lambda_target = *cfg.lambda_target;
    if (cfg.rho) pc.rho = *cfg.rho;
    if (cfg.max_iter) pc.max_iter = *cfg.max_iter;
    try {
        pc.check();
    } catch (const DomainError& e) {
        throw ConfigError("numerics", e.what());
    }
    return pc;
}

/// Loads, checks and validates the problem; throws on any failure.
inline Problem load_and_validate(const std::string& path, std::ostream& report) {
    Problem p = load_problem(read_file(path));
    const ValidationReport v = validate_problem(p);
    if (!v.pass()) {
        std::ostringstream msg;
        msg << "lag condition violated at " << v.violations.size() << " of " << v.n_samples
            << " samples; first: t = " << format_real(v.violations.front().t)
            << ", g(t) = " << format_real(v.violations.front().g_t) << " ("
            << v.violations.front().reason << ")";
        throw ConfigError("g", msg.str());
    }
    report << "problem        " << path << '\n';
    report << "alpha          " << format_real(p.alpha) << '\n';
    report << "T              " << format_real(p.T) << '\n';
    report << "h              " << format_real(p.h) << '\n';
    report << "f(t,u,v)       " << p.f.to_string() << '\n';
    if (p.delay) {
        report << "lag            t - " << format_real(*p.delay) << " (constant delay)\n";
    } else {
        report << "lag g(t)       " << p.g.to_string() << '\n';
    }
    report << "phi(t)         " << p.phi.to_string() << '\n';
    report << "L              " << format_real(p.L)
           << (p.L_estimated ? "  (sampled estimate, not a guarantee)" : "") << '\n';
    report << "lipschitz      "
           << (p.lipschitz_mode == LipschitzMode::both ? "both arguments" : "second argument only")
           << '\n';
    report << "lag check      passed on " << v.n_samples << " samples of [0,T]\n";
    return p;
}

inline void write_log(std::ostream& report, const char* indent, const std::vector<double>& d,
                      const std::vector<double>& ratios) {
    report << indent << "iter  distance                 ratio\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        report << indent << (i + 1) << "  " << format_real(d[i]);
        if (i > 0 && i - 1 < ratios.size()) report << "  " << format_real(ratios[i - 1]);
        report << '\n';
    }
}

}  // namespace detail

/// `solve`: global Picard iteration for a general lag, progressive
/// contractions for a constant delay. Writes the trajectory CSV and a
/// plain-text report. Exit 0, 1 on invalid input, 2 on non-convergence.
inline int cmd_solve(const RunConfig& cfg, std::ostream& diag) {
    std::ostringstream report;
    Problem p;
    PicardConfig pc;
    try {
        check_run_config(cfg);
        p = detail::load_and_validate(cfg.problem_path, report);
        pc = detail::picard_config(p, cfg);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_invalid;
    }

    std::optional<std::pair<GridFunction, SolveReport>> result;
    try {
        result = p.delay ? progressive_solve(p, pc) : picard_solve(p, pc);
    } catch (const ConvergenceError& e) {
        diag << "error: " << e.what() << '\n';
        return exit_not_converged;
    } catch (const EvalError& e) {
        diag << "error: iteration left the domain of f: " << e.what() << '\n';
        return exit_not_converged;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    const auto& [u, rep] = *result;

    report << "method         "
           << (p.delay ? "progressive contractions" : "global Picard iteration, Bielecki norm")
           << '\n';
    report << "N              " << rep.N << " steps on [0,T], " << u.grid().history_steps()
           << " on [-h,0]\n";
    report << "tau            " << format_real(rep.tau) << '\n';
    report << "lambda         " << format_real(rep.lambda) << '\n';
    report << "tol            " << format_real(pc.tol) << " (relative to max(1, |u|))\n";
    report << "iterations     " << rep.iterations << '\n';
    report << "residual       " << format_real(rep.residual) << '\n';
    if (p.delay) {
        report << "steps          " << rep.partitions << " of length " << format_real(rep.S)
               << '\n';
        report << "step  S_begin  S_end  iterations  last_ratio  residual\n";
        for (const StepReport& s : rep.steps) {
            report << s.index << "  " << format_real(s.S_begin) << "  " << format_real(s.S_end)
                   << "  " << s.log.iterations << "  "
                   << (s.log.ratios.empty() ? std::string("-") : format_real(s.log.ratios.back()))
                   << "  " << format_real(s.log.residual) << '\n';
        }
    } else {
        report << "error bound    " << format_real(rep.sup_error_bound)
               << " (sup norm, from the Banach a posteriori estimate)\n";
        detail::write_log(report, "", rep.distances, rep.ratios);
    }

    try {
        std::ostringstream csv;
        write_trajectory_csv(csv, u);
        detail::write_file(cfg.out_path, csv.str());
        detail::write_file(cfg.report_path, report.str());
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_ok;
}

/// `certify`: Hyers–Ulam certificate for one candidate trajectory. Writes
/// the z* CSV and a report. Exit 0 when the pointwise bound holds, 3 when
/// it does not, 1 on invalid input or a failed solve.
inline int cmd_certify(const RunConfig& cfg, std::ostream& diag) {
    std::ostringstream report;
    std::optional<Certificate> cert;
    std::size_t candidate_rows = 0;
    bool resampled = false;
    try {
        check_run_config(cfg);
        const Problem p = detail::load_and_validate(cfg.problem_path, report);
        const PicardConfig pc = detail::picard_config(p, cfg);
        if (p.lipschitz_mode != LipschitzMode::both) {
            throw ConfigError("lipschitz_mode", "certification needs the both-argument Lipschitz "
                                                "condition");
        }
        const Samples s = read_trajectory_csv(detail::read_file(cfg.candidate_path));
        candidate_rows = s.t.size();
        GridAssignment a = assign_to_grid(s, p.T, p.h, pc.N);
        resampled = a.resampled;
        cert = certify(p, a.values, pc, cfg.certify_options);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_invalid;
    }

    const Certificate& c = *cert;
    const Grid& grid = c.z_star.grid();
    report << "candidate      " << cfg.candidate_path << " (" << candidate_rows << " rows)\n";
    report << "grid           " << grid.steps() << " steps on [0,T]"
           << (resampled ? ", candidate resampled by piecewise-linear interpolation"
                         : ", candidate nodes used as given")
           << '\n';
    report << "epsilon        " << format_real(c.epsilon) << '\n';
    report << "discretization " << format_real(c.discretization_estimate)
           << " (half-resolution estimate)\n";
    report << "slack          " << format_real(c.slack) << '\n';
    report << "tau            " << format_real(c.tau_used) << '\n';
    report << "lambda         " << format_real(c.lambda_used) << '\n';
    report << "z* at T        " << format_real(c.z_star.values().back()) << '\n';
    report << "worst margin   " << format_real(c.worst_margin()) << " (z* - |candidate - u|)\n";
    if (c.closed_form.overflow) {
        report << "closed form c  overflows, log c = " << format_real(c.closed_form.log_c) << '\n';
    } else {
        report << "closed form c  " << format_real(c.closed_form.c) << '\n';
    }
    report << "pointwise      " << (c.pointwise_pass ? "PASS" : "FAIL") << '\n';
    report << "closed form    " << (c.closed_form_pass ? "PASS" : "FAIL") << '\n';
    report << "note           the certificate covers this one candidate, not every solution of "
              "the defect inequality\n";

    try {
        std::ostringstream csv;
        csv << "t,z_star,abs_diff,margin\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv << format_real(grid.node(i)) << ',' << format_real(c.z_star[i]) << ','
                << format_real(c.abs_diff[i]) << ',' << format_real(c.margins[i]) << '\n';
        }
        detail::write_file(cfg.out_path, csv.str());
        detail::write_file(cfg.report_path, report.str());
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return c.pointwise_pass ? exit_ok : exit_certificate_failed;
}

/// `selftest`: prints one line per built-in check. Exit 0 if all pass, 4
/// otherwise.
inline int cmd_selftest(const RunConfig& cfg, std::ostream& out) {
    const std::vector<CheckResult> results = run_selftest(cfg.selftest_options);
    std::size_t failed = 0;
    for (const CheckResult& r : results) {
        out << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
        if (!r.pass) ++failed;
    }
    if (failed > 0) {
        out << failed << " of " << results.size() << " checks failed:";
        for (const CheckResult& r : results) {
            if (!r.pass) out << ' ' << r.name << ';';
        }
        out << '\n';
        return exit_selftest_failed;
    }
    out << "all " << results.size() << " checks passed\n";
    return exit_ok;
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    switch (cfg.command) {
        case Command::solve: return cmd_solve(cfg, diag);
        case Command::certify: return cmd_certify(cfg, diag);
        case Command::selftest: return cmd_selftest(cfg, out);
    }
    return exit_invalid;
}

}  // namespace fdde::cli
