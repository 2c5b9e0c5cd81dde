// Command-line front end: solve, certify, selftest.

#include <iostream>

#include <CLI11.hpp>

#include "fdde/cli.hpp"

int main(int argc, char** argv) {
    using fdde::cli::Command;
    fdde::cli::RunConfig cfg;

    CLI::App app{"Solver and Hyers-Ulam certifier for Caputo fractional delay equations"};
    app.require_subcommand(1);

    auto add_overrides = [&cfg](CLI::App* sub) {
        sub->add_option("--N", cfg.N, "steps on [0,T]")->check(CLI::PositiveNumber);
        sub->add_option("--tol", cfg.tol, "relative stopping tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--lambda", cfg.lambda_target, "target contraction constant in (0,1)");
        sub->add_option("--rho", cfg.rho, "progressive step length as a fraction of r");
        sub->add_option("--max-iter", cfg.max_iter, "iteration cap per fixed-point solve");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve a problem file");
    solve->add_option("problem", cfg.problem_path, "problem file")->required();
    solve->add_option("--out", cfg.out_path, "solution CSV")->required();
    solve->add_option("--report", cfg.report_path, "text report")->required();
    add_overrides(solve);

    CLI::App* certify = app.add_subcommand("certify", "certify a candidate trajectory");
    certify->add_option("problem", cfg.problem_path, "problem file")->required();
    certify->add_option("candidate", cfg.candidate_path, "candidate CSV (t,u)")->required();
    certify->add_option("--out", cfg.out_path, "z* CSV")->required();
    certify->add_option("--report", cfg.report_path, "text report")->required();
    add_overrides(certify);

    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fdde::cli::exit_invalid;
    }

    if (solve->parsed()) cfg.command = Command::solve;
    if (certify->parsed()) cfg.command = Command::certify;
    if (selftest->parsed()) cfg.command = Command::selftest;
    return fdde::cli::run(cfg, std::cout, std::cerr);
}
