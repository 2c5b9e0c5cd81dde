#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fdde/fixtures.hpp"
#include "fdde/problem.hpp"

using fdde::ConfigError;
using fdde::load_problem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* const minimal = "alpha = 0.5\nT = 1\nh = 1\nf = -v\ng = t\nphi = 1\nL = 1\n";

std::string key_of_error(const std::string& text) {
    try {
        load_problem(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST(LoadProblem, QuadraticLagFile) {
    const auto p = load_problem(slurp(FDDE_PROBLEMS_DIR "/quadratic_lag.txt"));
    EXPECT_EQ(p.alpha, 0.5);
    EXPECT_EQ(p.T, 1.0);
    EXPECT_EQ(p.h, 1.0);
    EXPECT_EQ(p.L, 1.0);
    EXPECT_FALSE(p.L_estimated);
    EXPECT_FALSE(p.constant_delay());
    EXPECT_DOUBLE_EQ(p.lag(0.5), 0.25);
    EXPECT_DOUBLE_EQ(p.f(0.0, -1.0, 0.0), 1.5);
    EXPECT_EQ(p.phi(-0.5), -0.5);
    EXPECT_EQ(p.lipschitz_mode, fdde::LipschitzMode::both);
}

TEST(LoadProblem, ConstantDelayFile) {
    const auto p = load_problem(slurp(FDDE_PROBLEMS_DIR "/constant_delay.txt"));
    EXPECT_TRUE(p.constant_delay());
    EXPECT_EQ(*p.delay, 1.0);
    EXPECT_EQ(p.h, 1.0);
    EXPECT_EQ(p.T, 10.0);
    EXPECT_EQ(p.lipschitz_mode, fdde::LipschitzMode::second_only);
    EXPECT_DOUBLE_EQ(p.lag(3.0), 2.0);
    EXPECT_DOUBLE_EQ(p.phi(-1.0), std::exp(-1.0));
}

TEST(LoadProblem, FilesMatchEmbeddedFixtures) {
    EXPECT_EQ(slurp(FDDE_PROBLEMS_DIR "/quadratic_lag.txt"), fdde::fixtures::quadratic_lag);
    EXPECT_EQ(slurp(FDDE_PROBLEMS_DIR "/constant_delay.txt"), fdde::fixtures::constant_delay);
}

TEST(LoadProblem, DefaultsAndOptionalKeys) {
    const auto p = load_problem(std::string(minimal) + "N = 64\ntol = 1e-8\nlambda_target = 0.25\n");
    EXPECT_EQ(p.numerics.N, 64u);
    EXPECT_EQ(p.numerics.tol, 1e-8);
    EXPECT_EQ(p.numerics.lambda_target, 0.25);
    EXPECT_EQ(p.numerics.rho, 0.5);
    const auto q = load_problem("alpha=0.5\nT=2\nf=u\ng=constant\nr=0.5\nphi=1\nL=1\n");
    EXPECT_EQ(q.h, 0.5);
}

TEST(LoadProblem, ErrorsNameTheKey) {
    const std::string base = "T = 1\nh = 1\nf = -v\ng = t\nphi = 1\nL = 1\n";
    EXPECT_EQ(key_of_error("alpha = 1.5\n" + base), "alpha");
    EXPECT_EQ(key_of_error("alpha = 0\n" + base), "alpha");
    EXPECT_EQ(key_of_error(base), "alpha");
    EXPECT_EQ(key_of_error(std::string(minimal) + "alhpa = 0.5\n"), "alhpa");
    EXPECT_EQ(key_of_error(std::string(minimal) + "L = 2\n"), "L");
    EXPECT_EQ(key_of_error(std::string(minimal) + "lipschitz_mode = neither\n"), "lipschitz_mode");
    EXPECT_EQ(key_of_error(std::string(minimal) + "r = 1\n"), "r");
    EXPECT_EQ(key_of_error(std::string(minimal) + "N = 2.5\n"), "N");
    EXPECT_EQ(key_of_error(std::string(minimal) + "rho = 1\n"), "rho");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = 1\nf = u\ng = t\nphi = 1\n"), "h");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = 1\nh = 1\nf = w\ng = t\nphi = 1\n"), "f");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = 1\nh = 1\nf = u\ng = t\nphi = u\n"), "phi");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = 1\nh = 1\nf = u\ng = u\nphi = 1\n"), "g");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = x\nh = 1\nf = u\ng = t\nphi = 1\n"), "T");
    EXPECT_EQ(key_of_error("alpha = 0.5\nT = 1\nh = 0.5\nf = u\ng = constant\nr = 1\nphi = 1\n"),
              "h");
    EXPECT_EQ(key_of_error(std::string(minimal) + "lipschitz_mode = second_only\n"),
              "lipschitz_mode");
    EXPECT_EQ(key_of_error(std::string(minimal) + "tol =\n"), "tol");
    EXPECT_EQ(key_of_error("just some words\n"), "");
}

TEST(LoadProblem, MessageContainsKey) {
    try {
        load_problem("alpha = 1.5\nT = 1\nh = 1\nf = -v\ng = t\nphi = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
    }
}

TEST(LoadProblem, CommentsAndWhitespace) {
    const auto p = load_problem("# header\n\n  alpha=0.5 # order\nT=1\n h = 1 \nf = -v\ng = t\nphi = 1\nL=1\n");
    EXPECT_EQ(p.alpha, 0.5);
}

TEST(LoadProblem, MissingLIsEstimated) {
    const auto p = load_problem("alpha = 0.5\nT = 1\nh = 1\nf = sin(u) + 0.5*cos(v)\ng = t^2\nphi = t\n");
    EXPECT_TRUE(p.L_estimated);
    EXPECT_GT(p.L, 0.95);
    EXPECT_LE(p.L, 1.0 + 1e-12);
}

TEST(LoadProblem, ConfigTextRoundTrip) {
    const auto p = load_problem(fdde::fixtures::quadratic_lag);
    const auto q = load_problem(fdde::to_config_text(p));
    EXPECT_EQ(fdde::to_config_text(q), fdde::to_config_text(p));
    EXPECT_EQ(q.f(0.3, 0.2, -0.7), p.f(0.3, 0.2, -0.7));
}

TEST(EstimateLipschitz, KnownConstants) {
    const fdde::LipschitzBox box{0.0, 1.0, -5.0, 5.0, -5.0, 5.0};
    const auto f = fdde::parse_expr("3*u - 2*v");
    EXPECT_NEAR(fdde::estimate_lipschitz(f, box, 11, fdde::LipschitzMode::both), 3.0, 1e-12);
    const auto g = fdde::parse_expr("sin(u) + v^2");
    const double Lu = fdde::estimate_lipschitz(g, box, 101, fdde::LipschitzMode::second_only);
    EXPECT_LE(Lu, 1.0);
    EXPECT_GT(Lu, 0.99);
    EXPECT_GT(fdde::estimate_lipschitz(g, box, 101, fdde::LipschitzMode::both), 9.0);
}

TEST(EstimateLipschitz, Errors) {
    const auto f = fdde::parse_expr("u");
    EXPECT_THROW(fdde::estimate_lipschitz(f, {0, 1, 0, 0, 0, 1}, 5, fdde::LipschitzMode::both),
                 fdde::DomainError);
    EXPECT_THROW(fdde::estimate_lipschitz(f, {0, 1, 0, 1, 0, 1}, 1, fdde::LipschitzMode::both),
                 fdde::DomainError);
}

TEST(ValidateProblem, AcceptsAdmissibleLags) {
    auto p = load_problem(fdde::fixtures::quadratic_lag);
    const auto rep = fdde::validate_problem(p);
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(rep.n_samples, 10001u);
    EXPECT_TRUE(fdde::validate_problem(load_problem(fdde::fixtures::constant_delay)).pass());
}

TEST(ValidateProblem, ReportsViolations) {
    auto future = load_problem("alpha=0.5\nT=1\nh=1\nf=u\ng=t+0.1\nphi=1\nL=1\n");
    auto rep = fdde::validate_problem(future, 101);
    EXPECT_FALSE(rep.pass());
    EXPECT_EQ(rep.violations.size(), 101u);
    EXPECT_EQ(rep.violations.front().reason, "g(t) > t");

    auto deep = load_problem("alpha=0.5\nT=1\nh=0.5\nf=u\ng=t-1\nphi=1\nL=1\n");
    rep = fdde::validate_problem(deep, 11);
    EXPECT_FALSE(rep.pass());
    EXPECT_EQ(rep.violations.front().reason, "g(t) < -h");
    EXPECT_NEAR(rep.violations.front().t, 0.0, 1e-15);
}

TEST(ValidateProblem, EvaluationErrorNamesTime) {
    auto p = load_problem("alpha=0.5\nT=1\nh=1\nf=u\ng=ln(t)\nphi=1\nL=1\n");
    try {
        fdde::validate_problem(p, 11);
        FAIL();
    } catch (const fdde::EvalError& e) {
        EXPECT_NE(std::string(e.what()).find("t = 0"), std::string::npos);
    }
}
