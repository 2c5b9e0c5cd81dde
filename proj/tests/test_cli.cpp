#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fdde/cli.hpp"
#include "fdde/fixtures.hpp"

using namespace fdde;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("fdde_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    cli::RunConfig solve_cfg(const std::string& problem) const {
        cli::RunConfig c;
        c.command = cli::Command::solve;
        c.problem_path = problem;
        c.out_path = path("u.csv");
        c.report_path = path("solve.txt");
        return c;
    }

    cli::RunConfig certify_cfg(const std::string& problem, const std::string& candidate) const {
        cli::RunConfig c;
        c.command = cli::Command::certify;
        c.problem_path = problem;
        c.candidate_path = candidate;
        c.out_path = path("z.csv");
        c.report_path = path("certify.txt");
        return c;
    }

    int run(const cli::RunConfig& c) {
        out_.str("");
        diag_.str("");
        return cli::run(c, out_, diag_);
    }

    // Runs the installed binary; returns its exit status.
    int shell(const std::string& args) const {
        const std::string cmd = std::string("\"") + FDDE_CLI_PATH + "\" " + args + " > \"" +
                                path("stdout.txt") + "\" 2> \"" + path("stderr.txt") + "\"";
        const int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }

    std::string problem(const char* name) const {
        return std::string(FDDE_PROBLEMS_DIR) + "/" + name;
    }

    // The discrete solution shifted by `shift` on every node.
    std::string shifted_candidate(const std::string& solution_csv, double shift) const {
        const Samples s = read_trajectory_csv(read(solution_csv));
        std::ostringstream o;
        o << "t,u\n";
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            o << format_real(s.t[i]) << ',' << format_real(s.u[i] + shift) << '\n';
        }
        return write("candidate.csv", o.str());
    }

    fs::path dir_;
    std::ostringstream out_, diag_;
};

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_F(CliTest, SolveQuadraticLag) {
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok) << diag_.str();
    const std::string csv = read(path("u.csv"));
    const Samples s = read_trajectory_csv(csv);
    EXPECT_EQ(s.t.size(), 1024u + 1024u + 1u);  // h = T, so M = N
    EXPECT_EQ(s.t.front(), -1.0);
    EXPECT_EQ(s.t.back(), 1.0);
    const std::string report = read(path("solve.txt"));
    EXPECT_NE(report.find("global Picard"), std::string::npos);
    EXPECT_NE(report.find("error bound"), std::string::npos);
}

TEST_F(CliTest, CsvRoundTripsBitExactly) {
    const Problem p = load_problem(fixtures::quadratic_lag);
    PicardConfig pc;
    pc.N = 128;
    const auto [u, rep] = picard_solve(p, pc);
    std::ostringstream csv;
    write_trajectory_csv(csv, u);
    const GridAssignment a = assign_to_grid(read_trajectory_csv(csv.str()), p.T, p.h, 7);
    EXPECT_FALSE(a.resampled);
    ASSERT_EQ(a.values.size(), u.size());
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(a.values[i], u[i]);
}

TEST_F(CliTest, SolveConstantDelayListsSteps) {
    ASSERT_EQ(run(solve_cfg(problem("constant_delay.txt"))), cli::exit_ok) << diag_.str();
    const std::string report = read(path("solve.txt"));
    EXPECT_NE(report.find("progressive contractions"), std::string::npos);
    EXPECT_NE(report.find("steps          20 of length 0.5"), std::string::npos);
    EXPECT_NE(report.find("\n20  9.5"), std::string::npos);
}

TEST_F(CliTest, OverridesApply) {
    auto c = solve_cfg(problem("quadratic_lag.txt"));
    c.N = 64;
    c.lambda_target = 0.25;
    c.tol = 1e-8;
    ASSERT_EQ(run(c), cli::exit_ok) << diag_.str();
    EXPECT_EQ(read_trajectory_csv(read(path("u.csv"))).t.size(), 129u);
    const std::string report = read(path("solve.txt"));
    EXPECT_NE(report.find("lambda         0.25"), std::string::npos);
    EXPECT_NE(report.find("tol            1e-08"), std::string::npos);
}

TEST_F(CliTest, InvalidAlphaNamesKey) {
    std::string text(fixtures::quadratic_lag);
    text.replace(text.find("alpha = 0.5"), 11, "alpha = 1.5");
    EXPECT_EQ(run(solve_cfg(write("bad.txt", text))), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("alpha"), std::string::npos);
}

TEST_F(CliTest, LagViolationNamesKey) {
    std::string text(fixtures::quadratic_lag);
    text.replace(text.find("g = t^2"), 7, "g = t+1");
    EXPECT_EQ(run(solve_cfg(write("bad.txt", text))), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("g: lag condition"), std::string::npos) << diag_.str();
}

TEST_F(CliTest, MissingFile) {
    EXPECT_EQ(run(solve_cfg(path("nope.txt"))), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("cannot open"), std::string::npos);
}

TEST_F(CliTest, BadOverride) {
    auto c = solve_cfg(problem("quadratic_lag.txt"));
    c.lambda_target = 1.5;
    EXPECT_EQ(run(c), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("numerics"), std::string::npos);
}

TEST_F(CliTest, DivergenceIsExitTwo) {
    const std::string p = write("blow.txt", "alpha = 0.5\nT = 1\nh = 0\nf = 10*u^2\ng = t\n"
                                            "phi = 1\nL = 1\n");
    EXPECT_EQ(run(solve_cfg(p)), cli::exit_not_converged);
    EXPECT_FALSE(fs::exists(path("u.csv")));
}

TEST_F(CliTest, IterationCapIsExitTwo) {
    auto c = solve_cfg(problem("quadratic_lag.txt"));
    c.max_iter = 3;
    EXPECT_EQ(run(c), cli::exit_not_converged);
    EXPECT_NE(diag_.str().find("did not converge within 3"), std::string::npos) << diag_.str();
}

TEST_F(CliTest, ReportsAreDeterministic) {
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok);
    const std::string r1 = read(path("solve.txt")), u1 = read(path("u.csv"));
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok);
    EXPECT_EQ(read(path("solve.txt")), r1);
    EXPECT_EQ(read(path("u.csv")), u1);
}

TEST_F(CliTest, CertifyExactAndShifted) {
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok);
    ASSERT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), path("u.csv"))), cli::exit_ok)
        << diag_.str();
    std::string report = read(path("certify.txt"));
    EXPECT_NE(report.find("pointwise      PASS"), std::string::npos);
    EXPECT_NE(report.find("candidate nodes used as given"), std::string::npos);

    ASSERT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), shifted_candidate(path("u.csv"), 0.01))),
              cli::exit_ok)
        << diag_.str();
    report = read(path("certify.txt"));
    EXPECT_NE(report.find("closed form    PASS"), std::string::npos);
    const std::string z = read(path("z.csv"));
    EXPECT_EQ(z.substr(0, z.find('\n')), "t,z_star,abs_diff,margin");
    EXPECT_EQ(count_lines(z), 1u + 2049u);
}

TEST_F(CliTest, CertifyResamplesForeignGrid) {
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok);
    const Samples s = read_trajectory_csv(read(path("u.csv")));
    std::ostringstream o;
    o << "t,u\n";
    for (std::size_t i = 0; i < s.t.size(); i += 3) {
        o << format_real(s.t[i]) << ',' << format_real(s.u[i]) << '\n';
    }
    o << format_real(s.t.back()) << ',' << format_real(s.u.back()) << '\n';
    ASSERT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), write("c.csv", o.str()))),
              cli::exit_ok)
        << diag_.str();
    EXPECT_NE(read(path("certify.txt")).find("resampled"), std::string::npos);
}

TEST_F(CliTest, CertifyMalformedCsv) {
    const std::string bad = write("bad.csv", "t,u\n0,1\n0.5,abc\n");
    EXPECT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), bad)), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("bad number"), std::string::npos);
    const std::string unsorted = write("uns.csv", "t,u\n0,1\n-0.5,1\n");
    EXPECT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), unsorted)), cli::exit_invalid);
    const std::string short_range = write("short.csv", "t,u\n0,1\n0.5,1\n");
    EXPECT_EQ(run(certify_cfg(problem("quadratic_lag.txt"), short_range)), cli::exit_invalid);
}

TEST_F(CliTest, CertifyInjectedCorruptionIsExitThree) {
    ASSERT_EQ(run(solve_cfg(problem("quadratic_lag.txt"))), cli::exit_ok);
    auto c = certify_cfg(problem("quadratic_lag.txt"), shifted_candidate(path("u.csv"), 0.01));
    c.certify_options.misalign_comparison = 256;
    EXPECT_EQ(run(c), cli::exit_certificate_failed);
    EXPECT_NE(read(path("certify.txt")).find("pointwise      FAIL"), std::string::npos);
}

TEST_F(CliTest, CertifyNeedsBothMode) {
    const std::string cand = write("c.csv", "t,u\n-1,1\n10,1\n");
    EXPECT_EQ(run(certify_cfg(problem("constant_delay.txt"), cand)), cli::exit_invalid);
    EXPECT_NE(diag_.str().find("lipschitz_mode"), std::string::npos);
}

TEST_F(CliTest, SelftestPasses) {
    cli::RunConfig c;
    EXPECT_EQ(run(c), cli::exit_ok);
    EXPECT_NE(out_.str().find("all 8 checks passed"), std::string::npos);
}

TEST_F(CliTest, SelftestDetectsBrokenGamma) {
    cli::RunConfig c;
    c.selftest_options.lanczos.c[2] *= 1.0 + 1e-6;
    EXPECT_EQ(run(c), cli::exit_selftest_failed);
    EXPECT_NE(out_.str().find("FAIL  gamma identities"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
    const std::string ql = problem("quadratic_lag.txt");
    EXPECT_EQ(shell("selftest"), 0);
    EXPECT_EQ(shell("solve \"" + ql + "\" --out \"" + path("u.csv") + "\" --report \"" +
                    path("r.txt") + "\" --N 128"),
              0);
    EXPECT_EQ(count_lines(read(path("u.csv"))), 1u + 257u);
    EXPECT_EQ(shell("certify \"" + ql + "\" \"" + path("u.csv") + "\" --out \"" + path("z.csv") +
                    "\" --report \"" + path("c.txt") + "\" --N 128"),
              0);
    EXPECT_EQ(shell("solve \"" + path("missing.txt") + "\" --out a --report b"), 1);
    EXPECT_EQ(shell("solve"), 1);
    EXPECT_EQ(shell("frobnicate"), 1);
    EXPECT_EQ(shell("--help"), 0);
}
