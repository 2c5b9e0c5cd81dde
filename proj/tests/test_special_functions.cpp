#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fdde/special_functions.hpp"

namespace {

// Reference values computed with mpmath at 40 digits.
constexpr double gamma_0_3 = 2.9915689876875906283;
constexpr double gamma_0_1 = 9.5135076986687318363;
constexpr double gamma_1_5 = 0.88622692545275801365;
constexpr double gamma_2_5 = 1.3293403881791370205;
constexpr double gamma_3_5 = 3.3233509704478425512;
constexpr double gamma_10_5 = 1133278.3889487855673;
constexpr double gamma_171_5 = 9.4833675668247993363e+307;
constexpr double ml_half_m1 = 0.42758357615580700441;   // e·erfc(1)
constexpr double ml_half_2 = 108.94090438997797241;     // e^4·erfc(-2)
constexpr double ml_half_m5 = 0.11070463773306862637;
constexpr double ml_08_m2 = 0.1897966923637056596;
constexpr double ml_03_1 = 8.0406755969670580104;
constexpr double ml_15_m1 = 0.39662936531808808449;
constexpr double ml_075_05 = 1.7937773945015026827;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Gamma, IntegerAndHalfIntegerValues) {
    EXPECT_DOUBLE_EQ(fdde::gamma(1.0), 1.0);
    EXPECT_LE(rel(fdde::gamma(0.5), std::sqrt(std::numbers::pi)), 1e-14);
    EXPECT_LE(rel(fdde::gamma(4.0), 6.0), 1e-14);
    EXPECT_LE(rel(fdde::gamma(1.5), gamma_1_5), 1e-14);
    EXPECT_LE(rel(fdde::gamma(2.5), gamma_2_5), 1e-14);
    EXPECT_LE(rel(fdde::gamma(3.5), gamma_3_5), 1e-14);
}

TEST(Gamma, ReferenceValues) {
    EXPECT_LE(rel(fdde::gamma(0.3), gamma_0_3), 1e-13);
    EXPECT_LE(rel(fdde::gamma(0.1), gamma_0_1), 1e-13);
    EXPECT_LE(rel(fdde::gamma(10.5), gamma_10_5), 1e-13);
    EXPECT_LE(rel(fdde::gamma(171.5), gamma_171_5), 1e-12);
}

TEST(Gamma, RecurrenceOnTenthGrid) {
    for (int i = 1; i <= 50; ++i) {
        const double x = 0.1 * i;
        const double g1 = fdde::gamma(x + 1.0);
        EXPECT_LE(std::abs(g1 - x * fdde::gamma(x)), 1e-10 * g1) << "x = " << x;
    }
}

TEST(Gamma, MatchesStdTgammaUpTo30) {
    for (double x = 0.05; x <= 30.0; x += 0.37) {
        EXPECT_LE(rel(fdde::gamma(x), std::tgamma(x)), 1e-12) << "x = " << x;
    }
}

TEST(Gamma, RejectsNonPositiveAndNonFinite) {
    EXPECT_THROW(fdde::gamma(0.0), fdde::DomainError);
    EXPECT_THROW(fdde::gamma(-1.5), fdde::DomainError);
    EXPECT_THROW(fdde::gamma(std::nan("")), fdde::DomainError);
    EXPECT_THROW(fdde::gamma(INFINITY), fdde::DomainError);
    EXPECT_THROW(fdde::log_gamma(0.0), fdde::DomainError);
}

TEST(Gamma, LogGamma) {
    EXPECT_NEAR(fdde::log_gamma(0.001), 6.9071788853838536825, 1e-12);
    EXPECT_LE(rel(fdde::log_gamma(200.5), 860.58220350978249194), 1e-14);
    EXPECT_LE(rel(fdde::log_gamma(1000.0), 5905.2204232091812118), 1e-14);
}

TEST(Gamma, WrongCoefficientIsDetectable) {
    fdde::LanczosTable broken = fdde::default_lanczos;
    broken.c[3] *= 1.001;
    EXPECT_GT(rel(fdde::gamma(0.5, broken), std::sqrt(std::numbers::pi)), 1e-9);
}

TEST(MittagLeffler, ZeroArgumentIsExactlyOne) {
    for (double a : {0.1, 0.5, 1.0, 1.9}) EXPECT_EQ(fdde::mittag_leffler(a, 0.0), 1.0);
}

TEST(MittagLeffler, OrderOneIsExponential) {
    for (double z = -5.0; z <= 5.0; z += 0.25) {
        EXPECT_LE(rel(fdde::mittag_leffler(1.0, z), std::exp(z)), 1e-9) << "z = " << z;
    }
    EXPECT_LE(rel(fdde::mittag_leffler(1.0, 1.0), 2.718281828459045), 1e-15);
}

TEST(MittagLeffler, ReferenceValues) {
    EXPECT_LE(rel(fdde::mittag_leffler(0.5, -1.0), ml_half_m1), 1e-14);
    EXPECT_LE(rel(fdde::mittag_leffler(0.5, 2.0), ml_half_2), 1e-14);
    EXPECT_LE(rel(fdde::mittag_leffler(0.8, -2.0), ml_08_m2), 1e-12);
    EXPECT_LE(rel(fdde::mittag_leffler(0.3, 1.0), ml_03_1), 1e-14);
    EXPECT_LE(rel(fdde::mittag_leffler(1.5, -1.0), ml_15_m1), 1e-14);
    EXPECT_LE(rel(fdde::mittag_leffler(0.75, 0.5), ml_075_05), 1e-14);
}

TEST(MittagLeffler, CancellationLimitsAccuracyForNegativeArguments) {
    // terms reach ~1e10 before cancelling down to 0.11
    EXPECT_LE(rel(fdde::mittag_leffler(0.5, -5.0), ml_half_m5), 1e-4);
}

TEST(MittagLeffler, HalfOrderErfcIdentity) {
    for (double z : {-1.5, -0.5, 0.25, 1.0}) {
        const double expected = std::exp(z * z) * std::erfc(-z);
        EXPECT_LE(rel(fdde::mittag_leffler(0.5, z), expected), 1e-12) << "z = " << z;
    }
}

TEST(MittagLeffler, Errors) {
    EXPECT_THROW(fdde::mittag_leffler(0.0, 1.0), fdde::DomainError);
    EXPECT_THROW(fdde::mittag_leffler(2.0, 1.0), fdde::DomainError);
    EXPECT_THROW(fdde::mittag_leffler(0.5, INFINITY), fdde::DomainError);
    fdde::SpecialFnConfig few;
    few.ml_max_terms = 3;
    EXPECT_THROW(fdde::mittag_leffler(0.5, 2.0, few), fdde::ConvergenceError);
}
