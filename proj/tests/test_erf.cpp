#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "csl/erf.hpp"

namespace {

// Maclaurin series in long double: erf x = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1)).
long double erf_series(long double x) {
    long double term = x;  // (-1)^n x^(2n+1) / n!
    long double sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= -x * x / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
    }
    return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

}  // namespace

TEST(erf, frozen_values) {
    EXPECT_EQ(csl::erf(0.0), 0.0);
    EXPECT_NEAR(csl::erf(1.0), 0.8427007929497149, 2e-16);
    EXPECT_NEAR(csl::erf(0.5), 0.5204998778130465, 2e-16);
    EXPECT_NEAR(csl::erf(2.0), 0.9953222650189527, 2e-16);
    EXPECT_NEAR(csl::erf(-3.7), -0.9999998328489421, 2e-16);
    EXPECT_NEAR(csl::erfc(3.0) / 2.209049699858544e-05, 1.0, 1e-14);
    EXPECT_NEAR(csl::erfc(5.0) / 1.537459794428035e-12, 1.0, 1e-14);
}

TEST(erf, saturates) {
    EXPECT_NEAR(csl::erf(10.0), 1.0, 1e-15);
    EXPECT_NEAR(csl::erf(-10.0), -1.0, 1e-15);
    EXPECT_EQ(csl::erfc(40.0), 0.0);
}

TEST(erf, matches_series_oracle) {
    // series cancellation stays harmless in long double up to |x| ~ 3
    for (double x = -3.0; x <= 3.0; x += 0.01) {
        const double want = static_cast<double>(erf_series(x));
        EXPECT_NEAR(csl::erf(x), want, 1e-15) << "x = " << x;
    }
}

TEST(erf, absolute_error_against_libm) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> pick(-6.0, 6.0);
    for (int i = 0; i < 20000; ++i) {
        const double x = pick(gen);
        ASSERT_NEAR(csl::erf(x), std::erf(x), 1e-12) << "x = " << x;
    }
}

TEST(erf, erfc_relative_error_in_tail) {
    for (double x = 0.5; x < 26.0; x += 0.137) {
        EXPECT_NEAR(csl::erfc(x) / std::erfc(x), 1.0, 1e-13) << "x = " << x;
    }
}

TEST(erf, odd_bounded_monotone) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> pick(-8.0, 8.0);
    for (int i = 0; i < 5000; ++i) {
        const double x = pick(gen);
        const double y = pick(gen);
        EXPECT_EQ(csl::erf(-x), -csl::erf(x));
        EXPECT_LE(std::abs(csl::erf(x)), 1.0);
        if (x < y) {
            EXPECT_LE(csl::erf(x), csl::erf(y));
        }
        EXPECT_NEAR(csl::erf(x) + csl::erfc(x), 1.0, 4e-16);
    }
}
