#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "cedl/error.hpp"
#include "cedl/special.hpp"

using namespace cedl;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// Central difference of the C library's lgamma in long double.
double digamma_oracle(double x) {
  const long double h = 1e-5L * std::max(1.0L, static_cast<long double>(x));
  const long double lx = x;
  return static_cast<double>((std::lgamma(lx + h) - std::lgamma(lx - h)) / (2.0L * h));
}

// sum_{n<N} 1/(x+n)^2 plus the Euler-Maclaurin tail.
double trigamma_oracle(double x) {
  long double s = 0.0L;
  constexpr int n_terms = 2000;
  for (int n = 0; n < n_terms; ++n) s += 1.0L / ((x + n) * static_cast<long double>(x + n));
  const long double z = x + n_terms;
  s += 1.0L / z + 1.0L / (2.0L * z * z) + 1.0L / (6.0L * z * z * z) - 1.0L / (30.0L * z * z * z * z * z);
  return static_cast<double>(s);
}

}  // namespace

TEST(LogGamma, KnownValues) {
  EXPECT_EQ(log_gamma(1.0), 0.0);
  EXPECT_EQ(log_gamma(2.0), 0.0);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-13);
  EXPECT_NEAR(log_gamma(5.0), std::log(24.0), 1e-13);
  EXPECT_NEAR(log_gamma(0.1), std::log(9.513507698668731836), 1e-12);
}

TEST(LogGamma, MatchesLibraryLgamma) {
  for (int i = 0; i < 2000; ++i) {
    const double x = 0.01 + i * 0.13;
    EXPECT_NEAR(log_gamma(x), std::lgamma(x), 1e-12 * std::max(1.0, std::abs(std::lgamma(x)))) << "x=" << x;
  }
}

TEST(LogGamma, RecurrenceOverRange) {
  for (int i = 0; i < 10000; ++i) {
    const double x = 0.1 + (100.0 - 0.1) * i / 9999.0;
    const double lhs = log_gamma(x + 1.0);
    const double rhs = log_gamma(x) + std::log(x);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs))) << "x=" << x;
  }
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-1.5), DomainError);
  EXPECT_THROW(log_gamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(log_gamma(std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Digamma, KnownValues) {
  EXPECT_NEAR(digamma(1.0), -kEulerGamma, 1e-14);
  EXPECT_NEAR(digamma(0.5), -kEulerGamma - 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(digamma(2.0), 1.0 - kEulerGamma, 1e-14);
  EXPECT_NEAR(digamma(3.0), 1.5 - kEulerGamma, 1e-14);
}

TEST(Digamma, RecurrenceOverRange) {
  for (int i = 0; i < 10000; ++i) {
    const double x = 0.1 + (100.0 - 0.1) * i / 9999.0;
    EXPECT_NEAR(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-10) << "x=" << x;
  }
}

TEST(Digamma, MatchesDerivativeOfLgamma) {
  for (double x : {0.2, 0.7, 1.3, 2.9, 5.5, 6.0, 6.01, 17.0, 250.0}) {
    EXPECT_NEAR(digamma(x), digamma_oracle(x), 1e-8) << "x=" << x;
  }
}

TEST(Trigamma, KnownValuesAndSeries) {
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-13);
  EXPECT_NEAR(trigamma(0.5), std::numbers::pi * std::numbers::pi / 2.0, 1e-12);
  for (double x : {0.1, 0.9, 3.3, 5.99, 6.0, 40.0, 1e3}) {
    EXPECT_NEAR(trigamma(x), trigamma_oracle(x), 1e-11 * std::max(1.0, trigamma(x))) << "x=" << x;
  }
}

TEST(Trigamma, Recurrence) {
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.1 + 0.1 * i;
    EXPECT_NEAR(trigamma(x), trigamma(x + 1.0) + 1.0 / (x * x), 1e-10 * std::max(1.0, trigamma(x)));
  }
}

TEST(Special, DomainErrors) {
  EXPECT_THROW(digamma(0.0), DomainError);
  EXPECT_THROW(digamma(-2.0), DomainError);
  EXPECT_THROW(trigamma(0.0), DomainError);
  EXPECT_THROW(trigamma(std::numeric_limits<double>::quiet_NaN()), DomainError);
}
