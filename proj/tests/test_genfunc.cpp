#include <gtest/gtest.h>

#include <abundancy/abundancy.hpp>
#include <abundancy/genfunc.hpp>
#include <abundancy/perm_oracle.hpp>

#include "oracles.hpp"

using namespace abundancy;

TEST(SeriesL, WorkedValues) {
  const auto l2 = series_L(2, 10);
  EXPECT_EQ(l2[5], 2);  // l_6
  for (unsigned ell = 1; ell <= 5; ++ell) EXPECT_EQ(series_L(ell, 1)[0], 1);
  EXPECT_EQ(series_L(3, 4)[3], ExactRational(35, 4));
  EXPECT_THROW(series_L(2, 0), std::invalid_argument);
}

TEST(ExpSeries, WorkedValues) {
  const auto g = exp_series(2, 10);
  ATable r3{2, 3, {0, 8, 9, 1}};
  EXPECT_EQ(g.a_row(3), r3);
  for (unsigned ell = 1; ell <= 4; ++ell) EXPECT_EQ(exp_series(ell, 3).evaluate(0, ExactRational(7, 3)), 1);
  EXPECT_EQ(g.evaluate(10, 1), 42);
  EXPECT_EQ(g.coefficient(3, 2), ExactRational(9, 6));
  EXPECT_EQ(g.coefficient(3, 7), 0);
  EXPECT_THROW(g.coefficient(11, 1), std::out_of_range);
}

TEST(ExpSeries, MatchesBruteForce) {
  const auto g2 = exp_series(2, 6);
  for (std::uint32_t n = 1; n <= 6; ++n) EXPECT_EQ(g2.a_row(n), enumerate_A(2, n)) << n;
  const auto g3 = exp_series(3, 5);
  for (std::uint32_t n = 1; n <= 5; ++n) EXPECT_EQ(g3.a_row(n), enumerate_A(3, n)) << n;
}

TEST(ExpSeries, MatchesBellTransformToSixty) {
  for (unsigned ell : {2u, 3u}) {
    const auto g = exp_series(ell, 60);
    for (std::uint32_t n : {1u, 7u, 20u, 33u, 60u}) EXPECT_EQ(g.a_row(n), bell_transform(ell, n, one_orbit_row(ell, n))) << n;
  }
}

TEST(ExpSeries, IntegralNonNegativeAndConsistent) {
  for (unsigned ell : {2u, 3u}) {
    const auto g = exp_series(ell, 60);
    for (std::uint32_t n = 1; n <= 60; ++n) {
      EXPECT_EQ(g.scaled_coefficient(n, 0), 0);
      EXPECT_EQ(g.scaled_coefficient(n, n), 1);
      EXPECT_EQ(g.scaled_coefficient(n, 1), factorial(n - 1) * b_via_multiplicativity(ell, n));
      for (std::uint32_t k = 0; k <= n; ++k) EXPECT_GE(g.scaled_coefficient(n, k), 0);
    }
  }
}

TEST(ExpSeries, EllOneIsStirlingFirstKind) {
  // H_{1,n}(x) = x(x+1)...(x+n-1)/n!
  const auto g = exp_series(1, 12);
  for (std::uint32_t n = 1; n <= 12; ++n) {
    ExactRational rising = 1;
    for (std::uint32_t i = 0; i < n; ++i) rising *= ExactRational(3, 2) + i;
    EXPECT_EQ(g.evaluate(n, ExactRational(3, 2)), rising / factorial(n));
  }
}

TEST(Partitions, WorkedValues) {
  const auto p = partition_numbers(100);
  EXPECT_EQ(p[0], 1);
  EXPECT_EQ(p[1], 1);
  EXPECT_EQ(p[10], 42);
  EXPECT_EQ(p[100], 190569292);
}

TEST(Partitions, MatchDpAndGeneratingFunction) {
  const auto p = partition_numbers(200);
  EXPECT_EQ(p, oracle::partitions_dp(200));
  const auto h = series_values(2, 200, 1);
  for (std::uint32_t n = 0; n <= 200; ++n) EXPECT_EQ(h[n], ExactRational(p[n])) << n;
}

TEST(SeriesValues, AgreesWithPolynomialEvaluation) {
  const auto g = exp_series(3, 25);
  for (auto x : {ExactRational(2), ExactRational(-1, 3), ExactRational(5, 7)}) {
    const auto v = series_values(3, 25, x);
    for (std::uint32_t n = 0; n <= 25; ++n) EXPECT_EQ(v[n], g.evaluate(n, x));
  }
}

TEST(Cauchy, ReferenceCase) {
  const auto c = cauchy_check(2, 5, 2, 0.3, 2048);
  EXPECT_LE(c.abs_err, 1e-8);
  EXPECT_DOUBLE_EQ(c.exact, 3.75);
}

TEST(Cauchy, KZeroSelectsConstantTerm) {
  for (std::uint32_t n : {1u, 3u, 6u}) EXPECT_LE(cauchy_check(3, n, 0, 0.4, 256).abs_err, 1e-12);
}

TEST(Cauchy, RefinementIsMonotoneWithinFactorTwo) {
  // err(2M) <= 2 err(M), with a floor at a few ulps of the exact value.
  auto floor_err = [](const CauchyCheck& c) { return std::max(c.abs_err, 8 * std::numeric_limits<double>::epsilon() * c.exact); };
  for (std::uint32_t M0 : {8u, 16u, 1024u}) {
    const auto e1 = cauchy_check(2, 8, 3, 0.5, M0);
    const auto e2 = cauchy_check(2, 8, 3, 0.5, 2 * M0);
    const auto e4 = cauchy_check(2, 8, 3, 0.5, 4 * M0);
    EXPECT_LE(e2.abs_err, 2 * floor_err(e1)) << M0;
    EXPECT_LE(e4.abs_err, 2 * floor_err(e2)) << M0;
  }
  // Before rounding takes over, doubling M cuts the aliasing error sharply.
  const double a = cauchy_check(2, 8, 3, 0.5, 12).abs_err;
  const double b = cauchy_check(2, 8, 3, 0.5, 24).abs_err;
  EXPECT_GT(a, 1e-6);
  EXPECT_LT(b, a / 4);
}

TEST(Cauchy, MatchesExactAcrossEll) {
  for (unsigned ell : {1u, 2u, 3u, 4u})
    for (std::uint32_t k = 1; k <= 4; ++k) {
      const auto c = cauchy_check(ell, 7, k, 0.35, 2048);
      EXPECT_LE(c.abs_err, 1e-9 * std::max(1.0, c.exact)) << ell << ' ' << k;
    }
}

TEST(Cauchy, RejectsBadRadius) {
  EXPECT_THROW(cauchy_check(2, 5, 2, 1.0, 64), std::invalid_argument);
  EXPECT_THROW(cauchy_check(2, 5, 2, 0.0, 64), std::invalid_argument);
  EXPECT_THROW(cauchy_check(2, 5, 2, 0.3, 0), std::invalid_argument);
}

TEST(HardyRamanujan, RatioTendsToOne) {
  const double r100 = hr_ratio(100, 1);
  EXPECT_GT(r100, 0.9);
  EXPECT_LT(r100, 1.1);
  const double r200 = hr_ratio(200, 1), r400 = hr_ratio(400, 1);
  EXPECT_LT(std::fabs(r200 - 1), std::fabs(r100 - 1));
  EXPECT_LT(std::fabs(r400 - 1), std::fabs(r200 - 1));
}

TEST(HardyRamanujan, RatioAtXTwoDriftsTowardOne) {
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint32_t n : {50u, 100u, 200u, 400u}) {
    const double r = hr_ratio(n, 2);
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_GT(r, 0);
    EXPECT_LT(std::fabs(r - 1), prev) << n;
    prev = std::fabs(r - 1);
  }
}

TEST(HardyRamanujan, LeadingTermAtXOneIsClassical) {
  // x = 1 reduces to exp(pi sqrt(2n/3)) / (4 n sqrt 3).
  const std::uint32_t n = 300;
  const auto p = partition_numbers(n);
  const double classical = std::exp(oracle::kPi * std::sqrt(2.0 * n / 3)) / (4 * n * std::sqrt(3.0));
  EXPECT_NEAR(hr_ratio(n, 1), to_double(ExactRational(p[n])) / classical, 1e-9);
}
