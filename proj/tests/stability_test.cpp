#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "stochmoments/moments.hpp"
#include "stochmoments/numkernel/special_numbers.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::stability {
namespace {

Rational q(long a, long b = 1) { return Rational(BigInt(a), BigInt(b)); }

std::vector<Rational> coeffs(std::initializer_list<Rational> list) { return list; }

// E[cosh(2 sqrt(d)) + 2 c^2 sinh^2(sqrt(d))/d] with d = a^2 + b^2 - c^2 for the 2x2 test
// matrices, expanded by computer algebra in powers of q1 and divided by (2 q1)^n.
TEST(UnCoeffsTest, MatchesClosedFormExpansion) {
  EXPECT_EQ(un_coeffs(1).coeffs, coeffs({q(1), q(1)}));
  EXPECT_EQ(un_coeffs(2).coeffs, coeffs({q(1, 2), q(1, 3), q(1, 2)}));
  EXPECT_EQ(un_coeffs(3).coeffs, coeffs({q(1, 6), q(-7, 180), q(-7, 180), q(1, 6)}));
  EXPECT_EQ(un_coeffs(4).coeffs, coeffs({q(1, 24), q(-17, 315), q(-23, 756), q(-17, 315), q(1, 24)}));
  EXPECT_EQ(un_coeffs(5).coeffs,
            coeffs({q(1, 120), q(-67, 3024), q(61, 2800), q(61, 2800), q(-67, 3024), q(1, 120)}));
  EXPECT_EQ(un_coeffs(6).coeffs, coeffs({q(1, 720), q(-43, 7128), q(82097, 4989600), q(1217, 118800),
                                         q(82097, 4989600), q(-43, 7128), q(1, 720)}));
}

TEST(UnCoeffsTest, RejectsDegreeZero) {
  EXPECT_THROW(un_coeffs(0), std::domain_error);
  EXPECT_THROW(un_eval(0, 1.0), std::domain_error);
}

TEST(UnCoeffsTest, Palindromic) {
  for (int n = 1; n <= 40; ++n) {
    const auto& c = un_coeffs(n).coeffs;
    ASSERT_EQ(c.size(), static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) EXPECT_EQ(c[static_cast<std::size_t>(l)], c[static_cast<std::size_t>(n - l)]);
  }
}

TEST(UnCoeffsTest, ConstantTermIsInverseFactorial) {
  for (int n = 1; n <= 30; ++n) EXPECT_EQ(un_coeffs(n).coeffs[0], Rational(1) / Rational(factorial(n)));
}

TEST(UnCoeffsTest, AgreesWithGammaPresentation) {
  const Rational q1(3, 7);
  for (int n = 1; n <= 10; ++n)
    for (const Rational& x : {q(0), q(1, 4), q(1, 2), q(1)}) {
      const Rational via_u = pow(Rational(2) * q1, static_cast<unsigned long>(n)) * un_coeffs(n)(x);
      EXPECT_EQ(via_u, phi_M(n, q1, q1 * x)) << "n=" << n << " x=" << x;
    }
}

TEST(UnCoeffsTest, FloatPipelineMatchesExact) {
  for (int n : {65, 72, 80}) {
    const auto& f = un_coeffs_float(n, 256);
    const auto& e = un_coeffs(n).coeffs;
    for (std::size_t l = 0; l < e.size(); ++l) {
      const BigFloat exact(e[l], 256);
      EXPECT_LE(abs(f[l] - exact), abs(exact) * ldexp(BigFloat(1L, 256), -250)) << n << "," << l;
    }
  }
}

TEST(UnEvalTest, Values) {
  EXPECT_EQ(un_eval(1, 1.0, 256), BigFloat(2L, 256));
  EXPECT_NEAR(un_eval(2, 1.0, 256).to_double(), 4.0 / 3.0, 1e-16);
  EXPECT_NEAR(un_eval(3, 1.0, 256).to_double(), 23.0 / 90.0, 1e-16);
  EXPECT_NEAR(un_eval(4, 0.5, 256).to_double(), un_coeffs(4)(q(1, 2)).to_double(), 1e-16);
}

TEST(UnEvalTest, SignTracksAtOne) {
  // positive for n = 1, 2 (mod 4), negative for n = 3, 0 (mod 4)
  for (int n = 5; n <= 64; ++n) {
    const int expected = (n % 4 == 1 || n % 4 == 2) ? 1 : -1;
    EXPECT_EQ(un_coeffs(n)(q(1)).sign(), expected) << "n=" << n;
  }
}

TEST(LyapunovTest, HighDegree) {
  const auto a = lyapunov_un(253, 256);
  EXPECT_EQ(a.sign, 1);
  EXPECT_NEAR(a.value.to_double(), -0.473732, 1e-6);
  const auto b = lyapunov_un(256, 256);
  EXPECT_EQ(b.sign, -1);
  EXPECT_NEAR(b.value.to_double(), -0.468831, 1e-6);
}

TEST(LyapunovTest, FirstDegree) {
  const auto a = lyapunov_un(1);
  EXPECT_EQ(a.sign, 1);
  EXPECT_NEAR(a.value.to_double(), std::log(2.0), 1e-16);
}

TEST(LyapunovTest, PrecisionIndependent) {
  const auto lo = lyapunov_un(200, 256);
  const auto hi = lyapunov_un(200, 512);
  EXPECT_LT(abs(lo.value - hi.value.rounded(256)).to_double(), 1e-60);
}

TEST(PhiETest, Values) {
  const Rational q1(3, 5), q2(1, 7);
  EXPECT_EQ(phi_E(0, q1, q2), q(1));
  EXPECT_EQ(phi_E(1, q1, q2), Rational(2) * (q1 + q2));
  EXPECT_THROW(phi_E(-1, q1, q2), std::domain_error);
}

TEST(PhiETest, PositiveAndBelowMajorant) {
  for (const Rational& q1 : {q(1, 10), q(1), q(5, 2)})
    for (const Rational& x : {q(1, 64), q(1, 2), q(1)}) {
      Rational sum;
      for (int n = 0; n <= 30; ++n) {
        const Rational v = phi_E(n, q1, q1 * x);
        EXPECT_GT(v, Rational(0));
        // (2 q1)^n V_n(x) with V_n(x) = (1 + x)^n / n!
        const Rational majorant = pow(Rational(2) * q1 * (Rational(1) + x), static_cast<unsigned long>(n)) /
                                  Rational(factorial(n));
        EXPECT_LE(v, majorant);
        sum += v;
      }
      EXPECT_LE(sum.to_double(), std::exp(2.0 * q1.to_double() * (1.0 + x.to_double())));
    }
}

TEST(EulerFactorTest, SmallNoiseLimit) {
  const auto r = euler_factor({-0.3, 1e-10, 1.0, kDefaultTerms});
  EXPECT_NEAR(r.factor.to_double(), std::exp(-0.6), 1e-9);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.diverging);
  EXPECT_TRUE(r.method_stable());
}

TEST(EulerFactorTest, BelowMajorant) {
  const auto r = euler_factor({-1.0, 0.5, 1.0, kDefaultTerms});
  EXPECT_LE(r.factor.to_double(), std::exp(-1.0));
  EXPECT_TRUE(r.true_stable);
  EXPECT_TRUE(r.converged);
}

TEST(EulerFactorTest, MatchesExactSeries) {
  // 30 terms at q1 = 1/4 leave a tail far below 1e-20.
  const Rational q1(1, 4), x(1, 2);
  Rational sum;
  for (int n = 0; n <= 30; ++n) sum += phi_E(n, q1, q1 * x);
  const auto r = euler_factor({-0.2, 0.25, 0.5, kDefaultTerms});
  EXPECT_NEAR(r.factor.to_double(), std::exp(-0.4 - 0.375) * sum.to_double(), 1e-15);
}

TEST(EulerFactorTest, AStableOnRandomParameters) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uq(1e-6, 2.0), ux(1e-6, 1.0), slack(1e-6, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double q1 = uq(rng), x = ux(rng);
    const double p = -(q1 * (1.0 + x) + slack(rng)) / 2.0;
    const auto r = euler_factor({p, q1, x, kDefaultTerms});
    EXPECT_LT(r.factor.to_double(), 1.0);
    EXPECT_LE(r.factor.to_double(), std::exp(2.0 * p + q1 * (1.0 + x)) * (1.0 + 1e-15));
  }
}

TEST(EulerFactorTest, RejectsInvalidParameters) {
  EXPECT_THROW(euler_factor({-1.0, 0.0, 1.0, 10}), std::domain_error);
  EXPECT_THROW(euler_factor({-1.0, 1.0, 1.5, 10}), std::domain_error);
  EXPECT_THROW(milstein_factor({-1.0, 1.0, -0.1, 10}), std::domain_error);
  EXPECT_THROW(milstein_factor({-1.0, 1.0, 0.5, 0}), std::domain_error);
}

TEST(MilsteinFactorTest, ScalarNoiseIsExponential) {
  for (const double p : {-2.0, -0.5, 0.1})
    for (const double q1 : {0.1, 1.0, 3.0}) {
      const auto r = milstein_factor({p, q1, 0.0, kDefaultTerms});
      const double expected = std::exp(2.0 * p + q1);
      EXPECT_NEAR(r.factor.to_double(), expected, 1e-12 * expected);
      EXPECT_TRUE(r.converged);
    }
}

TEST(MilsteinFactorTest, AgreesWithGammaRouteSum) {
  // (2q1)^n U_n(1) at q1 = 1/2 decays like 0.63^n; 60 terms leave < 1e-11.
  const Rational half(1, 2);
  Rational sum(1);
  for (int n = 1; n <= 60; ++n) sum += phi_M(n, half, half);
  const auto r = milstein_factor({-0.4, 0.5, 1.0, kDefaultTerms});
  EXPECT_NEAR(r.factor.to_double(), std::exp(-1.8) * sum.to_double(), 1e-10);
}

TEST(MilsteinFactorTest, TenStepGrowthNearSimulatedTable) {
  // 2 f^10 from y0 = (1, 1) against simulated means 51.7 (sd 26.4) and 0.128 (sd 0.0655)
  const double up = milstein_factor({-0.1, 0.5, 1.0, kDefaultTerms}).factor.to_double();
  const double down = milstein_factor({-0.4, 0.5, 1.0, kDefaultTerms}).factor.to_double();
  EXPECT_NEAR(2.0 * std::pow(up, 10), 51.7, 26.4);
  EXPECT_NEAR(2.0 * std::pow(down, 10), 0.128, 0.0655);
  EXPECT_NEAR(down, 0.75617, 1e-5);
}

TEST(MilsteinFactorTest, StabilityClassification) {
  const auto unstable = milstein_factor({-0.1, 0.5, 1.0, kDefaultTerms});
  EXPECT_FALSE(unstable.method_stable());
  const auto stable = milstein_factor({-0.6, 0.5, 1.0, kDefaultTerms});
  EXPECT_TRUE(stable.method_stable());
  EXPECT_TRUE(stable.true_stable);
}

TEST(MilsteinFactorTest, DivergesForLargeNoise) {
  const auto r = milstein_factor({-0.1, 1.0, 1.0, kDefaultTerms});
  EXPECT_TRUE(r.diverging);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(milstein_factor({-0.1, 0.5, 1.0, kDefaultTerms}).diverging);
}

TEST(MilsteinFactorTest, FlagsAreExclusiveAndConvergedFactorIsNonnegative) {
  for (const double q1 : {0.05, 0.3, 0.6, 0.9, 1.5, 3.0})
    for (const double x : {0.0, 1.0 / 64, 0.25, 0.75, 1.0})
      for (const double p : {-2.0, 0.0}) {
        const auto r = milstein_factor({p, q1, x, kDefaultTerms});
        EXPECT_FALSE(r.converged && r.diverging);
        if (r.converged) {
          EXPECT_GE(r.factor.sign(), 0);
        }
      }
}

TEST(MilsteinFactorTest, ConvergenceCertifiedOnlyInsideMajorantDisk) {
  EXPECT_TRUE(milstein_factor({-0.5, 0.25, 1.0, kDefaultTerms}).converged);
  EXPECT_TRUE(std::isinf(milstein_tail_majorant(0.6, 1.0, kDefaultTerms)));
}

TEST(MilsteinTailTest, MajorantDominatesComputedTail) {
  for (const double q1 : {0.2, 0.4})
    for (const double x : {0.3, 1.0}) {
      const int N = 12;
      double tail = 0.0;
      for (int n = N + 1; n <= 120; ++n) tail += std::abs(std::pow(2.0 * q1, n) * un_eval(n, x, 256).to_double());
      EXPECT_LE(tail, milstein_tail_majorant(q1, x, N));
    }
}

TEST(RegionTest, GridAndCsv) {
  RegionRequest req;
  req.x = 1.0;
  req.p_min = -1.0;
  req.p_max = 0.0;
  req.q_min = 0.1;
  req.q_max = 0.5;
  req.p_points = 3;
  req.q_points = 2;
  const auto grid = region_scan(req);
  ASSERT_EQ(grid.points.size(), 6u);
  EXPECT_DOUBLE_EQ(grid.points[1].p, -0.5);
  EXPECT_DOUBLE_EQ(grid.points[3].q1, 0.5);
  for (const auto& pt : grid.points) {
    const auto direct = milstein_factor({pt.p, pt.q1, pt.x, req.n_terms});
    EXPECT_EQ(pt.result.factor, direct.factor);
  }
  std::ostringstream csv;
  write_region_csv(csv, grid);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "p,q1,x,factor,converged,diverging,method_stable,true_stable");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
  }
  EXPECT_EQ(rows, 6);
  // first point: p = -1, q1 = 0.1, stable for both criteria
  EXPECT_NE(csv.str().find("\n-1,0.1,1,"), std::string::npos);
  EXPECT_NE(csv.str().find(",1,0,1,1\n"), std::string::npos);
}

TEST(RegionTest, SmallNoiseIsStableForBothMethods) {
  RegionRequest req;
  req.x = 0.5;
  req.p_min = -2.0;
  req.p_max = -0.1;
  req.q_min = 1e-8;
  req.q_max = 2e-8;
  req.p_points = 4;
  req.q_points = 2;
  for (const Method m : {Method::euler, Method::milstein}) {
    req.method = m;
    for (const auto& pt : region_scan(req).points) {
      EXPECT_TRUE(pt.result.method_stable());
      EXPECT_TRUE(pt.result.true_stable);
    }
  }
}

TEST(RegionTest, Validation) {
  RegionRequest req;
  req.q_min = 0.0;
  EXPECT_THROW(region_scan(req), std::domain_error);
  req.q_min = 0.1;
  req.p_points = 1;
  EXPECT_THROW(region_scan(req), std::domain_error);
}

}  // namespace
}  // namespace stochmoments::stability
