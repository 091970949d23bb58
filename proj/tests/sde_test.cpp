#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "stochmoments/numkernel/bigfloat.hpp"
#include "stochmoments/sde.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::sde {
namespace {

struct Stats {
  double sum = 0.0, sum_sq = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const {
    const double m = mean();
    return std::sqrt((sum_sq / static_cast<double>(n) - m * m) / static_cast<double>(n - 1));
  }
};

TEST(PhiloxTest, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStreamTest, ReplaysAndSeparates) {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    same_c += va == c();
    same_d += va == d();
  }
  EXPECT_LT(same_c, 3);
  EXPECT_LT(same_d, 3);
}

TEST(RandomStreamTest, UniformIsOpenAndCentred) {
  RandomStream r(1, 0);
  Stats s;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    s.add(u);
  }
  EXPECT_NEAR(s.mean(), 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000.0));
}

TEST(IncrementTest, MomentsAndErrors) {
  RandomStream r(5, 1);
  const double h = 0.25;
  Stats mean, var;
  for (int i = 0; i < 500000; ++i) {
    const Vector dw = sample_increments(r, h, 2);
    mean.add(dw(0));
    var.add(dw(1) * dw(1));
  }
  EXPECT_NEAR(mean.mean(), 0.0, 4.0 * std::sqrt(h / 500000.0));
  EXPECT_NEAR(var.mean(), h, 0.01 * h);
  EXPECT_THROW(sample_increments(r, 0.0, 2), std::domain_error);
  EXPECT_THROW(sample_levy_fourier(r, -1.0, 4, true), std::domain_error);
}

void check_structure(const NoiseDraw& d) {
  for (int i = 0; i < d.noise_count(); ++i) {
    EXPECT_EQ(d.levy(i, i), 0.0);
    for (int j = 0; j < d.noise_count(); ++j) {
      EXPECT_EQ(d.levy(i, j), -d.levy(j, i));
      if (i != j) {
        EXPECT_EQ(d.iterated(i, j), 0.5 * d.dW(i) * d.dW(j) + 0.5 * d.levy(i, j));
      }
    }
  }
}

TEST(LevyTest, StructureOnEveryDraw) {
  RandomStream r(9, 0);
  for (int i = 0; i < 50; ++i) {
    check_structure(sample_levy_subdiv(r, 0.5, 16));
    check_structure(sample_levy_subdiv(r, 0.5, 16, 3));
    check_structure(sample_levy_fourier(r, 0.5, 8, true));
    check_structure(sample_levy_fourier(r, 0.5, 8, false, 4));
  }
}

TEST(LevyTest, IteratedIntegralsSumToProduct) {
  RandomStream r(10, 0);
  const NoiseDraw d = sample_levy_subdiv(r, 0.3, 8);
  EXPECT_NEAR(d.iterated(0, 1) + d.iterated(1, 0), d.dW(0) * d.dW(1), 1e-15);
  EXPECT_NEAR(d.iterated(0, 0), 0.5 * (d.dW(0) * d.dW(0) - 0.3), 1e-15);
}

// Unit-step moments: E[A^2] = 1, E[dW1^2 A^2] = 5/3.
void check_moments(const SamplerConfig& config, int draws, double bias) {
  RandomStream r(123, static_cast<std::uint64_t>(config.kind));
  Stats area, area_sq, mixed;
  for (int i = 0; i < draws; ++i) {
    const NoiseDraw d = sample(config, r, 1.0);
    const double a = d.levy(0, 1);
    area.add(a);
    area_sq.add(a * a);
    mixed.add(d.dW(0) * d.dW(0) * a * a);
  }
  EXPECT_NEAR(area.mean(), 0.0, 4.0 * area.se());
  EXPECT_NEAR(area_sq.mean(), 1.0, 3.0 * area_sq.se() + bias);
  EXPECT_NEAR(mixed.mean(), 5.0 / 3.0, 3.0 * mixed.se() + 5.0 / 3.0 * bias);
}

TEST(LevyTest, SubdivisionMoments) {
  SamplerConfig c;
  c.kind = SamplerConfig::Kind::subdiv;
  c.substeps = 64;
  check_moments(c, 200000, 1.0 / 64);
}

TEST(LevyTest, SubdivisionSecondMomentBias) {
  // E[A^2] = h^2 (1 - 1/N) exactly for the discrete area
  RandomStream r(77, 0);
  Stats s;
  for (int i = 0; i < 400000; ++i) {
    const double a = sample_levy_subdiv(r, 1.0, 2).levy(0, 1);
    s.add(a * a);
  }
  EXPECT_NEAR(s.mean(), 0.5, 3.0 * s.se());
}

TEST(LevyTest, FourierTailCorrectedMoments) {
  SamplerConfig c;
  c.kind = SamplerConfig::Kind::fourier;
  c.terms = 4;
  c.tail_correction = true;
  check_moments(c, 300000, 0.0);
}

TEST(LevyTest, FourierWithoutTailUnderestimatesVariance) {
  RandomStream r(5, 5);
  Stats s;
  for (int i = 0; i < 100000; ++i) {
    const double a = sample_levy_fourier(r, 1.0, 1, false).levy(0, 1);
    s.add(a * a);
  }
  EXPECT_NEAR(s.mean(), 6.0 / (M_PI * M_PI), 4.0 * s.se());
}

TEST(LevyTest, ChenConcatenationMatchesFinerSampling) {
  RandomStream whole(3, 3), parts(3, 3);
  const NoiseDraw full = sample_levy_subdiv(whole, 1.0, 8);
  const NoiseDraw a = sample_levy_subdiv(parts, 0.5, 4);
  const NoiseDraw b = sample_levy_subdiv(parts, 0.5, 4);
  const NoiseDraw joined = concatenate(a, b);
  EXPECT_DOUBLE_EQ(joined.h, 1.0);
  EXPECT_NEAR((joined.dW - full.dW).norm(), 0.0, 1e-14);
  EXPECT_NEAR(joined.levy(0, 1), full.levy(0, 1), 1e-14);
  check_structure(joined);
}

TEST(LevyTest, RejectsBadConfig) {
  RandomStream r(1, 1);
  EXPECT_THROW(sample_levy_subdiv(r, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(sample_levy_fourier(r, 1.0, 0, false), std::invalid_argument);
  EXPECT_THROW(sample_levy_fourier(r, 1.0, 4, true, 3), std::invalid_argument);
}

// exp(M) by scaled Taylor series at 256 bits.
Matrix expm_oracle(const Matrix& m) {
  const auto d = static_cast<std::size_t>(m.rows());
  constexpr Precision bits = 256;
  using BigMatrix = std::vector<std::vector<BigFloat>>;
  const auto multiply = [d](const BigMatrix& a, const BigMatrix& b) {
    BigMatrix c(d, std::vector<BigFloat>(d, BigFloat(bits)));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t j = 0; j < d; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
  };
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  BigMatrix scaled(d, std::vector<BigFloat>(d, BigFloat(bits)));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      scaled[i][j] = ldexp(BigFloat(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), bits), -squarings);
  BigMatrix sum(d, std::vector<BigFloat>(d, BigFloat(bits)));
  BigMatrix term(d, std::vector<BigFloat>(d, BigFloat(bits)));
  for (std::size_t i = 0; i < d; ++i) sum[i][i] = term[i][i] = BigFloat(1L, bits);
  for (int k = 1; k <= 60; ++k) {
    term = multiply(term, scaled);
    for (auto& row : term)
      for (auto& v : row) v /= BigFloat(static_cast<long>(k), bits);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) sum[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) sum = multiply(sum, sum);
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum[i][j].to_double();
  return out;
}

TEST(ExpmTest, SimpleCases) {
  EXPECT_TRUE(expm(Matrix::Zero(2, 2)).isApprox(Matrix::Identity(2, 2)));
  EXPECT_TRUE(expm(Matrix::Zero(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 1.5;
  diag(1, 1) = -0.5;
  const Matrix e = expm(diag);
  EXPECT_NEAR(e(0, 0), std::exp(1.5), 1e-15);
  EXPECT_NEAR(e(1, 1), std::exp(-0.5), 1e-15);
  EXPECT_EQ(e(0, 1), 0.0);
  Matrix nil = Matrix::Zero(2, 2);
  nil(0, 1) = 1.0;
  Matrix expected(2, 2);
  expected << 1.0, 1.0, 0.0, 1.0;
  EXPECT_TRUE(expm(nil).isApprox(expected, 1e-15));
}

TEST(ExpmTest, RejectsNonFinite) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = std::nan("");
  EXPECT_THROW(expm(m), std::domain_error);
  Matrix big = Matrix::Zero(3, 3);
  big(2, 2) = INFINITY;
  EXPECT_THROW(expm(big), std::domain_error);
}

TEST(ExpmTest, MatchesHighPrecisionOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> size(0.01, 10.0);
  for (const int d : {2, 4}) {
    for (int trial = 0; trial < 40; ++trial) {
      Matrix m(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = entry(rng);
      m *= size(rng) / m.norm();
      const Matrix oracle = expm_oracle(m);
      EXPECT_LT((expm(m) - oracle).norm() / oracle.norm(), 1e-12) << "d=" << d << " trial=" << trial;
    }
  }
}

TEST(ExpmTest, TwoByTwoNearDegenerateSpectrum) {
  Matrix m(2, 2);
  m << 0.3, 1e-9, -1e-9, 0.3;
  const Matrix oracle = expm_oracle(m);
  EXPECT_LT((expm(m) - oracle).norm() / oracle.norm(), 1e-14);
}

TEST(SystemTest, TrueStability) {
  EXPECT_TRUE(ms_stable_true({-1.0, 1.0, 0.5}));
  EXPECT_FALSE(ms_stable_true({-0.01, 3.0, 3.0}));
  EXPECT_TRUE(ms_stable_true({-0.25, 0.5, 0.4}));
  EXPECT_THROW(ms_stable_true({0.0, 1.0, 1.0}), std::domain_error);
}

TEST(SystemTest, Validation) {
  SemilinearSystem s = test_system({-1.0, 1.0, 1.0});
  EXPECT_NO_THROW(s.validate());
  s.F.push_back(Matrix::Zero(3, 3));
  EXPECT_THROW(s.validate(), std::invalid_argument);
  SemilinearSystem t = test_system({-1.0, 1.0, 1.0});
  t.g = {[](const Vector& y) { return y; }};
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

NoiseDraw fixed_draw(double h, double w1, double w2, double a) {
  NoiseDraw d;
  d.h = h;
  d.dW = Vector(2);
  d.dW << w1, w2;
  d.levy = Matrix::Zero(2, 2);
  d.levy(0, 1) = a;
  d.levy(1, 0) = -a;
  return d;
}

TEST(OmegaTest, Cases) {
  SemilinearSystem quiet;
  quiet.F0 = Matrix::Identity(2, 2) * -0.7;
  NoiseDraw none;
  none.h = 0.1;
  none.dW = Vector(0);
  none.levy = Matrix(0, 0);
  EXPECT_TRUE(omega(quiet, none, 2).isApprox(quiet.F0 * 0.1));

  SemilinearSystem commuting;
  commuting.F0 = Matrix::Identity(2, 2);
  Matrix f(2, 2);
  f << 1.0, 2.0, 0.0, 3.0;
  commuting.F = {f, 2.5 * f};
  const NoiseDraw d = fixed_draw(0.2, 0.3, -0.4, 0.9);
  EXPECT_TRUE(omega(commuting, d, 2).isApprox(omega(commuting, d, 1)));

  const double s1 = 0.8, s2 = 1.3, a = 0.37;
  const SemilinearSystem ts = test_system({-1.0, s1, s2});
  const NoiseDraw area_only = fixed_draw(0.5, 0.0, 0.0, a);
  Matrix G(2, 2);
  G << 0.0, -s1 * s2, s1 * s2, 0.0;
  EXPECT_TRUE((omega(ts, area_only, 2) - omega(ts, area_only, 1)).isApprox(G * a, 1e-15));
  EXPECT_THROW(omega(ts, area_only, 3), std::invalid_argument);
  EXPECT_THROW(omega(ts, none, 1), std::invalid_argument);
}

TEST(StepperTest, DeterministicAndZeroNoise) {
  SemilinearSystem quiet;
  quiet.F0 = Matrix(2, 2);
  quiet.F0 << -1.0, 0.5, 0.2, -0.3;
  NoiseDraw none;
  none.h = 0.1;
  none.dW = Vector(0);
  none.levy = Matrix(0, 0);
  Vector y(2);
  y << 1.0, -2.0;
  EXPECT_TRUE(magnus_euler_step(quiet, y, none).isApprox(expm(quiet.F0 * 0.1) * y, 1e-15));
  EXPECT_TRUE(classical_milstein_step(quiet, y, none).isApprox(y + quiet.F0 * y * 0.1, 1e-15));

  const SemilinearSystem ts = test_system({-0.5, 0.7, 0.4});
  const NoiseDraw still = fixed_draw(0.25, 0.0, 0.0, 0.0);
  const double rate = -0.5 - 0.5 * (0.49 + 0.16);
  EXPECT_TRUE(magnus_euler_step(ts, y, still).isApprox(std::exp(rate * 0.25) * y, 1e-15));
  EXPECT_TRUE(magnus_milstein_step(ts, y, still).isApprox(magnus_euler_step(ts, y, still), 1e-15));
}

TEST(StepperTest, CommutativeNoiseMilsteinEqualsEuler) {
  SemilinearSystem s;
  s.F0 = Matrix::Identity(2, 2) * -0.4;
  Matrix f(2, 2);
  f << 0.3, 0.1, 0.1, -0.2;
  s.F = {f, -1.7 * f};
  RandomStream r(8, 8);
  Vector y(2);
  y << 0.5, 1.5;
  for (int i = 0; i < 20; ++i) {
    const NoiseDraw d = sample_levy_fourier(r, 0.1, 8, true);
    EXPECT_TRUE(magnus_milstein_step(s, y, d).isApprox(magnus_euler_step(s, y, d), 1e-14));
  }
}

TEST(StepperTest, DiagonalNoiseClassicalMilsteinIsScalarFormula) {
  SemilinearSystem s;
  s.F0 = Matrix::Zero(2, 2);
  s.F0.diagonal() << -0.3, 0.2;
  Matrix f = Matrix::Zero(2, 2);
  f.diagonal() << 0.6, -0.9;
  s.F = {f};
  NoiseDraw d;
  d.h = 0.05;
  d.dW = Vector::Constant(1, 0.17);
  d.levy = Matrix::Zero(1, 1);
  Vector y(2);
  y << 1.2, -0.4;
  const Vector out = classical_milstein_step(s, y, d);
  for (int k = 0; k < 2; ++k) {
    const double a = s.F0(k, k), b = f(k, k), w = 0.17;
    EXPECT_NEAR(out(k), y(k) * (1.0 + a * 0.05 + b * w + 0.5 * b * b * (w * w - 0.05)), 1e-15);
  }
}

TEST(StepperTest, FixedSizeTestSystemMatchesGeneric) {
  const TestSdeParams params{-0.25, 0.5, 0.4};
  const SemilinearSystem generic = test_system(params);
  const TestSystem2 fast(params);
  RandomStream r(4, 4);
  Vector y(2);
  y << 1.0, 1.0;
  for (int i = 0; i < 20; ++i) {
    const NoiseDraw d = sample_levy_fourier(r, 0.125, 8, true);
    const Eigen::Vector2d y2 = y;
    EXPECT_TRUE(Vector(fast.magnus_euler(y2, d.h, d.dW(0), d.dW(1))).isApprox(magnus_euler_step(generic, y, d), 1e-14));
    EXPECT_TRUE(Vector(fast.magnus_milstein(y2, d.h, d.dW(0), d.dW(1), d.levy(0, 1)))
                    .isApprox(magnus_milstein_step(generic, y, d), 1e-14));
    EXPECT_TRUE(Vector(fast.classical_milstein(y2, d.h, d.dW(0), d.dW(1), d.levy(0, 1)))
                    .isApprox(classical_milstein_step(generic, y, d), 1e-14));
  }
}

TEST(StepperTest, OneStepSecondMomentMatchesAmplificationFactor) {
  // lambda = p/h, sigma_i^2 = q_i/h with h = 1/2, q1 = 0.3, x = 0.5, p = -0.2
  const double h = 0.5, q1 = 0.3, x = 0.5, p = -0.2;
  const TestSystem2 sys({p / h, std::sqrt(q1 / h), std::sqrt(x * q1 / h)});
  RandomStream r(31, 0);
  const Eigen::Vector2d y0(1.0, 1.0);
  Stats s;
  for (int i = 0; i < 200000; ++i) {
    const NoiseDraw d = sample_levy_fourier(r, h, 32, true);
    s.add(sys.magnus_milstein(y0, h, d.dW(0), d.dW(1), d.levy(0, 1)).squaredNorm() / 2.0);
  }
  const double factor = stability::milstein_factor({p, q1, x, 256}).factor.to_double();
  EXPECT_NEAR(s.mean(), factor, 3.0 * s.se());
}

TEST(JacobianTest, FiniteDifferencesMatchAnalytic) {
  SemilinearSystem s = test_system({-1.0, 1.0, 1.0});
  const auto g1 = [](const Vector& y) {
    Vector out(2);
    out << std::sin(y(1)), y(0) * y(1);
    return out;
  };
  s.g = {[](const Vector& y) { return Vector(-y); }, g1, g1};
  Vector y(2);
  y << 0.4, -1.1;
  Matrix analytic(2, 2);
  analytic << 0.0, std::cos(y(1)), y(1), y(0);
  EXPECT_LT((jacobian(s, 1, y) - analytic).norm(), 1e-9);
  s.jac = {[&](const Vector&) { return analytic; }, nullptr};
  EXPECT_EQ(jacobian(s, 1, y), analytic);
  EXPECT_LT((jacobian(s, 2, y) - analytic).norm(), 1e-9);
  EXPECT_THROW(jacobian(s, 3, y), std::invalid_argument);
}

// Nonlinear noncommutative system; strong errors against a fine classical Milstein
// reference on the same Brownian path.
SemilinearSystem nonlinear_system() {
  SemilinearSystem s;
  s.F0 = Matrix(2, 2);
  s.F0 << -1.0, 0.3, -0.2, -0.8;
  Matrix f1(2, 2), f2(2, 2);
  f1 << 0.4, 0.0, 0.0, -0.4;
  f2 << 0.0, 0.3, 0.3, 0.0;
  s.F = {f1, f2};
  s.g = {[](const Vector& y) {
           Vector o(2);
           o << std::sin(y(1)), -0.5 * y(0) * y(0);
           return o;
         },
         [](const Vector& y) {
           Vector o(2);
           o << 0.5 * std::cos(y(1)), 0.3 * std::sin(y(0));
           return o;
         },
         [](const Vector& y) {
           Vector o(2);
           o << 0.4 * y(1) * y(1) / (1.0 + y(1) * y(1)), 0.5 * std::sin(y(0) + y(1));
           return o;
         }};
  return s;
}

TEST(StrongOrderTest, MagnusMilsteinIsFirstOrderOnNonlinearSystem) {
  const SemilinearSystem sys = nonlinear_system();
  const int fine_exp = 9;
  const int fine_steps = 1 << fine_exp;
  const double fine_h = 1.0 / fine_steps;
  const std::vector<int> coarse_exps{3, 4, 5, 6};
  std::vector<double> err_euler(coarse_exps.size(), 0.0), err_milstein(coarse_exps.size(), 0.0);
  const int paths = 200;
  for (int path = 0; path < paths; ++path) {
    RandomStream r(99, static_cast<std::uint64_t>(path));
    std::vector<NoiseDraw> fine;
    fine.reserve(fine_steps);
    for (int i = 0; i < fine_steps; ++i) fine.push_back(sample_levy_subdiv(r, fine_h, 8));
    Vector ref(2);
    ref << 0.8, -0.6;
    const Vector y0 = ref;
    for (const auto& d : fine) ref = classical_milstein_step(sys, ref, d);
    for (std::size_t c = 0; c < coarse_exps.size(); ++c) {
      const int ratio = 1 << (fine_exp - coarse_exps[c]);
      Vector ye = y0, ym = y0;
      for (int i = 0; i < fine_steps; i += ratio) {
        NoiseDraw d = fine[static_cast<std::size_t>(i)];
        for (int k = 1; k < ratio; ++k) d = concatenate(d, fine[static_cast<std::size_t>(i + k)]);
        ye = magnus_euler_step(sys, ye, d);
        ym = magnus_milstein_step(sys, ym, d);
      }
      err_euler[c] += (ye - ref).squaredNorm() / paths;
      err_milstein[c] += (ym - ref).squaredNorm() / paths;
    }
  }
  const auto slope = [&](const std::vector<double>& e) {
    return (std::log2(e.front()) - std::log2(e.back())) / static_cast<double>(coarse_exps.back() - coarse_exps.front());
  };
  // mean-square error ~ h^{2 order}
  EXPECT_NEAR(slope(err_milstein), 2.0, 0.35);
  EXPECT_NEAR(slope(err_euler), 1.0, 0.35);
}

}  // namespace
}  // namespace stochmoments::sde
