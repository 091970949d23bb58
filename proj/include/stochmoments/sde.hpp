#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <boost/random/normal_distribution.hpp>

/// Magnus-type Euler and Milstein integrators for semilinear SDEs
///   dy = (F0 y + g0(y)) dt + sum_j (Fj y + gj(y)) dWj,
/// Levy-area sampling and the two-noise linear test system.
///
/// Iterated integrals follow I(i, j) = int (Wi(s) - Wi(t)) dWj(s), so
/// I(i, j) = dWi dWj / 2 + A(i, j) / 2 for i != j and I(i, i) = (dWi^2 - h) / 2.
namespace stochmoments::sde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Philox4x32-10 block function.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter counter, Key key);
};

/// Counter-based stream: key = seed, counter words 2-3 = stream id, words 0-1 =
/// block index. Distinct (seed, stream) pairs give independent sequences; the
/// same pair always replays the same sequence. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (ziggurat).
  double normal() { return normal_(*this); }

 private:
  void refill();

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  unsigned used_ = 4;
  boost::random::normal_distribution<double> normal_;
};

/// Increments and Levy areas for one step of length h.
struct NoiseDraw {
  double h = 0.0;
  Vector dW;     ///< m increments
  Matrix levy;   ///< m x m, antisymmetric: A(i, j) = I(i, j) - I(j, i)

  int noise_count() const { return static_cast<int>(dW.size()); }
  /// Iterated Ito integral I(i, j).
  double iterated(int i, int j) const;
};

/// m independent N(0, h) draws. Throws std::domain_error for h <= 0.
Vector sample_increments(RandomStream& rng, double h, int m);

/// Brownian paths on `substeps` uniform sub-intervals with the discrete Levy
/// area sum_i [(W1(t_i) - W1(t)) dW2_i - (W2(t_i) - W2(t)) dW1_i] for every pair.
NoiseDraw sample_levy_subdiv(RandomStream& rng, double h, int substeps, int m = 2);

/// Truncated Fourier (Kloeden-Platen-Wright) Levy area with `terms` harmonics.
/// With tail_correction (m = 2 only) the omitted harmonics are replaced by a
/// conditionally Gaussian term so that E[A^2] = h^2 exactly.
NoiseDraw sample_levy_fourier(RandomStream& rng, double h, int terms, bool tail_correction, int m = 2);

/// Chen's relation: the draw over [t, t + h1 + h2] from consecutive draws.
NoiseDraw concatenate(const NoiseDraw& first, const NoiseDraw& second);

struct SamplerConfig {
  enum class Kind { subdiv, fourier };
  Kind kind = Kind::fourier;
  int substeps = 1024;
  int terms = 16;
  bool tail_correction = true;

  /// Throws std::invalid_argument for substeps or terms < 1.
  void validate() const;
};

NoiseDraw sample(const SamplerConfig& config, RandomStream& rng, double h, int m = 2);

/// Matrix exponential. 2 x 2 inputs use a closed form, larger ones Pade
/// scaling and squaring. Throws std::domain_error on non-finite entries.
Matrix expm(const Matrix& m);
Eigen::Matrix2d expm2(const Eigen::Matrix2d& m);

using VectorField = std::function<Vector(const Vector&)>;
using JacobianField = std::function<Matrix(const Vector&)>;

struct SemilinearSystem {
  Matrix F0;
  std::vector<Matrix> F;            ///< F1..Fm
  std::vector<VectorField> g;       ///< empty (linear) or g0..gm
  std::vector<JacobianField> jac;   ///< empty or g1'..gm'; an empty entry means finite differences

  int dimension() const { return static_cast<int>(F0.rows()); }
  int noise_count() const { return static_cast<int>(F.size()); }
  bool linear() const { return g.empty(); }

  /// Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
};

struct TestSdeParams {
  double lambda = -1.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;

  /// Throws std::domain_error when any parameter is zero.
  void validate() const;
};

/// F0 = lambda I, F1 = diag(sigma1, -sigma1), F2 = [[0, sigma2], [sigma2, 0]].
SemilinearSystem test_system(const TestSdeParams& params);

/// 2 lambda + sigma1^2 + sigma2^2 < 0.
bool ms_stable_true(const TestSdeParams& params);

/// order 1: (F0 - sum Fj^2 / 2) h + sum Fj dWj; order 2 adds
/// -1/2 sum_{i<j} [Fi, Fj] A(i, j). Throws std::invalid_argument on a shape
/// mismatch or an order other than 1, 2.
Matrix omega(const SemilinearSystem& system, const NoiseDraw& draw, int order);

/// Jacobian of gj (1 <= j <= m): the supplied one, else central differences
/// with step cbrt(eps) max(1, |y|).
Matrix jacobian(const SemilinearSystem& system, int j, const Vector& y);

Vector magnus_euler_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw);

/// exp(Omega2) {y + g~0 h + sum gj dWj + sum_{i,j} H(i, j) I(i, j)} with
/// H(i, j) = gj'(y) (Fi y + gi) - Fi gj.
Vector magnus_milstein_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw);

/// y + a h + sum bj dWj + sum_{i,j} bj'(y) bi(y) I(i, j), with a = F0 y + g0 and bj = Fj y + gj.
Vector classical_milstein_step(const SemilinearSystem& system, const Vector& y, const NoiseDraw& draw);

/// Fixed-size form of the linear test system for hot loops.
struct TestSystem2 {
  Eigen::Matrix2d F0, F1, F2, G;  ///< G = -[F1, F2] / 2
  Eigen::Matrix2d drift_corrected;  ///< F0 - (F1^2 + F2^2) / 2

  explicit TestSystem2(const TestSdeParams& params);

  Eigen::Vector2d magnus_euler(const Eigen::Vector2d& y, double h, double dw1, double dw2) const;
  Eigen::Vector2d magnus_milstein(const Eigen::Vector2d& y, double h, double dw1, double dw2, double area) const;
  Eigen::Vector2d classical_milstein(const Eigen::Vector2d& y, double h, double dw1, double dw2, double area) const;
};

}  // namespace stochmoments::sde
