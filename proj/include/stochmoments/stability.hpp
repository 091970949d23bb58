#pragma once

#include <iosfwd>
#include <vector>

#include "stochmoments/numkernel/bigfloat.hpp"
#include "stochmoments/numkernel/rational.hpp"

/// Mean-square amplification of the Magnus-type Euler and Milstein schemes on
/// the two-noise linear test equation
///   dy = lambda y dt + sigma1 F1 y dW1 + sigma2 F2 y dW2,
/// written in terms of p = lambda h, q1 = sigma1^2 h and x = q2 / q1.
namespace stochmoments::stability {

/// Default series truncation.
inline constexpr int kDefaultTerms = 256;

/// Degrees up to this use exact rational U_n coefficients; higher degrees use
/// the floating-point pipeline.
inline constexpr int kExactUnDegree = 64;

struct StabilityParams {
  double p = 0.0;
  double q1 = 0.0;  ///< > 0
  double x = 0.0;   ///< in [0, 1]
  int n_terms = kDefaultTerms;

  /// Throws std::domain_error unless q1 > 0, 0 <= x <= 1 and n_terms >= 1.
  void validate() const;
};

struct AmplificationResult {
  BigFloat factor;
  int terms_used = 0;
  bool converged = false;
  bool diverging = false;
  bool true_stable = false;  ///< 2p + q1 (1 + x) < 0

  /// 0 <= factor < 1.
  bool method_stable() const;
};

/// a(n, 0..n) with U_n(x) = sum_l a(n, l) x^l.
struct UnPolynomial {
  int degree = 0;
  std::vector<Rational> coeffs;

  Rational operator()(const Rational& x) const;
};

/// phi_E(n) = 2^n sum_k [C(n,k)/C(2n,2k)] q1^{n-k} q2^k / ((n-k)! k!).
Rational phi_E(int n, const Rational& q1, const Rational& q2);

/// e^{2p - q1(1+x)} sum_{n<=N} phi_E(n). Stops early once the exponential
/// tail bound falls below the working precision. Never diverging.
AmplificationResult euler_factor(const StabilityParams& params, Precision bits = default_precision());

/// Exact coefficients of U_n, n >= 1 (std::domain_error otherwise).
const UnPolynomial& un_coeffs(int n);

/// Coefficients of U_n rounded to `bits`; exact for n <= kExactUnDegree.
const std::vector<BigFloat>& un_coeffs_float(int n, Precision bits);

/// U_n(x) by Horner's rule at x's precision.
BigFloat un_eval(int n, const BigFloat& x);
BigFloat un_eval(int n, double x, Precision bits = default_precision());

struct LyapunovValue {
  BigFloat value;  ///< (1/n) ln |U_n(1)|
  int sign = 0;    ///< sign of U_n(1)
};

/// Throws std::domain_error if U_n(1) vanishes.
LyapunovValue lyapunov_un(int n, Precision bits = default_precision());

/// phi_M(n) assembled directly from gamma moments; equals (2 q1)^n U_n(q2/q1).
Rational phi_M(int n, const Rational& q1, const Rational& q2);

/// e^{2p - q1(1+x)} (1 + sum_{n<=N} (2 q1)^n U_n(x)).
///
/// converged: the last term and a rigorous tail majorant are both below
/// 1e-12 of the partial sum. The majorant is finite only for 4 q1^2 x < 1.
/// diverging: each of the last 8 terms exceeds, in magnitude, the term four
/// places earlier (the terms follow four sign tracks by n mod 4).
AmplificationResult milstein_factor(const StabilityParams& params, Precision bits = default_precision());

/// Upper bound on sum_{n>N} |(2 q1)^n U_n(x)|; +inf when it cannot be bounded.
double milstein_tail_majorant(double q1, double x, int n_terms);

enum class Method { euler, milstein };

struct RegionRequest {
  double x = 1.0;
  double p_min = -4.0;
  double p_max = 0.0;
  double q_min = 0.02;
  double q_max = 4.0;
  int p_points = 201;
  int q_points = 200;
  Method method = Method::milstein;
  int n_terms = kDefaultTerms;

  /// Throws std::domain_error on empty ranges, q_min <= 0, x outside [0,1] or fewer than 2 points per axis.
  void validate() const;
};

struct RegionPoint {
  double p = 0.0;
  double q1 = 0.0;
  double x = 0.0;
  AmplificationResult result;
};

struct RegionGrid {
  RegionRequest request;
  std::vector<RegionPoint> points;  ///< q1-major: all p for the first q1, then the next
};

/// Evaluates the chosen method on a uniform (p, q1) grid, in parallel.
RegionGrid region_scan(const RegionRequest& request, Precision bits = default_precision());

/// Header `p,q1,x,factor,converged,diverging,method_stable,true_stable`; booleans as 0/1.
void write_region_csv(std::ostream& out, const RegionGrid& grid);

}  // namespace stochmoments::stability
