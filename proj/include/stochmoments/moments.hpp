#pragma once

#include <stdexcept>

#include "stochmoments/numkernel/bigfloat.hpp"
#include "stochmoments/numkernel/rational.hpp"

/// Exact moments of Wiener increments and the Levy area on a unit step.
///
/// gamma_{n,k,l} = E[dW1^{2n} A12^{2k} dW2^{2l}] over [t, t+1]. Only even
/// exponents appear in the API: any monomial with an odd exponent has zero
/// expectation, so there is nothing to compute for it.
///
/// All exact tables are memoized and may be read from several threads.
namespace stochmoments::moments {

/// Exponents (n, k, l) of dW1^2, A12^2 and dW2^2.
struct GammaIndex {
  int n = 0;
  int k = 0;
  int l = 0;

  GammaIndex() = default;
  /// Throws std::domain_error on a negative field.
  GammaIndex(int n_, int k_, int l_);

  friend bool operator==(const GammaIndex&, const GammaIndex&) = default;
};

/// Route used to evaluate gamma_{n,k,0}; every backend returns the same rational.
enum class Backend {
  recursive,            ///< recurrence for the even derivatives of r_n at zero
  explicit_partition,   ///< partition sum for s_{n,k}; k > 12 falls back to the DP
  generating_function,  ///< Leibniz recurrence for the derivatives of M_{n,k}
};

/// Raised when a request exceeds the configured exact-arithmetic budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cap on n + 2k (with n counting both Wiener exponents) for exact work. Default 600.
int max_exact_order();
void set_max_exact_order(int order);

/// beta_{n,j} = 2^{2j-1} |B_2j| ((2^{2j}-1)(n+1) - n) / (2j)!, j >= 1.
Rational beta(int n, int j);

/// d^order r_n / dx^order at 0 where r_n(x) = (tanh x / x)^n / cosh x.
Rational r_deriv_at_zero(int n, int order);

/// Truncated partition sum hat-s_{n,L}(k) using parts of size at most L.
Rational s_hat(int n, int L, int k);

/// s_{n,k} = hat-s_{n,k}(k), by the hat-s dynamic program.
const Rational& s(int n, int k);

/// s_{n,k} by direct enumeration of the partitions of k. Exponential in k;
/// intended as an oracle for small k.
Rational s_by_partitions(int n, int k);

/// k-th derivative at 0 of M_{n,L}(theta) = exp(sum_{j<=L} beta_{n,j} theta^j / j).
Rational mgf_deriv(int n, int L, int k);

/// M_{n,L}(theta), evaluated at theta's precision.
BigFloat mgf_eval(int n, int L, const BigFloat& theta);

/// gamma_{n,k,0} = (2n)! (2k)! s_{n,k} / (2^n n!).
Rational gamma_nk0(int n, int k, Backend backend = Backend::recursive);

/// gamma_{n,k,l} = [C(n+l, l) / C(2(n+l), 2l)] gamma_{n+l,k,0}.
Rational gamma(const GammaIndex& idx);

/// Moment over a step of length h: h^{n+2k+l} gamma_{n,k,l}.
Rational gamma_on_step(const GammaIndex& idx, const Rational& h);

/// tan^n(1) / cos(1), the k-independent upper bound on s_{n,k}.
BigFloat s_simple_bound(int n, Precision bits = default_precision());

/// Upper bound on gamma_{n,k,0}.
///
/// k0 = 0 gives (2n)!(2k)!/(2^n n!) tan^n(1)/cos(1) for any k. For k0 >= 1 the
/// refined bound divides by M_{n,k0}(1) and multiplies by
/// max_{0<=j<=k} hat-s_{n,k0}(j); it requires k >= k0 + 1 and throws
/// std::domain_error otherwise.
BigFloat gamma_bound(int n, int k, int k0, Precision bits = default_precision());

/// E[dW1^{2a} dW2^{2b} (I12 I21)^c] on the unit interval, c in {1, 2}.
Rational mixed_moment_I(int a, int b, int c);

/// Same moment over a step of length h: h^{a+b+2c} times the unit value.
Rational mixed_moment_I_on_step(int a, int b, int c, const Rational& h);

/// r_n(x) = (tanh x / x)^n / cosh x with r_n(0) = 1.
BigFloat r_eval(int n, const BigFloat& x);

/// v_n(x) = n (coth x - 1/x) - (n+1) tanh x with v_n(0) = 0.
BigFloat v_eval(int n, const BigFloat& x);

/// s_{n,k} computed by the same dynamic program in floating point at `bits`.
const BigFloat& s_float(int n, int k, Precision bits);

}  // namespace stochmoments::moments
