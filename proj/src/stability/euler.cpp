#include <cmath>
#include <stdexcept>
#include <string>

#include "internal.hpp"
#include "stochmoments/numkernel/row_cache.hpp"
#include "stochmoments/numkernel/special_numbers.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::stability {

namespace detail {

Rational weight(int m, int i) {
  const BigInt c = binomial(m, i);
  return Rational(c * c, binomial(2L * m, 2L * i));
}

const std::vector<BigFloat>& weight_row(int m, Precision bits) {
  static RowCache<Precision, std::vector<BigFloat>> cache;
  return cache.get(bits, static_cast<std::size_t>(m), [](std::deque<std::vector<BigFloat>>& rows, Precision p) {
    const int mm = static_cast<int>(rows.size());
    std::vector<BigFloat> row;
    row.reserve(static_cast<std::size_t>(mm) + 1);
    for (int i = 0; i <= mm; ++i) row.emplace_back(weight(mm, i), p);
    rows.push_back(std::move(row));
  });
}

BigFloat weight_poly(int m, const BigFloat& x) {
  const auto& row = weight_row(m, x.precision());
  BigFloat acc = row.back();
  for (int i = m - 1; i >= 0; --i) acc = acc * x + row[static_cast<std::size_t>(i)];
  return acc;
}

const BigFloat& euler_poly_value(double x, int n, Precision bits) {
  static RowCache<std::pair<double, Precision>, BigFloat> cache;
  return cache.get({x, bits}, static_cast<std::size_t>(n),
                   [](std::deque<BigFloat>& row, const std::pair<double, Precision>& key) {
                     const int nn = static_cast<int>(row.size());
                     const BigFloat xb(key.first, key.second);
                     row.push_back(weight_poly(nn, xb) / BigFloat(Rational(factorial(nn)), key.second));
                   });
}

}  // namespace detail

void StabilityParams::validate() const {
  if (!(q1 > 0.0) || !std::isfinite(q1)) throw std::domain_error("q1 must be positive, got " + std::to_string(q1));
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x must lie in [0, 1], got " + std::to_string(x));
  if (!std::isfinite(p)) throw std::domain_error("p must be finite");
  if (n_terms < 1) throw std::domain_error("n_terms must be at least 1");
}

bool AmplificationResult::method_stable() const { return factor.sign() >= 0 && factor < BigFloat(1L, 64); }

Rational phi_E(int n, const Rational& q1, const Rational& q2) {
  if (n < 0) throw std::domain_error("phi_E: n must be nonnegative");
  Rational sum;
  for (int k = 0; k <= n; ++k)
    sum += Rational(binomial(n, k), binomial(2L * n, 2L * k)) * pow(q1, static_cast<unsigned long>(n - k)) *
           pow(q2, static_cast<unsigned long>(k)) / Rational(factorial(n - k) * factorial(k));
  return pow(Rational(2), static_cast<unsigned long>(n)) * sum;
}

AmplificationResult euler_factor(const StabilityParams& params, Precision bits) {
  params.validate();
  const BigFloat two_q1 = BigFloat(2.0 * params.q1, bits);
  // phi_E(n) <= z^n / n!
  const double z = 2.0 * params.q1 * (1.0 + params.x);
  const double log_eps = -static_cast<double>(bits) * std::log(2.0);
  auto log_tail = [z](int n) {
    const double m = n + 1.0;
    if (z >= m + 1.0) return HUGE_VAL;
    return m * std::log(z) - std::lgamma(m + 1.0) - std::log1p(-z / (m + 1.0));
  };

  BigFloat sum(1L, bits);
  BigFloat power(1L, bits);
  int n = 0;
  while (n < params.n_terms) {
    ++n;
    power *= two_q1;
    sum += power * detail::euler_poly_value(params.x, n, bits);
    if (log_tail(n) < log_eps + std::log(sum.to_double())) break;
  }

  AmplificationResult out;
  out.terms_used = n;
  out.converged = log_tail(n) < std::log(1e-12) + std::log(sum.to_double());
  out.diverging = false;
  out.true_stable = 2.0 * params.p + params.q1 * (1.0 + params.x) < 0.0;
  out.factor = exp(BigFloat(2.0 * params.p - params.q1 * (1.0 + params.x), bits)) * sum;
  return out;
}

}  // namespace stochmoments::stability
