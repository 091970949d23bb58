#include "stochmoments/numkernel/special_numbers.hpp"

#include <stdexcept>
#include <string>

#include "stochmoments/numkernel/row_cache.hpp"

namespace stochmoments {

namespace {

// Row 0 holds B_0, B_2, B_4, ...
RowCache<int, Rational>& bernoulli_cache() {
  static RowCache<int, Rational> cache;
  return cache;
}

void extend_bernoulli(std::deque<Rational>& row, int /*key*/) {
  const long n = static_cast<long>(row.size());
  if (n == 0) {
    row.emplace_back(1);
    return;
  }
  // 2n(2n-1)...(2n-2k+2) / (2k)!  ==  C(2n+1, 2k) / (2n+1)
  Rational b = Rational(-1) / Rational(2 * n + 1) + Rational(1, 2);
  for (long k = 1; k < n; ++k)
    b -= Rational(binomial(2 * n + 1, 2 * k), BigInt(2 * n + 1)) * row[static_cast<std::size_t>(k)];
  row.push_back(std::move(b));
}

}  // namespace

const Rational& bernoulli(int index) {
  if (index < 0 || index % 2 != 0)
    throw std::domain_error("bernoulli: index must be even and nonnegative, got " + std::to_string(index));
  return bernoulli_cache().get(0, static_cast<std::size_t>(index / 2), extend_bernoulli);
}

BigInt binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n)
    throw std::domain_error("binomial: need 0 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

BigInt factorial(long n) {
  if (n < 0) throw std::domain_error("factorial: negative argument");
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

BigInt odd_double_factorial(long m) {
  if (m < -1 || m % 2 == 0)
    throw std::domain_error("odd_double_factorial: need odd m >= -1, got " + std::to_string(m));
  if (m == -1) return 1;
  BigInt r;
  mpz_2fac_ui(r.get_mpz_t(), static_cast<unsigned long>(m));
  return r;
}

}  // namespace stochmoments
