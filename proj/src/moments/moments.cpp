#include "stochmoments/moments.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <utility>

#include "stochmoments/numkernel/row_cache.hpp"
#include "stochmoments/numkernel/special_numbers.hpp"

namespace stochmoments::moments {

namespace {

constexpr int kPartitionEnumerationLimit = 12;

std::atomic<int> g_max_exact_order{600};

void require_nonnegative(int v, const char* what) {
  if (v < 0) throw std::domain_error(std::string(what) + " must be nonnegative, got " + std::to_string(v));
}

void require_budget(long order, const char* what) {
  const int cap = max_exact_order();
  if (order > cap)
    throw ResourceError(std::string(what) + ": order " + std::to_string(order) + " exceeds exact limit " +
                        std::to_string(cap));
}

Rational pow2(long e) { return Rational(BigInt(1) << static_cast<mp_bitcnt_t>(e)); }

// (2n)! / (2^n n!) == (2n-1)!!
Rational wiener_moment(int n) { return Rational(odd_double_factorial(2L * n - 1)); }

RowCache<int, Rational>& beta_cache() {
  static RowCache<int, Rational> cache;
  return cache;
}

RowCache<int, Rational>& r_deriv_cache() {
  static RowCache<int, Rational> cache;
  return cache;
}

RowCache<int, Rational>& s_cache() {
  static RowCache<int, Rational> cache;
  return cache;
}

RowCache<std::pair<int, int>, Rational>& s_hat_cache() {
  static RowCache<std::pair<int, int>, Rational> cache;
  return cache;
}

RowCache<std::pair<int, int>, Rational>& mgf_cache() {
  static RowCache<std::pair<int, int>, Rational> cache;
  return cache;
}

RowCache<std::pair<Precision, int>, BigFloat>& s_float_cache() {
  static RowCache<std::pair<Precision, int>, BigFloat> cache;
  return cache;
}

// Row n stores beta_{n,1}, beta_{n,2}, ... (index j-1).
const Rational& beta_ref(int n, int j) {
  return beta_cache().get(n, static_cast<std::size_t>(j - 1), [](std::deque<Rational>& row, int row_n) {
    const long jj = static_cast<long>(row.size()) + 1;
    const Rational four_j = pow2(2 * jj);
    const Rational factor = (four_j - 1) * Rational(row_n + 1) - Rational(row_n);
    row.push_back(pow2(2 * jj - 1) * bernoulli(static_cast<int>(2 * jj)).abs() * factor /
                  Rational(factorial(2 * jj)));
  });
}

// Row n stores d^{2k} r_n(0) at index k.
const Rational& r_even_deriv(int n, int k) {
  return r_deriv_cache().get(n, static_cast<std::size_t>(k), [](std::deque<Rational>& row, int row_n) {
    const long kk = static_cast<long>(row.size());
    if (kk == 0) {
      row.emplace_back(1);
      return;
    }
    Rational sum;
    for (long j = 1; j <= kk; ++j) {
      const Rational four_j = pow2(2 * j);
      const Rational bracket = (Rational(1) - four_j) * Rational(row_n + 1) + Rational(row_n);
      sum += Rational(binomial(2 * kk, 2 * j)) * four_j * bernoulli(static_cast<int>(2 * j)) * bracket *
             row[static_cast<std::size_t>(kk - j)];
    }
    row.push_back(sum / Rational(2 * kk));
  });
}

// s_{n,k} = (1/k) sum_{j=1}^{k} beta_{n,j} s_{n,k-j}
const Rational& s_ref(int n, int k) {
  return s_cache().get(n, static_cast<std::size_t>(k), [](std::deque<Rational>& row, int row_n) {
    const int kk = static_cast<int>(row.size());
    if (kk == 0) {
      row.emplace_back(1);
      return;
    }
    Rational sum;
    for (int j = 1; j <= kk; ++j) sum += beta_ref(row_n, j) * row[static_cast<std::size_t>(kk - j)];
    row.push_back(sum / Rational(kk));
  });
}

// hat-s_{n,L}(k) for a fixed L; valid for every k, the L >= k entries coincide with s_{n,k}.
const Rational& s_hat_ref(int n, int L, int k) {
  return s_hat_cache().get({n, L}, static_cast<std::size_t>(k),
                           [](std::deque<Rational>& row, const std::pair<int, int>& key) {
                             const int kk = static_cast<int>(row.size());
                             if (kk == 0) {
                               row.emplace_back(1);
                               return;
                             }
                             Rational sum;
                             const int top = std::min(key.second, kk);
                             for (int j = 1; j <= top; ++j)
                               sum += beta_ref(key.first, j) * row[static_cast<std::size_t>(kk - j)];
                             row.push_back(sum / Rational(kk));
                           });
}

// M^{(q+1)}(0) = sum_{l=0}^{min(q, L-1)} C(q,l) beta_{n,l+1} l! M^{(q-l)}(0)
const Rational& mgf_ref(int n, int L, int k) {
  return mgf_cache().get({n, L}, static_cast<std::size_t>(k),
                         [](std::deque<Rational>& row, const std::pair<int, int>& key) {
                           const long size = static_cast<long>(row.size());
                           if (size == 0) {
                             row.emplace_back(1);
                             return;
                           }
                           const long q = size - 1;
                           Rational sum;
                           const long top = std::min<long>(q, key.second - 1);
                           for (long l = 0; l <= top; ++l)
                             sum += Rational(binomial(q, l) * factorial(l)) *
                                    beta_ref(key.first, static_cast<int>(l + 1)) *
                                    row[static_cast<std::size_t>(q - l)];
                           row.push_back(std::move(sum));
                         });
}

// Sum over multiplicities l_j of parts j <= largest with sum j*l_j == remaining.
void enumerate_partitions(int n, int remaining, int largest, const Rational& weight, Rational& total) {
  if (remaining == 0) {
    total += weight;
    return;
  }
  if (largest == 0) return;
  const Rational b = beta_ref(n, largest) / Rational(largest);
  Rational w = weight;
  for (int mult = 0; mult * largest <= remaining; ++mult) {
    if (mult > 0) w = w * b / Rational(mult);
    enumerate_partitions(n, remaining - mult * largest, largest - 1, w, total);
  }
}

}  // namespace

GammaIndex::GammaIndex(int n_, int k_, int l_) : n(n_), k(k_), l(l_) {
  require_nonnegative(n, "GammaIndex.n");
  require_nonnegative(k, "GammaIndex.k");
  require_nonnegative(l, "GammaIndex.l");
}

int max_exact_order() { return g_max_exact_order.load(std::memory_order_relaxed); }

void set_max_exact_order(int order) {
  if (order < 1) throw std::domain_error("set_max_exact_order: limit must be positive");
  g_max_exact_order.store(order);
}

Rational beta(int n, int j) {
  require_nonnegative(n, "beta: n");
  if (j < 1) throw std::domain_error("beta: j must be >= 1, got " + std::to_string(j));
  require_budget(n + 2L * j, "beta");
  return beta_ref(n, j);
}

Rational r_deriv_at_zero(int n, int order) {
  require_nonnegative(n, "r_deriv_at_zero: n");
  require_nonnegative(order, "r_deriv_at_zero: order");
  if (order % 2 != 0) return Rational(0);
  require_budget(static_cast<long>(n) + order, "r_deriv_at_zero");
  return r_even_deriv(n, order / 2);
}

Rational s_hat(int n, int L, int k) {
  require_nonnegative(n, "s_hat: n");
  require_nonnegative(L, "s_hat: L");
  require_nonnegative(k, "s_hat: k");
  if (k == 0) return Rational(1);
  if (L == 0) return Rational(0);
  require_budget(n + 2L * k, "s_hat");
  if (L >= k) return s_ref(n, k);
  return s_hat_ref(n, L, k);
}

const Rational& s(int n, int k) {
  require_nonnegative(n, "s: n");
  require_nonnegative(k, "s: k");
  require_budget(n + 2L * k, "s");
  return s_ref(n, k);
}

Rational s_by_partitions(int n, int k) {
  require_nonnegative(n, "s_by_partitions: n");
  require_nonnegative(k, "s_by_partitions: k");
  require_budget(n + 2L * k, "s_by_partitions");
  Rational total;
  enumerate_partitions(n, k, k, Rational(1), total);
  return total;
}

Rational mgf_deriv(int n, int L, int k) {
  require_nonnegative(n, "mgf_deriv: n");
  require_nonnegative(L, "mgf_deriv: L");
  require_nonnegative(k, "mgf_deriv: k");
  require_budget(n + 2L * k, "mgf_deriv");
  return mgf_ref(n, L, k);
}

BigFloat mgf_eval(int n, int L, const BigFloat& theta) {
  require_nonnegative(n, "mgf_eval: n");
  require_nonnegative(L, "mgf_eval: L");
  const Precision bits = theta.precision();
  BigFloat exponent(bits);
  BigFloat power(1L, bits);
  for (int j = 1; j <= L; ++j) {
    power *= theta;
    exponent += BigFloat(beta(n, j) / Rational(j), bits) * power;
  }
  return exp(exponent);
}

Rational gamma_nk0(int n, int k, Backend backend) {
  require_nonnegative(n, "gamma_nk0: n");
  require_nonnegative(k, "gamma_nk0: k");
  require_budget(n + 2L * k, "gamma_nk0");
  const Rational w = wiener_moment(n);
  switch (backend) {
    case Backend::recursive: {
      const Rational d = r_even_deriv(n, k);
      return k % 2 == 0 ? w * d : -(w * d);
    }
    case Backend::explicit_partition: {
      const Rational sk = k <= kPartitionEnumerationLimit ? s_by_partitions(n, k) : s_ref(n, k);
      return w * Rational(factorial(2L * k)) * sk;
    }
    case Backend::generating_function:
      return w * Rational(factorial(2L * k)) / Rational(factorial(k)) * mgf_ref(n, k, k);
  }
  throw std::logic_error("gamma_nk0: unknown backend");
}

Rational gamma(const GammaIndex& idx) {
  const int m = idx.n + idx.l;
  require_budget(m + 2L * idx.k, "gamma");
  const Rational base = wiener_moment(m) * Rational(factorial(2L * idx.k)) * s_ref(m, idx.k);
  return Rational(binomial(m, idx.l), binomial(2L * m, 2L * idx.l)) * base;
}

Rational gamma_on_step(const GammaIndex& idx, const Rational& h) {
  return pow(h, static_cast<unsigned long>(idx.n + 2 * idx.k + idx.l)) * gamma(idx);
}

BigFloat s_simple_bound(int n, Precision bits) {
  require_nonnegative(n, "s_simple_bound: n");
  const BigFloat one(1L, bits);
  return pow(tan(one), n) / cos(one);
}

BigFloat gamma_bound(int n, int k, int k0, Precision bits) {
  require_nonnegative(n, "gamma_bound: n");
  require_nonnegative(k, "gamma_bound: k");
  require_nonnegative(k0, "gamma_bound: k0");
  const BigFloat prefactor(wiener_moment(n) * Rational(factorial(2L * k)), bits);
  const BigFloat simple = s_simple_bound(n, bits);
  if (k0 == 0) return prefactor * simple;
  if (k < k0 + 1)
    throw std::domain_error("gamma_bound: refined bound needs k >= k0 + 1 (k=" + std::to_string(k) +
                            ", k0=" + std::to_string(k0) + ")");
  require_budget(n + 2L * k, "gamma_bound");
  Rational best(1);
  for (int j = 1; j <= k; ++j) best = std::max(best, s_hat(n, k0, j));
  return prefactor * simple / mgf_eval(n, k0, BigFloat(1L, bits)) * BigFloat(best, bits);
}

Rational mixed_moment_I(int a, int b, int c) {
  require_nonnegative(a, "mixed_moment_I: a");
  require_nonnegative(b, "mixed_moment_I: b");
  // A^2 = (dW1 dW2)^2 - 4 I12 I21
  switch (c) {
    case 1:
      return (gamma({a + 1, 0, b + 1}) - gamma({a, 1, b})) / Rational(4);
    case 2:
      return (gamma({a + 2, 0, b + 2}) - Rational(2) * gamma({a + 1, 1, b + 1}) + gamma({a, 2, b})) / Rational(16);
    default:
      throw std::domain_error("mixed_moment_I: c must be 1 or 2, got " + std::to_string(c));
  }
}

Rational mixed_moment_I_on_step(int a, int b, int c, const Rational& h) {
  const Rational unit = mixed_moment_I(a, b, c);
  return pow(h, static_cast<unsigned long>(a + b + 2 * c)) * unit;
}

BigFloat r_eval(int n, const BigFloat& x) {
  require_nonnegative(n, "r_eval: n");
  if (x.is_zero()) return BigFloat(1L, x.precision());
  return pow(tanh(x) / x, n) / cosh(x);
}

BigFloat v_eval(int n, const BigFloat& x) {
  require_nonnegative(n, "v_eval: n");
  const Precision bits = x.precision();
  if (x.is_zero()) return BigFloat(bits);
  // coth x - 1/x ~ x/3 loses about 2 log2(1/|x|) bits to cancellation.
  const long e = x.exponent();
  const Precision work = bits + 16 + (e < 0 ? -2 * e : 0);
  const BigFloat xw = x.rounded(work);
  const BigFloat one(1L, work);
  const BigFloat t = tanh(xw);
  const BigFloat v = BigFloat(static_cast<long>(n), work) * (one / t - one / xw) -
                     BigFloat(static_cast<long>(n) + 1, work) * t;
  return v.rounded(bits);
}

const BigFloat& s_float(int n, int k, Precision bits) {
  require_nonnegative(n, "s_float: n");
  require_nonnegative(k, "s_float: k");
  require_budget(n + 2L * k, "s_float");
  return s_float_cache().get({bits, n}, static_cast<std::size_t>(k),
                             [](std::deque<BigFloat>& row, const std::pair<Precision, int>& key) {
                               const int kk = static_cast<int>(row.size());
                               const Precision p = key.first;
                               if (kk == 0) {
                                 row.emplace_back(1L, p);
                                 return;
                               }
                               BigFloat sum(p);
                               for (int j = 1; j <= kk; ++j)
                                 sum += BigFloat(beta_ref(key.second, j), p) * row[static_cast<std::size_t>(kk - j)];
                               row.push_back(sum / BigFloat(static_cast<long>(kk), p));
                             });
}

}  // namespace stochmoments::moments
