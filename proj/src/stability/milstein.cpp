#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "internal.hpp"
#include "stochmoments/moments.hpp"
#include "stochmoments/numkernel/row_cache.hpp"
#include "stochmoments/numkernel/special_numbers.hpp"
#include "stochmoments/stability.hpp"

namespace stochmoments::stability {

namespace {

// Guard bits for the floating coefficient pipeline; the k-sum cancels.
constexpr Precision kGuardBits = 64;
constexpr int kGrowthWindow = 8;
constexpr int kTrackCount = 4;
constexpr double kRelativeTolerance = 1e-12;

void require_degree(int n, const char* what) {
  if (n < 1) throw std::domain_error(std::string(what) + ": degree must be at least 1, got " + std::to_string(n));
}

// Largest k in the outer sum: r - 1 for n = 2r, r for n = 2r + 1.
int outer_limit(int n) { return n % 2 == 0 ? n / 2 - 1 : n / 2; }

// (-1)^k (m/(m+k)) C(m+k,k)/C(2(m+k),2k) / m!  with m = n - 2k; multiplies s_{m,k}.
Rational outer_prefactor(int n, int k) {
  const int m = n - 2 * k;
  Rational r = Rational(m, m + k) * Rational(binomial(m + k, k), binomial(2L * (m + k), 2L * k)) /
               Rational(factorial(m));
  return k % 2 == 0 ? r : -r;
}

UnPolynomial build_exact(int n) {
  UnPolynomial u;
  u.degree = n;
  u.coeffs.assign(static_cast<std::size_t>(n) + 1, Rational());
  for (int k = 0; k <= outer_limit(n); ++k) {
    const int m = n - 2 * k;
    const Rational pref = outer_prefactor(n, k) * moments::s(m, k);
    for (int i = 0; i <= m; ++i) u.coeffs[static_cast<std::size_t>(i + k)] += pref * detail::weight(m, i);
  }
  return u;
}

std::vector<BigFloat> build_float(int n, Precision bits) {
  std::vector<BigFloat> out;
  if (n <= kExactUnDegree) {
    for (const auto& c : un_coeffs(n).coeffs) out.emplace_back(c, bits);
    return out;
  }
  const Precision work = bits + kGuardBits;
  std::vector<BigFloat> acc(static_cast<std::size_t>(n) + 1, BigFloat(work));
  for (int k = 0; k <= outer_limit(n); ++k) {
    const int m = n - 2 * k;
    const BigFloat pref = BigFloat(outer_prefactor(n, k), work) * moments::s_float(m, k, work);
    const auto& w = detail::weight_row(m, work);
    for (int i = 0; i <= m; ++i) acc[static_cast<std::size_t>(i + k)] += pref * w[static_cast<std::size_t>(i)];
  }
  out.reserve(acc.size());
  for (const auto& a : acc) out.push_back(a.rounded(bits));
  return out;
}

}  // namespace

namespace detail {

const BigFloat& un_value(double x, int n, Precision bits) {
  static RowCache<std::pair<double, Precision>, BigFloat> cache;
  return cache.get({x, bits}, static_cast<std::size_t>(n),
                   [](std::deque<BigFloat>& row, const std::pair<double, Precision>& key) {
                     const int nn = static_cast<int>(row.size());
                     if (nn == 0)
                       row.emplace_back(1L, key.second);
                     else
                       row.push_back(un_eval(nn, key.first, key.second));
                   });
}

}  // namespace detail

Rational UnPolynomial::operator()(const Rational& x) const {
  Rational acc;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

const UnPolynomial& un_coeffs(int n) {
  require_degree(n, "un_coeffs");
  static detail::OnceMap<int, UnPolynomial> cache;
  return cache.get(n, [n] { return build_exact(n); });
}

const std::vector<BigFloat>& un_coeffs_float(int n, Precision bits) {
  require_degree(n, "un_coeffs_float");
  static detail::OnceMap<std::pair<int, Precision>, std::vector<BigFloat>> cache;
  return cache.get({n, bits}, [n, bits] { return build_float(n, bits); });
}

BigFloat un_eval(int n, const BigFloat& x) {
  const auto& c = un_coeffs_float(n, x.precision());
  BigFloat acc = c.back();
  for (int l = n - 1; l >= 0; --l) acc = acc * x + c[static_cast<std::size_t>(l)];
  return acc;
}

BigFloat un_eval(int n, double x, Precision bits) { return un_eval(n, BigFloat(x, bits)); }

LyapunovValue lyapunov_un(int n, Precision bits) {
  const BigFloat u = un_eval(n, BigFloat(1L, bits));
  if (u.is_zero()) throw std::domain_error("lyapunov_un: U_" + std::to_string(n) + "(1) vanishes");
  return {log(abs(u)) / BigFloat(static_cast<long>(n), bits), u.sign()};
}

Rational phi_M(int n, const Rational& q1, const Rational& q2) {
  require_degree(n, "phi_M");
  Rational total;
  for (int k = 0; k <= outer_limit(n); ++k) {
    Rational inner;
    for (int l = k; l <= n - k; ++l)
      inner += Rational(binomial(n - 2 * k, l - k)) * pow(q1, static_cast<unsigned long>(n - l)) *
               pow(q2, static_cast<unsigned long>(l)) * moments::gamma({n - k - l, k, l - k});
    Rational term = pow(Rational(4), static_cast<unsigned long>(n - k)) / Rational(factorial(2L * (n - k))) *
                    Rational(n - 2 * k, n - k) * Rational(binomial(n - k, k)) * inner;
    total += k % 2 == 0 ? term : -term;
  }
  return total;
}

double milstein_tail_majorant(double q1, double x, int n_terms) {
  // |(2q1)^n U_n(x)| <= sum_{m + 2k = n, m >= 1} (2q1)^m S_m L_m / m! * rho^k * 2/((k+1)(k+2))
  // with S_m = tan^m(1)/cos(1), L_m = min((1+x)^m, m+1), rho = 4 q1^2 x; the k-tail from K is
  // at most rho^K 2/(K+1) when rho <= 1.
  const double rho = 4.0 * q1 * q1 * x;
  if (rho > 1.0) return std::numeric_limits<double>::infinity();
  const int N = n_terms;
  const double log_base = std::log(2.0 * q1 * std::tan(1.0));
  const double log_cos = std::log(std::cos(1.0));
  const double growth = 2.0 * q1 * std::tan(1.0) * (1.0 + x);
  double total = 0.0;
  for (int m = 1;; ++m) {
    const int K = m > N ? 0 : (N - m) / 2 + 1;
    const double log_L = std::min(m * std::log1p(x), std::log(m + 1.0));
    double term = 0.0;
    if (K == 0 || rho > 0.0) {
      const double log_rho_K = K == 0 ? 0.0 : K * std::log(rho);
      term = std::exp(m * log_base + log_L - std::lgamma(m + 1.0) - log_cos + log_rho_K + std::log(2.0 / (K + 1)));
    }
    total += term;
    // past N the terms are bounded by a geometric series of ratio growth/(m+1) <= 1/2
    if (m > N && m + 1.0 >= 2.0 * growth) {
      total += term;
      break;
    }
  }
  return total;
}

AmplificationResult milstein_factor(const StabilityParams& params, Precision bits) {
  params.validate();
  const BigFloat two_q1(2.0 * params.q1, bits);
  BigFloat sum(1L, bits);
  BigFloat power(1L, bits);
  // Terms follow four sign tracks (n mod 4), so growth compares against the same track.
  std::vector<BigFloat> magnitudes;
  magnitudes.reserve(static_cast<std::size_t>(params.n_terms));
  BigFloat last(bits);
  for (int n = 1; n <= params.n_terms; ++n) {
    power *= two_q1;
    last = power * detail::un_value(params.x, n, bits);
    sum += last;
    magnitudes.push_back(abs(last));
  }
  bool diverging = params.n_terms >= kGrowthWindow + kTrackCount;
  for (int i = 0; diverging && i < kGrowthWindow; ++i) {
    const auto n = static_cast<std::size_t>(params.n_terms - 1 - i);
    const auto same_track = n - static_cast<std::size_t>(kTrackCount);
    diverging = magnitudes[n] > magnitudes[same_track];
  }

  AmplificationResult out;
  out.terms_used = params.n_terms;
  out.diverging = diverging;
  const double scale = std::abs(sum.to_double());
  out.converged = !diverging && abs(last).to_double() < kRelativeTolerance * scale &&
                  milstein_tail_majorant(params.q1, params.x, params.n_terms) < kRelativeTolerance * scale;
  out.true_stable = 2.0 * params.p + params.q1 * (1.0 + params.x) < 0.0;
  out.factor = exp(BigFloat(2.0 * params.p - params.q1 * (1.0 + params.x), bits)) * sum;
  return out;
}

}  // namespace stochmoments::stability
