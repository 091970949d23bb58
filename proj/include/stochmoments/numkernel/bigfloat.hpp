#pragma once

#include <mpfr.h>

#include <compare>
#include <string>

#include "stochmoments/numkernel/rational.hpp"

namespace stochmoments {

using Precision = mpfr_prec_t;

inline constexpr Precision kDefaultPrecisionBits = 256;
inline constexpr Precision kMinPrecisionBits = 64;

/// Process-wide precision used when a BigFloat is built without an explicit one.
Precision default_precision();
void set_default_precision(Precision bits);

/// Binary floating point number backed by MPFR, rounding to nearest.
///
/// Binary operations produce a result at the larger precision of the two
/// operands. Conversions from Rational are correctly rounded.
class BigFloat {
 public:
  explicit BigFloat(Precision bits = default_precision());
  BigFloat(double v, Precision bits);
  BigFloat(long v, Precision bits);
  BigFloat(const Rational& v, Precision bits);
  explicit BigFloat(const Rational& v) : BigFloat(v, default_precision()) {}

  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  Precision precision() const { return mpfr_get_prec(value_); }
  /// Same value rounded to a new precision.
  BigFloat rounded(Precision bits) const;

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  int sign() const { return mpfr_sgn(value_); }
  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  /// Binary exponent e with value = m * 2^e, 0.5 <= |m| < 1. Undefined for zero.
  long exponent() const { return mpfr_get_exp(value_); }

  /// Scientific notation with `digits` significant decimal digits.
  std::string to_string(int digits = 17) const;
  /// Shortest scientific representation that reads back to the same value.
  std::string to_round_trip_string() const;

  mpfr_srcptr get() const { return value_; }
  mpfr_ptr get() { return value_; }

  BigFloat& operator+=(const BigFloat& o);
  BigFloat& operator-=(const BigFloat& o);
  BigFloat& operator*=(const BigFloat& o);
  BigFloat& operator/=(const BigFloat& o);

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator-(const BigFloat& a);

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
  friend std::partial_ordering operator<=>(const BigFloat& a, const BigFloat& b);

 private:
  mpfr_t value_;
};

BigFloat abs(const BigFloat& x);
BigFloat exp(const BigFloat& x);
BigFloat log(const BigFloat& x);
BigFloat sqrt(const BigFloat& x);
BigFloat sin(const BigFloat& x);
BigFloat cos(const BigFloat& x);
BigFloat tan(const BigFloat& x);
BigFloat sinh(const BigFloat& x);
BigFloat cosh(const BigFloat& x);
BigFloat tanh(const BigFloat& x);
BigFloat pow(const BigFloat& base, long exponent);
/// x * 2^e, exact.
BigFloat ldexp(const BigFloat& x, long e);

}  // namespace stochmoments
