#pragma once

#include "stochmoments/numkernel/rational.hpp"

namespace stochmoments {

/// B_index for even index >= 0, with B_0 = 1.
///
/// Built from the recurrence
///   B_2n = -1/(2n+1) + 1/2 - sum_{k=1}^{n-1} [2n(2n-1)...(2n-2k+2) / (2k)!] B_2k
/// and memoized; safe to call concurrently. Throws std::domain_error for odd
/// or negative indices.
const Rational& bernoulli(int index);

/// Exact C(n, k); throws std::domain_error unless 0 <= k <= n.
BigInt binomial(long n, long k);

/// n!; throws std::domain_error for n < 0.
BigInt factorial(long n);

/// m!! for odd m >= -1, with (-1)!! = 1.
BigInt odd_double_factorial(long m);

}  // namespace stochmoments
