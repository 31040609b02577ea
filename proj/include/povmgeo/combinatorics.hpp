#pragma once

#include "povmgeo/types.hpp"

#include <mutex>
#include <vector>

namespace povmgeo {

/// Exact-integer tables shared by all analytic formulas: binomial
/// coefficients, Stirling numbers of the second kind S(m,n) and unsigned
/// Stirling numbers of the first kind c(n,m). Values are arbitrary
/// precision; tables grow on demand and are safe to query concurrently.
class Combinatorics {
 public:
  static BigInt binomial(int n, int k);
  static BigInt stirling2(int m, int n);
  static BigInt stirling1_unsigned(int n, int m);
  /// s(n,m) = (-1)^{n-m} c(n,m)
  static BigInt stirling1_signed(int n, int m);
  static BigInt factorial(int n);
  /// n(n-1)...(n-m+1); zero for m > n
  static BigInt falling_factorial(int n, int m);

  template <operator_scalar S>
  static S binomial_as(int n, int k) {
    return scalar_from_rational<S>(Rational(binomial(n, k)));
  }
  template <operator_scalar S>
  static S stirling2_as(int m, int n) {
    return scalar_from_rational<S>(Rational(stirling2(m, n)));
  }
  template <operator_scalar S>
  static S factorial_as(int n) {
    return scalar_from_rational<S>(Rational(factorial(n)));
  }
};

}  // namespace povmgeo
