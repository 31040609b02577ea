#pragma once

#include "povmgeo/combinatorics.hpp"
#include "povmgeo/geometry.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace povmgeo {

/// An array of N identical on-off detectors with linear response
/// g(n) = eta*n + nu. Outcomes n = 0..N; index N is the non-HS element
/// removed by the singular-metric treatment.
template <operator_scalar S>
struct ArrayDetector {
  int n_detectors;
  S eta;
  S nu = S(0);

  void validate() const {
    if (n_detectors < 1) throw std::invalid_argument("ArrayDetector: N must be >= 1");
    if (!(eta > S(0) && eta <= S(1)))
      throw std::invalid_argument("ArrayDetector: eta must be in (0,1]");
    if (nu < S(0)) throw std::invalid_argument("ArrayDetector: nu must be >= 0");
  }
};

namespace detail {

template <operator_scalar S>
S dark_factor(const ArrayDetector<S>& det, int j) {
  if constexpr (real_scalar<S>) {
    return std::exp(-det.nu * S(det.n_detectors - j) / S(det.n_detectors));
  } else {
    if (det.nu != S(0))
      throw std::invalid_argument("exact instantiation requires nu = 0");
    return S(1);
  }
}

// normal-ordering rate of the j-th expansion term: 1 - eta (N-j)/N
template <operator_scalar S>
S term_rate(const ArrayDetector<S>& det, int j) {
  return S(1) - det.eta * S(det.n_detectors - j) / S(det.n_detectors);
}

}  // namespace detail

/// Common Fock window for a detector's POVM family (slowest decay rate is
/// 1 - eta/N).
template <real_scalar S>
Index array_fock_dim(const ArrayDetector<S>& det, Index requested = 0) {
  det.validate();
  if (requested > 0) return requested;
  const S r = detail::term_rate(det, det.n_detectors - 1);
  const S coeff = std::pow(S(2), S(det.n_detectors)) *
                  Combinatorics::binomial_as<S>(det.n_detectors, det.n_detectors / 2);
  return adaptive_truncation<S>(r, coeff, S(1e-13), 64);
}

/// POVM element of the array detector,
/// diag[k] = C(N,n) sum_j C(n,j)(-1)^{n-j} e^{-nu(N-j)/N} (1-eta(N-j)/N)^k.
/// The n = N element carries a unit rate and is flagged non-HS.
template <operator_scalar S>
DiagonalOperator<S> array_povm_element(const ArrayDetector<S>& det, int n,
                                       Index truncation_dim) {
  det.validate();
  const int N = det.n_detectors;
  if (n < 0 || n > N) throw std::invalid_argument("array_povm_element: n out of range");
  Vector<S> d = Vector<S>::Zero(truncation_dim);
  const S cNn = Combinatorics::binomial_as<S>(N, n);
  S tail = S(0);
  bool hs = true;
  for (int j = 0; j <= n; ++j) {
    const S coeff = cNn * Combinatorics::binomial_as<S>(n, j) *
                    ((n - j) % 2 != 0 ? S(-1) : S(1)) * detail::dark_factor(det, j);
    const S r = detail::term_rate(det, j);
    S p = S(1);
    for (Index k = 0; k < truncation_dim; ++k) {
      d[k] += coeff * p;
      p *= r;
    }
    if constexpr (real_scalar<S>) {
      if (r >= S(1) || r >= S(1) - S(1e-15)) {
        if (std::abs(coeff) > S(0)) hs = false;
      } else {
        tail += std::abs(coeff) * std::pow(r, S(truncation_dim)) / std::sqrt(S(1) - r * r);
      }
    }
  }
  if constexpr (real_scalar<S>) {
    if (!hs) return DiagonalOperator<S>::non_hs(std::move(d));
    return DiagonalOperator<S>(std::move(d), tail);
  } else {
    if (n == N) return DiagonalOperator<S>::non_hs(std::move(d));
    return DiagonalOperator<S>(std::move(d), S(0));
  }
}

/// All N+1 POVM elements on a common window.
template <operator_scalar S>
std::vector<DiagonalOperator<S>> array_povm_all(const ArrayDetector<S>& det,
                                                Index truncation_dim) {
  std::vector<DiagonalOperator<S>> povm;
  povm.reserve(det.n_detectors + 1);
  for (int n = 0; n <= det.n_detectors; ++n)
    povm.push_back(array_povm_element(det, n, truncation_dim));
  return povm;
}

/// The measurement geometry of the array detector (index N removed).
template <real_scalar S>
MeasurementBasis<S> array_basis(const ArrayDetector<S>& det, Index truncation_dim = 0) {
  return build_basis(array_povm_all(det, array_fock_dim(det, truncation_dim)));
}

/// Tr[Pi_n(N,eta,nu) Pi_m(N',eta',nu')] in closed form: the covariant
/// coordinate of one array POVM in the basis of another.
template <operator_scalar S>
S array_cross_gram(const ArrayDetector<S>& a, const ArrayDetector<S>& b, int n, int m) {
  a.validate();
  b.validate();
  const int N = a.n_detectors, Np = b.n_detectors;
  if (n < 0 || n > N || m < 0 || m > Np)
    throw std::invalid_argument("array_cross_gram: index out of range");
  std::vector<S> terms;
  terms.reserve(static_cast<size_t>(n + 1) * (m + 1));
  for (int k = 0; k <= n; ++k) {
    for (int l = 0; l <= m; ++l) {
      // geometric pairing of rates: N N' / (N'(N-k) eta + N(N'-l) eta' - eta eta' (N-k)(N'-l))
      const S den = S(Np) * S(N - k) * a.eta + S(N) * S(Np - l) * b.eta -
                    a.eta * b.eta * S(N - k) * S(Np - l);
      if (den == S(0))
        throw std::domain_error("array_cross_gram: divergent entry (non-HS pairing)");
      S f = S(N) * S(Np) * detail::dark_factor(a, k) * detail::dark_factor(b, l) / den;
      f *= Combinatorics::binomial_as<S>(n, k) * Combinatorics::binomial_as<S>(m, l);
      if ((n + m - k - l) % 2 != 0) f = -f;
      terms.push_back(f);
    }
  }
  S sum;
  if constexpr (real_scalar<S>) {
    sum = detail::compensated_sum(terms);
  } else {
    sum = S(0);
    for (const S& t : terms) sum += t;
  }
  return Combinatorics::binomial_as<S>(N, n) * Combinatorics::binomial_as<S>(Np, m) * sum;
}

/// Covariant metric tensor; g_NN is reported as +infinity (the n = N
/// element is outside the HS class).
template <real_scalar S>
S array_metric_cov(const ArrayDetector<S>& det, int n, int m) {
  if (n == det.n_detectors && m == det.n_detectors)
    return std::numeric_limits<S>::infinity();
  return array_cross_gram(det, det, n, m);
}

template <operator_scalar S>
struct FCoefficients {
  Vector<S> values;  // F_{N;k}, k = 0..N-1
};

namespace detail {

template <operator_scalar S>
S pow_int(S base, int e) {
  S v = S(1);
  for (int i = 0; i < e; ++i) v *= base;
  return v;
}

// F_{N;k} of exp(-t n) as a function of x = e^{-t}; rational in x, which is
// what the exact reduction checks evaluate.
template <operator_scalar S>
Vector<S> f_exp_at(const ArrayDetector<S>& det, S x) {
  const int N = det.n_detectors;
  Vector<S> v(N);
  for (int k = 0; k < N; ++k)
    v[k] = S(N) * dark_factor(det, k) / (S(N) * (S(1) - x) + det.eta * S(N - k) * x);
  return v;
}

}  // namespace detail

/// F_{N;k} for B = exp(-t n).
template <real_scalar S>
FCoefficients<S> f_exp(const ArrayDetector<S>& det, S t) {
  det.validate();
  return {detail::f_exp_at(det, std::exp(-t))};
}

/// F_{N;k} for B = :exp(-t n):. Defined for all t > 0; the operator itself
/// is HS-class only for t in (0,2).
template <operator_scalar S>
FCoefficients<S> f_normal_exp(const ArrayDetector<S>& det, S t) {
  det.validate();
  const int N = det.n_detectors;
  Vector<S> v(N);
  for (int k = 0; k < N; ++k)
    v[k] = S(N) * detail::dark_factor(det, k) /
           (det.eta * S(N - k) * (S(1) - t) + t * S(N));
  return {std::move(v)};
}

/// F_{N;k} for B = n^m: e^{-nu(N-k)/N} (x d/dx)^m (1-x)^{-1} at
/// x = 1 - eta(N-k)/N, expanded through Stirling numbers.
template <operator_scalar S>
FCoefficients<S> f_moment(const ArrayDetector<S>& det, int m) {
  det.validate();
  if (m < 0) throw std::invalid_argument("f_moment: order must be >= 0");
  const int N = det.n_detectors;
  Vector<S> v(N);
  for (int k = 0; k < N; ++k) {
    const S x = S(1) - det.eta * S(N - k) / S(N);
    const S omx = S(1) - x;
    S sum = S(0);
    S xp = S(1);
    for (int j = 0; j <= m; ++j) {
      sum += Combinatorics::stirling2_as<S>(m, j) * Combinatorics::factorial_as<S>(j) *
             xp / detail::pow_int(omx, j + 1);
      xp *= x;
    }
    v[k] = detail::dark_factor(det, k) * sum;
  }
  return {std::move(v)};
}

/// F_{N;k} for B = :n^m:: e^{-nu(N-k)/N} m! N/(eta(N-k)) (N/(eta(N-k)) - 1)^m.
template <operator_scalar S>
FCoefficients<S> f_normal_moment(const ArrayDetector<S>& det, int m) {
  det.validate();
  if (m < 0) throw std::invalid_argument("f_normal_moment: order must be >= 0");
  const int N = det.n_detectors;
  Vector<S> v(N);
  for (int k = 0; k < N; ++k) {
    const S c = det.eta * S(N - k) / S(N);  // rate of the paired exponent
    v[k] = detail::dark_factor(det, k) * Combinatorics::factorial_as<S>(m) *
           detail::pow_int((S(1) - c) / c, m) / c;
  }
  return {std::move(v)};
}

enum class FFamily { exp_decay, normal_exp, moment, normal_moment };

template <real_scalar S>
FCoefficients<S> f_coefficients(const ArrayDetector<S>& det, FFamily family, S param) {
  switch (family) {
    case FFamily::exp_decay:
      return f_exp(det, param);
    case FFamily::normal_exp:
      return f_normal_exp(det, param);
    case FFamily::moment:
      return f_moment(det, static_cast<int>(param));
    case FFamily::normal_moment:
      return f_normal_moment(det, static_cast<int>(param));
  }
  throw std::invalid_argument("f_coefficients: unknown family");
}

/// B_n = C(N,n) sum_k C(n,k) (-1)^{n-k} F_{N;k} over the effective set.
template <real_scalar S>
CoordinateVector<S> covariant_coords_from_f(const ArrayDetector<S>& det,
                                            const FCoefficients<S>& f) {
  const int N = det.n_detectors;
  if (f.values.size() != N) throw std::invalid_argument("covariant_coords_from_f: size mismatch");
  Vector<S> v(N);
  std::vector<S> terms;
  for (int n = 0; n < N; ++n) {
    terms.clear();
    for (int k = 0; k <= n; ++k) {
      S t = Combinatorics::binomial_as<S>(n, k) * f.values[k];
      if ((n - k) % 2 != 0) t = -t;
      terms.push_back(t);
    }
    v[n] = Combinatorics::binomial_as<S>(N, n) * detail::compensated_sum(terms);
  }
  return {std::move(v), std::nullopt, CoordKind::covariant};
}

/// Covariant coordinates of the Fock projector |m><m| from the POVM
/// expansion (general eta, nu).
template <operator_scalar S>
Vector<S> fock_projector_coords(const ArrayDetector<S>& det, int m) {
  det.validate();
  if (m < 0) throw std::invalid_argument("fock_projector_coords: m must be >= 0");
  const int N = det.n_detectors;
  Vector<S> v(N);
  std::vector<S> terms;
  for (int n = 0; n < N; ++n) {
    terms.clear();
    for (int l = 0; l <= n; ++l) {
      const S base = (det.eta * S(l) + S(N) * (S(1) - det.eta)) / S(N);
      S t = Combinatorics::binomial_as<S>(n, l) * detail::dark_factor(det, l);
      S bp = S(1);
      for (int i = 0; i < m; ++i) bp *= base;
      t *= bp;
      if ((n - l) % 2 != 0) t = -t;
      terms.push_back(t);
    }
    S sum;
    if constexpr (real_scalar<S>) {
      sum = detail::compensated_sum(terms);
    } else {
      sum = S(0);
      for (const S& t : terms) sum += t;
    }
    v[n] = Combinatorics::binomial_as<S>(N, n) * sum;
  }
  return v;
}

/// Ideal-case (eta=1, nu=0) projector coordinates through Stirling numbers
/// of the second kind: B_n = C(N,n) n! S(m,n) / N^m.
template <operator_scalar S>
Vector<S> fock_projector_coords_ideal(int N, int m) {
  Vector<S> v(N);
  const BigInt denom = boost::multiprecision::pow(BigInt(N), static_cast<unsigned>(m));
  for (int n = 0; n < N; ++n) {
    const Rational q(Combinatorics::binomial(N, n) * Combinatorics::factorial(n) *
                         Combinatorics::stirling2(m, n),
                     denom);
    v[n] = scalar_from_rational<S>(q);
  }
  return v;
}

/// The physical click-counting operator C = sum_{n<=N} n Pi_n; in the ideal
/// case diag[k] = N(1 - (1-1/N)^k). Not HS-class.
template <real_scalar S>
DiagonalOperator<S> click_operator(const ArrayDetector<S>& det, Index truncation_dim) {
  det.validate();
  const int N = det.n_detectors;
  if (det.eta == S(1) && det.nu == S(0)) {
    Vector<S> d(truncation_dim);
    const S r = S(1) - S(1) / S(N);
    S p = S(1);
    for (Index k = 0; k < truncation_dim; ++k) {
      d[k] = S(N) * (S(1) - p);
      p *= r;
    }
    return DiagonalOperator<S>::non_hs(std::move(d));
  }
  auto povm = array_povm_all(det, truncation_dim);
  Vector<S> coeffs(N + 1);
  for (int n = 0; n <= N; ++n) coeffs[n] = S(n);
  return linear_combination(povm, coeffs);
}

/// The index-restricted click observable sum_{n<N} n Pi_n, whose
/// contravariant coordinates are exactly the outcomes n (HS-class).
template <real_scalar S>
DiagonalOperator<S> click_observable_effective(const ArrayDetector<S>& det,
                                               Index truncation_dim) {
  auto povm = array_povm_all(det, truncation_dim);
  povm.pop_back();
  Vector<S> coeffs(det.n_detectors);
  for (int n = 0; n < det.n_detectors; ++n) coeffs[n] = S(n);
  return linear_combination(povm, coeffs);
}

/// One row of a mismatch profile.
struct ProfileRow {
  double parameter;
  double hs_norm_b;
  double hs_mismatch;
  double condition_number;
};

enum class ProfileFamily {
  fock_projector,          // parameter = m
  exp_decay,               // parameter = t
  normal_exp,              // parameter = t
  truncated_moment,        // parameter = m, with truncation M
  truncated_normal_moment  // parameter = m, with truncation M
};

/// HS-mismatch profile across a parameter grid (Figs. 3-5 machinery).
/// Truncation is required for the moment families; the untruncated moments
/// are not HS-class.
std::vector<ProfileRow> mismatch_profile(const ArrayDetector<double>& det,
                                         ProfileFamily family,
                                         const std::vector<double>& grid,
                                         std::optional<int> truncation = std::nullopt);

}  // namespace povmgeo
