#pragma once

#include "povmgeo/combinatorics.hpp"
#include "povmgeo/geometry.hpp"

#include <cmath>
#include <vector>

namespace povmgeo {

/// Lossy photoelectric detection, linear response g(n) = eta*n + nu.
/// The closed forms below require nu = 0; dark counts are out of scope for
/// them and rejected rather than approximated.
template <operator_scalar S>
struct PhotocountingModel {
  S eta;
  S nu = S(0);

  void validate() const {
    if (!(eta > S(0) && eta <= S(1)))
      throw std::invalid_argument("PhotocountingModel: eta must be in (0,1]");
    if (nu < S(0)) throw std::invalid_argument("PhotocountingModel: nu must be >= 0");
  }
  void require_no_dark_counts(const char* what) const {
    validate();
    if (nu != S(0))
      throw std::invalid_argument(std::string(what) + ": closed form requires nu = 0");
  }
};

/// POVM element diagonal: <k|Pi_n|k> = C(k,n) eta^n (1-eta)^{k-n}, k >= n.
template <operator_scalar S>
DiagonalOperator<S> pc_povm_element(const PhotocountingModel<S>& model, int n,
                                    Index truncation_dim = 0) {
  model.require_no_dark_counts("pc_povm_element");
  if (n < 0) throw std::invalid_argument("pc_povm_element: n must be >= 0");
  const S r = S(1) - model.eta;
  if (truncation_dim == 0) {
    if constexpr (real_scalar<S>)
      truncation_dim = adaptive_truncation<S>(r, S(1) + S(n), S(1e-13),
                                              std::max<Index>(64, 4 * n + 16));
    else
      truncation_dim = std::max<Index>(64, 4 * n + 16);
  }
  if (truncation_dim <= n)
    throw std::invalid_argument("pc_povm_element: window smaller than the element index");
  Vector<S> d = Vector<S>::Zero(truncation_dim);
  // C(k,n) eta^n r^{k-n} built by the ratio recurrence C(k+1,n)/C(k,n) = (k+1)/(k+1-n)
  S v = S(1);
  for (int i = 0; i < n; ++i) v *= model.eta;
  d[n] = v;
  for (Index k = n + 1; k < truncation_dim; ++k) {
    v *= r * S(k) / S(k - n);
    d[k] = v;
  }
  if constexpr (real_scalar<S>) {
    if (model.eta == S(1)) return DiagonalOperator<S>::truncated(std::move(d));
    // certified geometric domination beyond the window
    const Index D = truncation_dim;
    const S q = (S(D) / S(D - n)) * r;
    if (!(q < S(1)))
      throw std::invalid_argument("pc_povm_element: window too small for a certified tail bound");
    const S tail = std::abs(d[D - 1]) * q / std::sqrt(S(1) - q * q);
    return DiagonalOperator<S>(std::move(d), tail);
  } else {
    return DiagonalOperator<S>(std::move(d), S(0));
  }
}

/// COVM element diagonal: <k|Pi^n|k> = C(n,k) (1/eta)^k (1-1/eta)^{n-k},
/// k <= n. Finite support; not positive semidefinite for eta < 1.
template <operator_scalar S>
DiagonalOperator<S> pc_covm_element(const PhotocountingModel<S>& model, int n,
                                    Index truncation_dim = 0) {
  model.require_no_dark_counts("pc_covm_element");
  if (n < 0) throw std::invalid_argument("pc_covm_element: n must be >= 0");
  if (truncation_dim == 0) truncation_dim = std::max<Index>(64, n + 1);
  if (truncation_dim <= n)
    throw std::invalid_argument("pc_covm_element: window smaller than the element index");
  Vector<S> d = Vector<S>::Zero(truncation_dim);
  const S inv_eta = S(1) / model.eta;
  const S w = S(1) - inv_eta;
  for (int k = 0; k <= n; ++k) {
    S v = Combinatorics::binomial_as<S>(n, k);
    for (int i = 0; i < k; ++i) v *= inv_eta;
    for (int i = 0; i < n - k; ++i) v *= w;
    d[k] = v;
  }
  return DiagonalOperator<S>::truncated(std::move(d));
}

/// Covariant metric tensor of lossy photocounting (closed form).
template <operator_scalar S>
S pc_metric_cov(const PhotocountingModel<S>& model, int n, int m) {
  model.require_no_dark_counts("pc_metric_cov");
  const S eta = model.eta;
  const S one_m_eta = S(1) - eta;
  const S two_m_eta = S(2) - eta;
  S sum = S(0);
  for (int k = std::max(n, m); k <= n + m; ++k) {
    S term = scalar_from_rational<S>(
        Rational(Combinatorics::factorial(k),
                 Combinatorics::factorial(k - n) * Combinatorics::factorial(k - m) *
                     Combinatorics::factorial(n + m - k)));
    for (int i = 0; i < 2 * k - n - m; ++i) term *= one_m_eta;
    for (int i = 0; i < k; ++i) term /= eta * two_m_eta;
    sum += term;
  }
  // prefactor eta^{n+m-1}/(2-eta)
  S pref = S(1) / (eta * two_m_eta);
  for (int i = 0; i < n + m; ++i) pref *= eta;
  return pref * sum;
}

/// Contravariant metric tensor (closed form, the analytic inverse).
/// Entries grow like ((1-eta)/eta)^{n+m} (eta-1)^{-2 min(n,m)}; tiny eta is
/// rejected because downstream pairings become meaningless in floating point.
template <operator_scalar S>
S pc_metric_contr(const PhotocountingModel<S>& model, int n, int m) {
  model.require_no_dark_counts("pc_metric_contr");
  if constexpr (real_scalar<S>) {
    if (model.eta < S(1e-3))
      throw std::domain_error("pc_metric_contr: eta < 1e-3, contravariant metric ill-conditioned");
  }
  const S eta = model.eta;
  if (eta == S(1)) return (n == m) ? S(1) : S(0);
  const S em1 = eta - S(1);
  const S inv_em1_sq = S(1) / (em1 * em1);
  S sum = S(0);
  for (int k = 0; k <= std::min(n, m); ++k) {
    S term = Combinatorics::binomial_as<S>(n, k) * Combinatorics::binomial_as<S>(m, k);
    for (int i = 0; i < k; ++i) term *= inv_em1_sq;
    sum += term;
  }
  S pref = S(1);
  for (int i = 0; i < n + m; ++i) pref *= em1 / eta;
  return pref * sum;
}

/// Window of the photocounting geometry assembled from the closed forms.
/// The metric tensors are the infinite-basis values, so hs_inner(covm, povm)
/// is exactly delta for every pair, while the finite window sum
/// sum_{k<W} g^{nk} g_{km} only approximates delta near the window edge.
template <real_scalar S>
MeasurementBasis<S> pc_basis(const PhotocountingModel<S>& model, int window,
                             Index truncation_dim = 0) {
  model.require_no_dark_counts("pc_basis");
  if (window < 1) throw std::invalid_argument("pc_basis: window must be >= 1");
  if (truncation_dim == 0)
    truncation_dim = adaptive_truncation<S>(S(1) - model.eta, S(window + 1), S(1e-13),
                                            std::max<Index>(64, 4 * window));
  std::vector<DiagonalOperator<S>> povm, covm;
  for (int n = 0; n < window; ++n) {
    povm.push_back(pc_povm_element(model, n, truncation_dim));
    covm.push_back(pc_covm_element(model, n, truncation_dim));
  }
  Matrix<S> g_cov(window, window), g_contr(window, window);
  for (int n = 0; n < window; ++n)
    for (int m = 0; m <= n; ++m) {
      g_cov(n, m) = g_cov(m, n) = pc_metric_cov(model, n, m);
      g_contr(n, m) = g_contr(m, n) = pc_metric_contr(model, n, m);
    }
  std::vector<int> effective(window);
  for (int n = 0; n < window; ++n) effective[n] = n;
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(g_cov);
  const S cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  return MeasurementBasis<S>(std::move(povm), std::move(covm), std::move(g_cov),
                             std::move(g_contr), std::move(effective), std::nullopt, cond);
}

enum class PcObservable {
  number,                   // n
  click_operator,           // C = eta n
  exp_generating,           // exp(t n)
  moment,                   // n^m
  normal_exp_generating,    // :exp(t n):
  normal_moment             // :n^m:
};

/// Closed-form contravariant coordinates B^n for the catalogued
/// observables; `param` is t for the generating functions and the order m
/// (as an integer value) for the moments.
template <real_scalar S>
CoordinateVector<S> pc_contravariant_catalog(const PhotocountingModel<S>& model,
                                             PcObservable kind, S param, int window) {
  model.require_no_dark_counts("pc_contravariant_catalog");
  const S eta = model.eta;
  Vector<S> v(window);
  switch (kind) {
    case PcObservable::number:
      for (int n = 0; n < window; ++n) v[n] = S(n) / eta;
      break;
    case PcObservable::click_operator:
      for (int n = 0; n < window; ++n) v[n] = S(n);
      break;
    case PcObservable::exp_generating: {
      const S base = S(1) + (std::exp(param) - S(1)) / eta;
      for (int n = 0; n < window; ++n) v[n] = std::pow(base, S(n));
      break;
    }
    case PcObservable::moment: {
      const int m = static_cast<int>(param);
      const S inv_eta = S(1) / eta;
      for (int n = 0; n < window; ++n) {
        std::vector<S> terms;
        for (int k = 0; k <= n; ++k) {
          S t = Combinatorics::binomial_as<S>(n, k) * std::pow(S(k), S(m));
          t *= std::pow(inv_eta, S(k)) * std::pow(S(1) - inv_eta, S(n - k));
          terms.push_back(t);
        }
        v[n] = detail::compensated_sum(terms);
      }
      break;
    }
    case PcObservable::normal_exp_generating: {
      const S base = S(1) + param / eta;
      for (int n = 0; n < window; ++n) v[n] = std::pow(base, S(n));
      break;
    }
    case PcObservable::normal_moment: {
      const int m = static_cast<int>(param);
      for (int n = 0; n < window; ++n) {
        if (n < m) {
          v[n] = S(0);
        } else {
          S t = scalar_from_rational<S>(
              Rational(Combinatorics::factorial(n), Combinatorics::factorial(n - m)));
          v[n] = t / std::pow(eta, S(m));
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("pc_contravariant_catalog: unknown observable kind");
  }
  return {std::move(v), std::nullopt, CoordKind::contravariant};
}

/// The photocounting generalized observable C = sum_n n Pi_n = eta*n
/// (closed form); not HS-class.
template <real_scalar S>
DiagonalOperator<S> pc_click_observable(const PhotocountingModel<S>& model,
                                        Index truncation_dim) {
  model.require_no_dark_counts("pc_click_observable");
  Vector<S> d(truncation_dim);
  for (Index k = 0; k < truncation_dim; ++k) d[k] = model.eta * S(k);
  return DiagonalOperator<S>::non_hs(std::move(d));
}

/// [S(eta_to, eta_from)]_m^n = C(n,m) eta_to^m (eta_from - eta_to)^{n-m} /
/// eta_from^n for n >= m, else 0: expansion of the eta_to POVM in the
/// eta_from basis. eta_to = 1 is the loss-removal special case.
template <operator_scalar S>
S pc_efficiency_transform(S eta_from, S eta_to, int m, int n) {
  if (!(eta_from > S(0) && eta_from <= S(1) && eta_to > S(0) && eta_to <= S(1)))
    throw std::invalid_argument("pc_efficiency_transform: efficiencies must be in (0,1]");
  if (n < m) return S(0);
  S v = Combinatorics::binomial_as<S>(n, m);
  for (int i = 0; i < m; ++i) v *= eta_to;
  for (int i = 0; i < n - m; ++i) v *= (eta_from - eta_to);
  for (int i = 0; i < n; ++i) v /= eta_from;
  return v;
}

/// Radial-quadrature evaluation of Tr(AB) through the Q-symbol
/// characteristic functions; cross-checks hs_inner for Gaussian-enveloped
/// diagonals. Throws "not applicable" when the integrand does not decay.
double trace_formula_check(const DiagonalOperator<double>& a,
                           const DiagonalOperator<double>& b);

namespace detail {

/// COVM diagonal through the normal-ordered Laguerre form, with the
/// polynomial built by the three-term recurrence (independent path used to
/// cross-check pc_covm_element).
Vector<double> pc_covm_diag_laguerre(double eta, int n, Index truncation_dim);

/// Photocounting POVM diagonal for general (eta, nu); used only by the
/// basis-transformation machinery (no closed COVM exists for nu > 0).
template <real_scalar S>
Vector<S> pc_povm_diag_with_dark(S eta, S nu, int n, Index dim) {
  Vector<S> d = Vector<S>::Zero(dim);
  const S e_nu = std::exp(-nu);
  for (Index k = 0; k < dim; ++k) {
    S sum = S(0);
    for (int j = 0; j <= std::min<int>(n, static_cast<int>(k)); ++j) {
      S t = scalar_from_rational<S>(Rational(
          Combinatorics::binomial(n, j) * Combinatorics::falling_factorial(static_cast<int>(k), j), 1));
      for (int i = 0; i < j; ++i) t *= eta;
      for (int i = 0; i < n - j; ++i) t *= nu;
      t *= std::pow(S(1) - eta, S(k - j));
      sum += t;
    }
    d[k] = e_nu * sum / Combinatorics::factorial_as<S>(n);
  }
  return d;
}

}  // namespace detail
}  // namespace povmgeo
