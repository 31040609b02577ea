#pragma once

#include "povmgeo/diagonal_operator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace povmgeo {

enum class CoordKind { covariant, contravariant };

template <real_scalar S>
struct CoordinateVector {
  Vector<S> values;  // over the effective index set
  std::optional<Vector<S>> variance;
  CoordKind kind = CoordKind::covariant;
};

template <real_scalar S>
struct EstimationReport {
  S estimate;
  S hs_mismatch;    // ||R||_HS
  S error_bound;    // state-independent bound on |<R>|; equals hs_mismatch
  std::optional<S> statistical_error;
};

struct DegeneratePovmError : std::runtime_error {
  DegeneratePovmError(const std::string& what, double cond)
      : std::runtime_error(what), condition_number(cond) {}
  double condition_number;
};

/// A POVM family with its covariant/contravariant metric tensors and the
/// dual (COVM) basis. At most one element may be outside the HS class; it
/// is excluded from the effective index set, its metric rows/columns are
/// dropped and its COVM element is the zero operator. Immutable once built.
template <real_scalar S>
class MeasurementBasis {
 public:
  MeasurementBasis(std::vector<DiagonalOperator<S>> povm,
                   std::vector<DiagonalOperator<S>> covm, Matrix<S> g_cov,
                   Matrix<S> g_contr, std::vector<int> effective_set,
                   std::optional<int> removed, S condition_number)
      : povm_(std::move(povm)),
        covm_(std::move(covm)),
        g_cov_(std::move(g_cov)),
        g_contr_(std::move(g_contr)),
        effective_(std::move(effective_set)),
        removed_(removed),
        cond_(condition_number) {
    const Index e = static_cast<Index>(effective_.size());
    if (covm_.size() != povm_.size() || g_cov_.rows() != e || g_contr_.rows() != e)
      throw std::invalid_argument("MeasurementBasis: inconsistent components");
  }

  Index size() const { return static_cast<Index>(povm_.size()); }
  Index effective_size() const { return static_cast<Index>(effective_.size()); }
  const std::vector<int>& effective_set() const { return effective_; }
  std::optional<int> removed_index() const { return removed_; }
  const DiagonalOperator<S>& povm(int n) const { return povm_[n]; }
  const DiagonalOperator<S>& covm(int n) const { return covm_[n]; }
  const std::vector<DiagonalOperator<S>>& povm_elements() const { return povm_; }
  const std::vector<DiagonalOperator<S>>& covm_elements() const { return covm_; }
  /// Metric tensors over the effective index set.
  const Matrix<S>& g_cov() const { return g_cov_; }
  const Matrix<S>& g_contr() const { return g_contr_; }
  S condition_number() const { return cond_; }
  bool ill_conditioned() const { return cond_ > S(1e12); }
  Index fock_dim() const { return povm_.front().truncation_dim(); }

 private:
  std::vector<DiagonalOperator<S>> povm_, covm_;
  Matrix<S> g_cov_, g_contr_;
  std::vector<int> effective_;
  std::optional<int> removed_;
  S cond_;
};

namespace detail {

// The restricted Gram matrix is inverted in a wider type than the basis
// scalar: the duality targets sit near double round-off for N=10 arrays.
template <real_scalar S>
using wide_t = long double;

template <real_scalar S>
struct InversionResult {
  Matrix<S> inverse;
  S condition_number;
};

template <real_scalar S>
InversionResult<S> invert_spd(const Matrix<S>& g, const std::string& context) {
  using W = wide_t<S>;
  const Matrix<W> gw = g.template cast<W>();
  Eigen::SelfAdjointEigenSolver<Matrix<W>> es(gw);
  const W lmin = es.eigenvalues().minCoeff();
  const W lmax = es.eigenvalues().maxCoeff();
  const W cond = (lmin > W(0)) ? lmax / lmin : std::numeric_limits<W>::infinity();
  if (!(lmin > lmax * W(1e-14)))
    throw DegeneratePovmError(context + ": degenerate POVM (restricted metric not positive definite)",
                              static_cast<double>(cond));
  Eigen::LDLT<Matrix<W>> ldlt(gw);
  const Index n = gw.rows();
  Matrix<W> inv = ldlt.solve(Matrix<W>::Identity(n, n));
  // one step of iterative refinement
  inv += inv * (Matrix<W>::Identity(n, n) - gw * inv);
  return {inv.template cast<S>(), static_cast<S>(cond)};
}

}  // namespace detail

struct BuildOptions {
  double completeness_tol = 1e-8;
};

/// Build the measurement geometry from a POVM family: covariant metric by
/// HS pairing, contravariant metric by inversion of the restricted Gram
/// matrix, COVM elements per the dual-basis construction. Preconditions:
/// the family resolves the identity entrywise on the window and carries at
/// most one non-HS element.
template <real_scalar S>
MeasurementBasis<S> build_basis(std::vector<DiagonalOperator<S>> povm,
                                const BuildOptions& opt = {}) {
  if (povm.empty()) throw std::invalid_argument("build_basis: empty POVM");
  const Index dim = povm.front().truncation_dim();
  const int count = static_cast<int>(povm.size());

  Vector<S> unity = Vector<S>::Zero(dim);
  for (const auto& p : povm) {
    if (p.truncation_dim() != dim)
      throw std::invalid_argument("build_basis: POVM window mismatch");
    unity += p.diag();
  }
  if (((unity.array() - S(1)).abs() > S(opt.completeness_tol)).any())
    throw std::invalid_argument("build_basis: POVM does not resolve the identity within tolerance");

  std::vector<int> effective;
  std::optional<int> removed;
  for (int n = 0; n < count; ++n) {
    if (povm[n].hs_class()) {
      effective.push_back(n);
    } else {
      if (removed)
        throw std::invalid_argument("build_basis: more than one non-HS element");
      removed = n;
    }
  }

  const Index e = static_cast<Index>(effective.size());
  Matrix<S> g(e, e);
  for (Index i = 0; i < e; ++i)
    for (Index j = i; j < e; ++j)
      g(i, j) = g(j, i) = hs_inner(povm[effective[i]], povm[effective[j]]).value;

  auto inv = detail::invert_spd(g, "build_basis");

  using W = detail::wide_t<S>;
  std::vector<Vector<W>> povm_w;
  povm_w.reserve(effective.size());
  for (int idx : effective) povm_w.push_back(povm[idx].diag().template cast<W>());
  const Matrix<W> ginv_w = inv.inverse.template cast<W>();

  std::vector<DiagonalOperator<S>> covm;
  covm.reserve(count);
  for (int n = 0; n < count; ++n) {
    if (removed && n == *removed) {
      covm.push_back(DiagonalOperator<S>::truncated(Vector<S>::Zero(dim)));
      continue;
    }
    const Index i = static_cast<Index>(
        std::find(effective.begin(), effective.end(), n) - effective.begin());
    Vector<W> d = Vector<W>::Zero(dim);
    S tail = S(0);
    for (Index j = 0; j < e; ++j) {
      d += ginv_w(i, j) * povm_w[j];
      tail += std::abs(inv.inverse(i, j)) * povm[effective[j]].tail_bound();
    }
    covm.emplace_back(d.template cast<S>(), tail);
  }

  return MeasurementBasis<S>(std::move(povm), std::move(covm), std::move(g),
                             std::move(inv.inverse), std::move(effective), removed,
                             inv.condition_number);
}

/// B_n = <B, Pi_n> over the effective set.
template <real_scalar S>
CoordinateVector<S> covariant_coords(const MeasurementBasis<S>& basis,
                                     const DiagonalOperator<S>& b, bool windowed = false) {
  Vector<S> v(basis.effective_size());
  for (Index i = 0; i < basis.effective_size(); ++i)
    v[i] = hs_inner(b, basis.povm(basis.effective_set()[i]), windowed).value;
  return {std::move(v), std::nullopt, CoordKind::covariant};
}

/// Raising of indices: B^n = sum_m g^{mn} B_m.
template <real_scalar S>
CoordinateVector<S> raise_indices(const MeasurementBasis<S>& basis,
                                  const CoordinateVector<S>& cov) {
  if (cov.kind != CoordKind::covariant)
    throw std::invalid_argument("raise_indices: expected covariant coordinates");
  if (cov.values.size() != basis.effective_size())
    throw std::invalid_argument("raise_indices: size mismatch");
  return {basis.g_contr() * cov.values, std::nullopt, CoordKind::contravariant};
}

/// B^n = <Pi^n, B>.
template <real_scalar S>
CoordinateVector<S> contravariant_coords(const MeasurementBasis<S>& basis,
                                         const DiagonalOperator<S>& b) {
  if (!b.hs_class())
    throw std::domain_error("contravariant_coords: truncate first (operand is not HS-class)");
  Vector<S> v(basis.effective_size());
  for (Index i = 0; i < basis.effective_size(); ++i)
    v[i] = hs_inner(basis.covm(basis.effective_set()[i]), b).value;
  return {std::move(v), std::nullopt, CoordKind::contravariant};
}

/// Contravariant coordinates of a state, rho^n = <Pi^n, rho>. Query only:
/// unlike rho_n these are not probabilities and may be negative.
template <real_scalar S>
CoordinateVector<S> contravariant_state_coords(const MeasurementBasis<S>& basis,
                                               const DiagonalOperator<S>& rho) {
  return contravariant_coords(basis, rho);
}

namespace detail {

// Accepts probability vectors over the effective set, or over the full
// index set with the removed entry present (it is dropped: Pi^removed = 0).
template <real_scalar S>
Vector<S> effective_probabilities(const MeasurementBasis<S>& basis, const Vector<S>& p) {
  if (p.size() == basis.effective_size()) return p;
  if (p.size() == basis.size() && basis.removed_index()) {
    Vector<S> q(basis.effective_size());
    for (Index i = 0; i < basis.effective_size(); ++i)
      q[i] = p[basis.effective_set()[i]];
    return q;
  }
  throw std::invalid_argument("probability vector length matches neither the effective nor the full index set");
}

}  // namespace detail

/// Expectation estimate <B> = sum_n B^n rho_n with the state-independent
/// systematic-error bound ||R||_HS of Eq.-level geometry; statistical error
/// propagated from per-coordinate variances when present.
template <real_scalar S>
EstimationReport<S> estimate_expectation(const MeasurementBasis<S>& basis,
                                         const DiagonalOperator<S>& b,
                                         const CoordinateVector<S>& stats) {
  if (stats.kind != CoordKind::covariant)
    throw std::invalid_argument("estimate_expectation: statistics must be covariant coordinates");
  Vector<S> p = detail::effective_probabilities(basis, stats.values);
  const S tol = S(1e-9);
  if ((p.array() < -tol).any())
    throw std::invalid_argument("estimate_expectation: negative probabilities");
  if (p.sum() > S(1) + S(1e-6))
    throw std::invalid_argument("estimate_expectation: probabilities exceed 1");

  const CoordinateVector<S> cov = covariant_coords(basis, b);
  const CoordinateVector<S> con = raise_indices(basis, cov);

  using W = detail::wide_t<S>;
  const W norm2 = static_cast<W>(hs_inner(b, b).value);
  const W captured = cov.values.template cast<W>().dot(con.values.template cast<W>());
  W rad = norm2 - captured;
  if (rad < W(0)) {
    if (rad < W(-1e-8))
      throw std::domain_error("estimate_expectation: inconsistent metric/coordinates (radicand " +
                              std::to_string(static_cast<double>(rad)) + ")");
    rad = W(0);
  }
  const S mismatch = static_cast<S>(std::sqrt(rad));

  EstimationReport<S> rep;
  rep.estimate = con.values.dot(p);
  rep.hs_mismatch = mismatch;
  rep.error_bound = mismatch;
  if (stats.variance) {
    Vector<S> var = detail::effective_probabilities(basis, *stats.variance);
    rep.statistical_error = std::sqrt(con.values.array().square().matrix().dot(var));
  }
  return rep;
}

/// R = B - sum_n B^n Pi_n, the component of B outside the POVM span.
template <real_scalar S>
DiagonalOperator<S> orthogonal_completion(const MeasurementBasis<S>& basis,
                                          const DiagonalOperator<S>& b) {
  if (!b.hs_class()) throw std::domain_error("orthogonal_completion: operand is not HS-class");
  if (b.truncation_dim() != basis.fock_dim())
    throw std::invalid_argument("orthogonal_completion: window mismatch");
  const CoordinateVector<S> con = raise_indices(basis, covariant_coords(basis, b));
  Vector<S> d = b.diag();
  S tail = b.tail_bound();
  for (Index i = 0; i < basis.effective_size(); ++i) {
    const auto& pi = basis.povm(basis.effective_set()[i]);
    d -= con.values[i] * pi.diag();
    tail += std::abs(con.values[i]) * pi.tail_bound();
  }
  return DiagonalOperator<S>(std::move(d), tail);
}

/// Star function of a generalized observable: sum_n f(C^n) Pi_n with
/// C^n = <Pi^n, C>. The removed index contributes f(0) Pi_removed, which
/// keeps the result HS only when f(0) = 0.
template <real_scalar S>
DiagonalOperator<S> star_function(const MeasurementBasis<S>& basis,
                                  const DiagonalOperator<S>& c,
                                  const std::function<S(S)>& f) {
  const CoordinateVector<S> con = contravariant_coords(basis, c);
  Vector<S> coeffs = Vector<S>::Zero(basis.size());
  for (Index i = 0; i < basis.effective_size(); ++i)
    coeffs[basis.effective_set()[i]] = f(con.values[i]);
  if (basis.removed_index()) coeffs[*basis.removed_index()] = f(S(0));
  return linear_combination(basis.povm_elements(), coeffs);
}

/// diag[k] = spec(k) for k <= M, zero beyond: the truncated observable,
/// HS-class by construction.
template <real_scalar S>
DiagonalOperator<S> truncate_observable(const std::function<S(Index)>& b_spec, Index M,
                                        Index dim = 0) {
  if (M < 0) throw std::invalid_argument("truncate_observable: M must be >= 0");
  if (dim < M + 1) dim = M + 1;
  Vector<S> d = Vector<S>::Zero(dim);
  for (Index k = 0; k <= M; ++k) d[k] = b_spec(k);
  return DiagonalOperator<S>::truncated(std::move(d));
}

}  // namespace povmgeo
