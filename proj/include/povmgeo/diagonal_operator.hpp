#pragma once

#include "povmgeo/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace povmgeo {

namespace detail {

// Compensated dot product (TwoProductFMA + Neumaier). The photocounting
// COVM/POVM pairings cancel across terms up to ~1e9 in magnitude; a plain
// sum would lose the 1e-8 duality target there.
template <real_scalar S>
S compensated_dot(const Vector<S>& a, const Vector<S>& b) {
  S sum = S(0), comp = S(0);
  const Index n = a.size();
  for (Index i = 0; i < n; ++i) {
    const S p = a[i] * b[i];
    const S perr = std::fma(a[i], b[i], -p);
    const S t = sum + p;
    if (std::abs(sum) >= std::abs(p))
      comp += (sum - t) + p;
    else
      comp += (p - t) + sum;
    sum = t;
    comp += perr;
  }
  return sum + comp;
}

template <real_scalar S>
S compensated_sum(const std::vector<S>& xs) {
  S sum = S(0), comp = S(0);
  for (const S& x : xs) {
    const S t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

/// A Hermitian operator diagonal in the Fock basis, truncated at
/// truncation_dim entries. tail_bound certifies the l2 norm of the
/// neglected entries k >= truncation_dim; an infinite tail bound marks an
/// operator outside the Hilbert-Schmidt class (for exact scalars the flag
/// is carried separately). Values are immutable after construction.
template <operator_scalar S>
class DiagonalOperator {
 public:
  DiagonalOperator(Vector<S> diag, S tail_bound)
      : diag_(std::move(diag)), tail_bound_(std::move(tail_bound)), hs_(true) {
    if (diag_.size() == 0) throw std::invalid_argument("empty diagonal");
    if constexpr (real_scalar<S>) {
      if (std::isnan(tail_bound_) || tail_bound_ < S(0))
        throw std::invalid_argument("tail bound must be non-negative");
      hs_ = std::isfinite(tail_bound_);
    } else {
      if (tail_bound_ < 0) throw std::invalid_argument("tail bound must be non-negative");
    }
  }

  /// Finite-support operator: every entry beyond the window is exactly zero.
  static DiagonalOperator truncated(Vector<S> diag) {
    return DiagonalOperator(std::move(diag), S(0));
  }

  /// Operator declared outside the HS class (e.g. the identity).
  static DiagonalOperator non_hs(Vector<S> diag) {
    DiagonalOperator op(std::move(diag), S(0));
    op.hs_ = false;
    if constexpr (real_scalar<S>)
      op.tail_bound_ = std::numeric_limits<S>::infinity();
    return op;
  }

  Index truncation_dim() const { return diag_.size(); }
  const Vector<S>& diag() const { return diag_; }
  S coeff(Index k) const { return k < diag_.size() ? diag_[k] : S(0); }
  bool hs_class() const { return hs_; }
  S tail_bound() const { return tail_bound_; }

  /// Widen the window with zeros. The recorded tail bound still covers the
  /// (unrepresented) true entries beyond the original window.
  DiagonalOperator zero_padded(Index new_dim) const {
    if (new_dim < diag_.size()) throw std::invalid_argument("zero_padded cannot shrink");
    Vector<S> d = Vector<S>::Zero(new_dim);
    d.head(diag_.size()) = diag_;
    DiagonalOperator op(std::move(d), hs_ ? tail_bound_ : S(0));
    op.hs_ = hs_;
    if constexpr (real_scalar<S>)
      if (!hs_) op.tail_bound_ = std::numeric_limits<S>::infinity();
    return op;
  }

  bool is_povm_element(S tol) const {
    for (Index k = 0; k < diag_.size(); ++k)
      if (diag_[k] < -tol || diag_[k] > S(1) + tol) return false;
    return true;
  }

 private:
  Vector<S> diag_;
  S tail_bound_;
  bool hs_;
};

template <operator_scalar S>
struct HsProduct {
  S value;
  S trunc_error;  // bound on the neglected-tail contribution
};

/// Hilbert-Schmidt inner product Tr(AB) over the common truncation window.
/// Non-HS operands are rejected unless the caller asks for the formal
/// windowed sum.
template <operator_scalar S>
HsProduct<S> hs_inner(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b,
                      bool windowed = false) {
  if (!windowed && (!a.hs_class() || !b.hs_class()))
    throw std::domain_error("hs_inner: operand is not HS-class (pass windowed=true for the formal sum)");
  if (a.truncation_dim() != b.truncation_dim())
    throw std::invalid_argument("hs_inner: operands must share a truncation window");
  S value;
  if constexpr (real_scalar<S>) {
    value = detail::compensated_dot<S>(a.diag(), b.diag());
  } else {
    value = a.diag().dot(b.diag());
  }
  S err = S(0);
  if (a.hs_class() && b.hs_class()) err = a.tail_bound() * b.tail_bound();
  return {value, err};
}

/// HS norm with tail-bound propagation; rejects non-HS operators.
template <real_scalar S>
S hs_norm(const DiagonalOperator<S>& a) {
  if (!a.hs_class()) throw std::domain_error("hs_norm: operator is not HS-class");
  return std::sqrt(hs_inner(a, a).value);
}

/// diag[k] = (1-c)^k, the diagonal of :exp(-c n)):. HS-class iff |1-c| < 1.
template <operator_scalar S>
DiagonalOperator<S> normal_exp_diag(S c, Index truncation_dim) {
  if (truncation_dim < 1) throw std::invalid_argument("truncation_dim must be >= 1");
  Vector<S> d(truncation_dim);
  const S r = S(1) - c;
  S p = S(1);
  for (Index k = 0; k < truncation_dim; ++k) {
    d[k] = p;
    p *= r;
  }
  if constexpr (real_scalar<S>) {
    if (std::abs(r) < S(1)) {
      // l2 tail of a geometric diagonal: |r|^D / sqrt(1 - r^2)
      const S tail = std::pow(std::abs(r), static_cast<S>(truncation_dim)) /
                     std::sqrt(S(1) - r * r);
      return DiagonalOperator<S>(std::move(d), tail);
    }
    return DiagonalOperator<S>::non_hs(std::move(d));
  } else {
    using boost::multiprecision::abs;
    if (abs(r) < 1) return DiagonalOperator<S>(std::move(d), S(0));
    return DiagonalOperator<S>::non_hs(std::move(d));
  }
}

/// Window size making a geometric l2 tail coeff*r^D/sqrt(1-r^2) fall below
/// `target`; never below `minimum`.
template <real_scalar S>
Index adaptive_truncation(S ratio, S coeff = S(1), S target = S(1e-13),
                          Index minimum = 64) {
  if (!(ratio >= S(0) && ratio < S(1)))
    throw std::invalid_argument("adaptive_truncation: ratio must be in [0,1)");
  if (ratio == S(0)) return minimum;
  const S c = coeff / std::sqrt(S(1) - ratio * ratio);
  S need = std::log(target / c) / std::log(ratio);
  Index dim = (need > S(0)) ? static_cast<Index>(need) + 1 : Index(1);
  return std::max(dim, minimum);
}

/// sum_i coeffs[i] * ops[i] with tail bounds combined by the triangle
/// inequality. All operands share one window.
template <operator_scalar S>
DiagonalOperator<S> linear_combination(const std::vector<DiagonalOperator<S>>& ops,
                                       const Vector<S>& coeffs) {
  if (ops.empty() || coeffs.size() != static_cast<Index>(ops.size()))
    throw std::invalid_argument("linear_combination: size mismatch");
  const Index dim = ops.front().truncation_dim();
  Vector<S> d = Vector<S>::Zero(dim);
  S tail = S(0);
  bool hs = true;
  for (size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].truncation_dim() != dim)
      throw std::invalid_argument("linear_combination: window mismatch");
    d += coeffs[static_cast<Index>(i)] * ops[i].diag();
    if (!ops[i].hs_class()) {
      if (coeffs[static_cast<Index>(i)] != S(0)) hs = false;
      continue;
    }
    if constexpr (real_scalar<S>)
      tail += std::abs(coeffs[static_cast<Index>(i)]) * ops[i].tail_bound();
    else
      tail += abs(coeffs[static_cast<Index>(i)]) * ops[i].tail_bound();
  }
  if (!hs) return DiagonalOperator<S>::non_hs(std::move(d));
  return DiagonalOperator<S>(std::move(d), tail);
}

}  // namespace povmgeo
