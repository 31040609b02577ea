#pragma once

#include "povmgeo/clickdet.hpp"
#include "povmgeo/phasespace.hpp"
#include "povmgeo/photocounting.hpp"

namespace povmgeo {

/// Basis-transformation matrix T between the photocounting POVM and the
/// array-detector POVM: rows m = click counts 0..N-1, columns n = photon
/// numbers 0..K-1, T[m][n] = C(N,m) m! S(n,m) / N^n. Independent of eta
/// and nu.
template <operator_scalar S>
Matrix<S> t_matrix(const ArrayDetector<S>& det, int fock_window) {
  det.validate();
  const int N = det.n_detectors;
  if (fock_window < N) throw std::invalid_argument("t_matrix: fock_window must be >= N");
  Matrix<S> T(N, fock_window);
  for (int m = 0; m < N; ++m) {
    const BigInt pre = Combinatorics::binomial(N, m) * Combinatorics::factorial(m);
    BigInt Npow = 1;
    for (int n = 0; n < fock_window; ++n) {
      T(m, n) = scalar_from_rational<S>(Rational(pre * Combinatorics::stirling2(n, m), Npow));
      Npow *= N;
    }
  }
  return T;
}

/// Moore-Penrose pseudoinverse through an orthogonal factorization;
/// requires full row rank and reports the singular values otherwise.
Matrix<double> moore_penrose(const Matrix<double>& T);

/// The Stirling-first-kind alternative pseudoinverse,
/// S~[m][n] = C(N,n)^{-1} (N^m/n!) (-1)^{m-n} c(n,m); a right inverse of T
/// that violates Moore-Penrose condition (iv).
template <operator_scalar S>
Matrix<S> stirling_pseudoinverse(const ArrayDetector<S>& det, int fock_window) {
  det.validate();
  const int N = det.n_detectors;
  Matrix<S> St(fock_window, N);
  BigInt Npow = 1;
  for (int m = 0; m < fock_window; ++m) {
    for (int n = 0; n < N; ++n) {
      const BigInt s1 = Combinatorics::stirling1_signed(n, m);
      Rational q(((m - n) % 2 != 0 ? -s1 : s1) * Npow,
                 Combinatorics::binomial(N, n) * Combinatorics::factorial(n));
      St(m, n) = scalar_from_rational<S>(q);
    }
    Npow *= N;
  }
  return St;
}

struct PnReconstruction {
  Eigen::VectorXd statistics;  // approximate photon-number distribution (may leave [0,1])
  double residual;             // ||T p - rho|| in the click space
};

/// Least-squares photon-number reconstruction p = S rho from a click
/// histogram; the raw pseudoinverse, no regularization.
PnReconstruction reconstruct_pn_least_squares(const ArrayDetector<double>& det,
                                              const ClickHistogram& histogram,
                                              int fock_window);

/// T computed by its geometric definition <Lambda^n(eta,nu), Pi_m(eta,nu)>
/// with the photocounting dual basis inverted numerically on a buffered
/// window; used to verify that T does not depend on eta and nu.
Matrix<double> t_matrix_geometric(const ArrayDetector<double>& det, double eta, double nu,
                                  int fock_window);

/// S computed by its geometric definition <Pi^n(eta,nu), Lambda_m(eta,nu)>:
/// contravariant coordinates of the photocounting POVM elements in the
/// array basis.
Matrix<double> s_matrix_geometric(const ArrayDetector<double>& det, double eta, double nu,
                                  int fock_window);

}  // namespace povmgeo
