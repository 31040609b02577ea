#include "povmgeo/pseudoinv.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <sstream>

namespace povmgeo {

Matrix<double> moore_penrose(const Matrix<double>& T) {
  Eigen::CompleteOrthogonalDecomposition<Matrix<double>> cod(T);
  if (cod.rank() < T.rows()) {
    Eigen::JacobiSVD<Matrix<double>> svd(T);
    std::ostringstream oss;
    oss << "moore_penrose: rank-deficient matrix (rank " << cod.rank() << " of "
        << T.rows() << "), singular values:";
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      oss << " " << svd.singularValues()[i];
    throw std::domain_error(oss.str());
  }
  return cod.pseudoInverse();
}

PnReconstruction reconstruct_pn_least_squares(const ArrayDetector<double>& det,
                                              const ClickHistogram& histogram,
                                              int fock_window) {
  det.validate();
  const int N = det.n_detectors;
  if (histogram.counts.size() != N + 1)
    throw std::invalid_argument("reconstruct_pn_least_squares: histogram bin count mismatch");
  Eigen::VectorXd rho(N);
  for (int n = 0; n < N; ++n)
    rho[n] = static_cast<double>(histogram.counts[n]) / static_cast<double>(histogram.samples);
  const Matrix<double> T = t_matrix(det, fock_window);
  const Matrix<double> S = moore_penrose(T);
  PnReconstruction rec;
  rec.statistics = S * rho;
  rec.residual = (T * rec.statistics - rho).norm();
  return rec;
}

namespace {

// Dual basis of the photocounting POVM with dark counts, computed on a
// buffered index window; returns the diagonals of Lambda^n for n < want.
std::vector<Vector<long double>> pc_dual_windows(double eta, double nu, int want,
                                                 Index fock_dim, int buffer) {
  const int W = want + buffer;
  std::vector<Vector<long double>> lam(W);
  for (int n = 0; n < W; ++n)
    lam[n] = detail::pc_povm_diag_with_dark<long double>(
        static_cast<long double>(eta), static_cast<long double>(nu), n, fock_dim);
  Matrix<long double> G(W, W);
  for (int n = 0; n < W; ++n)
    for (int m = 0; m <= n; ++m) G(n, m) = G(m, n) = lam[n].dot(lam[m]);
  const Matrix<long double> Ginv = G.ldlt().solve(Matrix<long double>::Identity(W, W));
  std::vector<Vector<long double>> dual(want);
  for (int n = 0; n < want; ++n) {
    Vector<long double> d = Vector<long double>::Zero(fock_dim);
    for (int m = 0; m < W; ++m) d += Ginv(n, m) * lam[m];
    dual[n] = std::move(d);
  }
  return dual;
}

}  // namespace

Matrix<double> t_matrix_geometric(const ArrayDetector<double>& det, double eta, double nu,
                                  int fock_window) {
  const ArrayDetector<long double> dl{det.n_detectors, static_cast<long double>(eta),
                                      static_cast<long double>(nu)};
  const Index dim = array_fock_dim(dl);
  const auto dual = pc_dual_windows(eta, nu, fock_window, dim, 30);
  Matrix<double> T(det.n_detectors, fock_window);
  for (int m = 0; m < det.n_detectors; ++m) {
    const auto pi = array_povm_element(dl, m, dim);
    for (int n = 0; n < fock_window; ++n)
      T(m, n) = static_cast<double>(dual[n].dot(pi.diag()));
  }
  return T;
}

Matrix<double> s_matrix_geometric(const ArrayDetector<double>& det, double eta, double nu,
                                  int fock_window) {
  const ArrayDetector<long double> dl{det.n_detectors, static_cast<long double>(eta),
                                      static_cast<long double>(nu)};
  const MeasurementBasis<long double> basis = array_basis(dl);
  const Index dim = basis.fock_dim();
  Matrix<double> S(fock_window, det.n_detectors);
  for (int m = 0; m < fock_window; ++m) {
    const Vector<long double> lam = detail::pc_povm_diag_with_dark<long double>(
        static_cast<long double>(eta), static_cast<long double>(nu), m, dim);
    for (int n = 0; n < det.n_detectors; ++n)
      S(m, n) = static_cast<double>(basis.covm(n).diag().dot(lam));
  }
  return S;
}

}  // namespace povmgeo
