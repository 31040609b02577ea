#include "povmgeo/phasespace.hpp"

#include <cmath>

namespace povmgeo {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::Matrix2d GaussianState::covariance() const {
  Eigen::Matrix2d V;
  V << std::cosh(2 * xi), std::sinh(2 * xi), std::sinh(2 * xi), std::cosh(2 * xi);
  return V;
}

FCoefficients<double> uhd_f_coefficients(const ArrayDetector<double>& det, double s) {
  det.validate();
  if (!(s < 1.0)) throw std::invalid_argument("uhd_f_coefficients: s must be < 1");
  const double t = 2.0 / (1.0 - s);
  FCoefficients<double> f = f_normal_exp(det, t);
  f.values *= 2.0 / (kPi * (1.0 - s));
  return f;
}

double uhd_hs_norm(double s) {
  if (!(s < 0.0))
    throw std::domain_error(
        "uhd_hs_norm: P(alpha;s) does not belong to the HS class for s >= 0; truncate first");
  return std::sqrt(-1.0 / (kPi * kPi * s));
}

DiagonalOperator<double> uhd_operator(double s, std::optional<int> M, Index dim) {
  if (!(s < 1.0)) throw std::invalid_argument("uhd_operator: s must be < 1");
  const double t = 2.0 / (1.0 - s);
  const double pref = 2.0 / (kPi * (1.0 - s));
  if (M) {
    if (*M < 0) throw std::invalid_argument("uhd_operator: M must be >= 0");
    if (dim < *M + 1) dim = *M + 1;
    Vector<double> d = Vector<double>::Zero(dim);
    double p = pref;
    for (int k = 0; k <= *M; ++k) {
      d[k] = p;
      p *= (1.0 - t);
    }
    return DiagonalOperator<double>::truncated(std::move(d));
  }
  if (!(s < 0.0))
    throw std::domain_error("uhd_operator: s >= 0 requires a truncation M");
  auto op = normal_exp_diag(t, dim);
  return DiagonalOperator<double>(pref * op.diag(), pref * op.tail_bound());
}

double wigner_squeezed_vacuum(const GaussianState& state, std::complex<double> alpha) {
  const Eigen::Matrix2d V = state.covariance();
  Eigen::Matrix2d J;
  J << 1, 0, 0, -1;
  const Eigen::Matrix2d A = J * V.inverse() * J;
  Eigen::Vector2cd lambda(alpha, std::conj(alpha));
  const std::complex<double> quad_c =
      (lambda.adjoint() * A.cast<std::complex<double>>() * lambda)(0, 0);
  const double quad = quad_c.real();
  return (2.0 / kPi) * std::exp(-quad);
}

double squeezed_vacuum_quasiprobability(const GaussianState& state,
                                        std::complex<double> alpha, double s) {
  const double sx2 = (std::exp(-2 * std::abs(state.xi)) - s) / 4.0;
  const double sy2 = (std::exp(2 * std::abs(state.xi)) - s) / 4.0;
  if (!(sx2 > 0.0))
    throw std::domain_error("squeezed_vacuum_quasiprobability: s >= exp(-2|xi|), distribution singular");
  double x = alpha.real(), y = alpha.imag();
  if (state.xi < 0) std::swap(x, y);  // squeezed axis follows the sign of xi
  return std::exp(-x * x / (2 * sx2) - y * y / (2 * sy2)) / (2 * kPi * std::sqrt(sx2 * sy2));
}

Eigen::VectorXd displaced_number_distribution(const GaussianState& state,
                                              std::complex<double> alpha, int M) {
  using C = std::complex<double>;
  const double ch = std::cosh(state.xi), sh = std::sinh(state.xi), th = std::tanh(state.xi);
  const C beta = -alpha;
  const bool adaptive = (M <= 0);
  int dim = adaptive
                ? std::max(32, static_cast<int>(2.0 * (std::norm(beta) + sh * sh) + 40.0))
                : M + 1;
  for (;;) {
    Eigen::VectorXcd c(dim);
    c[0] = std::sqrt(1.0 / ch) *
           std::exp(-0.5 * std::norm(beta) - 0.5 * th * std::conj(beta) * std::conj(beta));
    if (dim > 1) c[1] = (beta * ch + std::conj(beta) * sh) * c[0] / ch;
    for (int k = 1; k + 1 < dim; ++k)
      c[k + 1] = ((beta * ch + std::conj(beta) * sh) * c[k] -
                  sh * std::sqrt(static_cast<double>(k)) * c[k - 1]) /
                 (ch * std::sqrt(static_cast<double>(k + 1)));
    Eigen::VectorXd p = c.cwiseAbs2();
    const double tail = 1.0 - p.sum();
    if (tail <= 1e-10) return p;
    if (!adaptive)
      throw std::invalid_argument(
          "displaced_number_distribution: requested window leaves tail mass " +
          std::to_string(tail));
    dim += dim / 2 + 16;
    if (dim > 100000)
      throw std::runtime_error("displaced_number_distribution: cutoff runaway");
  }
}

Eigen::VectorXd click_probabilities(const ArrayDetector<double>& det,
                                    const Eigen::VectorXd& p) {
  det.validate();
  if (std::abs(p.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("click_probabilities: input is not normalized to 1e-10");
  const Index dim = std::max<Index>(array_fock_dim(det), p.size());
  Eigen::VectorXd rho(det.n_detectors + 1);
  for (int n = 0; n <= det.n_detectors; ++n) {
    const auto pi = array_povm_element(det, n, dim);
    double s = 0.0;
    for (Index k = 0; k < p.size(); ++k) s += p[k] * pi.coeff(k);
    if (s < 0.0) {
      if (s < -1e-12) throw std::domain_error("click_probabilities: negative probability");
      s = 0.0;
    }
    rho[n] = s;
  }
  return rho;
}

ClickHistogram sample_clicks(const Eigen::VectorXd& probabilities, std::int64_t samples,
                             CounterRng rng, std::complex<double> alpha) {
  if (samples < 1) throw std::invalid_argument("sample_clicks: samples must be >= 1");
  const Index bins = probabilities.size();
  Eigen::VectorXd cdf(bins);
  double acc = 0.0;
  for (Index i = 0; i < bins; ++i) {
    acc += probabilities[i];
    cdf[i] = acc;
  }
  ClickHistogram h;
  h.counts = Eigen::VectorXi::Zero(bins);
  h.samples = samples;
  h.alpha = alpha;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double u = rng.next_double() * acc;
    Index bin = 0;
    while (bin + 1 < bins && u >= cdf[bin]) ++bin;
    ++h.counts[bin];
  }
  return h;
}

namespace {

// contravariant coordinates and mismatch of P(alpha;s) (alpha-independent)
struct UhdCoords {
  Vector<double> contravariant;
  double mismatch;
};

UhdCoords uhd_contra_and_mismatch(const MeasurementBasis<double>& basis,
                                  const ArrayDetector<double>& det, double s,
                                  std::optional<int> M) {
  const int N = det.n_detectors;
  Vector<double> bcov(N);
  long double norm2;
  if (M) {
    const auto op = uhd_operator(s, M, basis.fock_dim());
    for (int n = 0; n < N; ++n)
      bcov[n] = hs_inner(op, basis.povm(n)).value;
    norm2 = static_cast<long double>(op.diag().squaredNorm());
  } else {
    bcov = covariant_coords_from_f(det, uhd_f_coefficients(det, s)).values;
    const double nrm = uhd_hs_norm(s);
    norm2 = static_cast<long double>(nrm) * nrm;
  }
  const Vector<long double> bcov_l = bcov.cast<long double>();
  const Vector<long double> bcon_l =
      basis.g_contr().cast<long double>() * bcov_l;
  long double rad = norm2 - bcov_l.dot(bcon_l);
  if (rad < 0.0L) {
    if (rad < -1e-8L)
      throw std::domain_error("uhd coordinates inconsistent with the metric");
    rad = 0.0L;
  }
  return {bcon_l.cast<double>(), static_cast<double>(std::sqrt(rad))};
}

}  // namespace

std::vector<ReconstructionRow> reconstruct_quasiprobability(
    const MeasurementBasis<double>& basis, const ArrayDetector<double>& det, double s,
    const std::vector<ClickHistogram>& histograms, std::optional<int> M) {
  if (histograms.empty())
    throw std::invalid_argument("reconstruct_quasiprobability: no histograms");
  if (!(s < 0.0) && !M)
    throw std::domain_error("reconstruct_quasiprobability: s >= 0 requires a truncation M");
  const int N = det.n_detectors;
  const UhdCoords uc = uhd_contra_and_mismatch(basis, det, s, M);

  std::vector<ReconstructionRow> rows;
  rows.reserve(histograms.size());
  for (const auto& h : histograms) {
    if (h.counts.size() != N + 1)
      throw std::invalid_argument("reconstruct_quasiprobability: histogram bin count mismatch");
    if (h.counts.sum() != h.samples)
      throw std::invalid_argument("reconstruct_quasiprobability: counts do not sum to samples");
    double est = 0.0, second = 0.0;
    for (int n = 0; n < N; ++n) {  // removed index N dropped: Pi^N = 0
      const double f = static_cast<double>(h.counts[n]) / static_cast<double>(h.samples);
      est += uc.contravariant[n] * f;
      second += uc.contravariant[n] * uc.contravariant[n] * f;
    }
    const double var = std::max(0.0, (second - est * est) / static_cast<double>(h.samples));
    rows.push_back({h.alpha, s, est, std::sqrt(var), uc.mismatch});
  }
  return rows;
}

std::vector<UhdMismatchRow> uhd_mismatch_curve(const ArrayDetector<double>& det,
                                               const std::vector<double>& s_grid,
                                               const std::vector<std::optional<int>>& truncations) {
  const MeasurementBasis<double> basis = array_basis(det);
  std::vector<UhdMismatchRow> rows;
  for (double s : s_grid) {
    for (const auto& M : truncations) {
      if (!M && !(s < 0.0)) continue;  // untruncated operator undefined for s >= 0
      const UhdCoords uc = uhd_contra_and_mismatch(basis, det, s, M);
      rows.push_back({s, M, uc.mismatch});
    }
  }
  return rows;
}

}  // namespace povmgeo
