#pragma once

#include "povmgeo/clickdet.hpp"
#include "povmgeo/rng.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace povmgeo {

/// Single-mode squeezed vacuum with squeezing parameter xi; pure, det V = 1.
struct GaussianState {
  double xi = 0.0;
  /// Covariance matrix [[cosh 2xi, sinh 2xi], [sinh 2xi, cosh 2xi]].
  Eigen::Matrix2d covariance() const;
};

struct PhaseSpacePoint {
  std::complex<double> alpha;
  double s;  // ordering parameter, s <= 1
};

/// Empirical counts of n-click events (bins 0..N) at one phase-space point.
struct ClickHistogram {
  Eigen::VectorXi counts;
  std::int64_t samples = 0;
  std::complex<double> alpha;
};

/// F_{N;k} for the operator P(alpha; s): the normal-exponent family at
/// t = 2/(1-s) scaled by 2/(pi(1-s)). Ideal case reduces to
/// 2N / (pi [N(1-s) + k(1+s)]).
FCoefficients<double> uhd_f_coefficients(const ArrayDetector<double>& det, double s);

/// ||P(alpha;s)||_HS = sqrt(-1/(pi^2 s)), defined for s < 0 only.
double uhd_hs_norm(double s);

/// Diagonal of P(alpha;s) in the displaced frame: (2/(pi(1-s))) (1-t)^k,
/// truncated at M when given (required for s >= 0).
DiagonalOperator<double> uhd_operator(double s, std::optional<int> M, Index dim);

/// Wigner function of the squeezed vacuum, Eq.-level matrix form
/// (2/pi) exp(-lambda^dag J V^{-1} J lambda).
double wigner_squeezed_vacuum(const GaussianState& state, std::complex<double> alpha);

/// s-parametrized quasiprobability of the squeezed vacuum (Gaussian closed
/// form); requires s < exp(-2|xi|).
double squeezed_vacuum_quasiprobability(const GaussianState& state,
                                        std::complex<double> alpha, double s);

/// Photon-number distribution of D(-alpha) S(xi)|0>, the state measured at
/// phase-space point alpha. Adaptive cutoff when M = 0; throws if the
/// requested window leaves more than 1e-10 tail mass.
Eigen::VectorXd displaced_number_distribution(const GaussianState& state,
                                              std::complex<double> alpha, int M = 0);

/// Born rule for diagonal states: rho_n = sum_k p_k <k|Pi_n|k>, bins 0..N.
Eigen::VectorXd click_probabilities(const ArrayDetector<double>& det,
                                    const Eigen::VectorXd& p);

/// Multinomial draw, deterministic for a fixed stream.
ClickHistogram sample_clicks(const Eigen::VectorXd& probabilities, std::int64_t samples,
                             CounterRng rng, std::complex<double> alpha = 0.0);

struct ReconstructionRow {
  std::complex<double> alpha;
  double s;
  double estimate;
  double statistical_error;  // multinomial delta method, covariances included
  double hs_mismatch;
};

/// Expectation of P(alpha;s) from click histograms via the contravariant
/// coordinates of the (possibly truncated) operator. M is required for
/// s >= 0, where the full operator is not HS-class.
std::vector<ReconstructionRow> reconstruct_quasiprobability(
    const MeasurementBasis<double>& basis, const ArrayDetector<double>& det, double s,
    const std::vector<ClickHistogram>& histograms, std::optional<int> M = std::nullopt);

struct UhdMismatchRow {
  double s;
  std::optional<int> truncation;  // nullopt = untruncated
  double hs_mismatch;
};

/// HS mismatch of P(alpha;s) and of its truncations across an s grid;
/// untruncated rows are emitted only where the operator is HS-class (s<0).
std::vector<UhdMismatchRow> uhd_mismatch_curve(const ArrayDetector<double>& det,
                                               const std::vector<double>& s_grid,
                                               const std::vector<std::optional<int>>& truncations);

}  // namespace povmgeo
