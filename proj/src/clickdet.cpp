#include "povmgeo/clickdet.hpp"

namespace povmgeo {

std::vector<ProfileRow> mismatch_profile(const ArrayDetector<double>& det,
                                         ProfileFamily family,
                                         const std::vector<double>& grid,
                                         std::optional<int> truncation) {
  using LD = long double;
  const ArrayDetector<LD> dl{det.n_detectors, static_cast<LD>(det.eta),
                             static_cast<LD>(det.nu)};
  const bool moments = family == ProfileFamily::truncated_moment ||
                       family == ProfileFamily::truncated_normal_moment;
  if (moments && !truncation)
    throw std::domain_error(
        "mismatch_profile: truncation required (photon-number moments are not HS-class)");

  const MeasurementBasis<LD> basis = array_basis(dl);
  const int N = det.n_detectors;

  std::vector<DiagonalOperator<LD>> povm;
  if (moments) povm = array_povm_all(dl, basis.fock_dim());

  std::vector<ProfileRow> rows;
  rows.reserve(grid.size());
  for (double param : grid) {
    Vector<LD> bcov(N);
    LD norm2;
    switch (family) {
      case ProfileFamily::fock_projector: {
        const int m = static_cast<int>(param);
        bcov = fock_projector_coords(dl, m);
        norm2 = 1.0L;
        break;
      }
      case ProfileFamily::exp_decay: {
        const LD t = static_cast<LD>(param);
        if (!(t > 0)) throw std::invalid_argument("mismatch_profile: exp family needs t > 0");
        bcov = covariant_coords_from_f(dl, f_exp(dl, t)).values;
        norm2 = 1.0L / (1.0L - std::exp(-2.0L * t));
        break;
      }
      case ProfileFamily::normal_exp: {
        const LD t = static_cast<LD>(param);
        if (!(t > 0 && t < 2))
          throw std::domain_error(
              "mismatch_profile: :exp(-t n): is HS-class only for t in (0,2)");
        bcov = covariant_coords_from_f(dl, f_normal_exp(dl, t)).values;
        norm2 = 1.0L / (t * (2.0L - t));
        break;
      }
      case ProfileFamily::truncated_moment:
      case ProfileFamily::truncated_normal_moment: {
        const int m = static_cast<int>(param);
        const int M = *truncation;
        Vector<LD> b = Vector<LD>::Zero(M + 1);
        for (int j = 0; j <= M; ++j) {
          if (family == ProfileFamily::truncated_moment) {
            b[j] = std::pow(static_cast<LD>(j), static_cast<LD>(m));
          } else {
            b[j] = (j >= m) ? Combinatorics::factorial_as<LD>(j) /
                                  Combinatorics::factorial_as<LD>(j - m)
                            : 0.0L;
          }
        }
        if (m == 0) b[0] = 1.0L;  // 0^0
        for (int n = 0; n < N; ++n) {
          LD s = 0.0L;
          for (int j = 0; j <= M; ++j) s += b[j] * povm[n].coeff(j);
          bcov[n] = s;
        }
        norm2 = b.squaredNorm();
        break;
      }
      default:
        throw std::invalid_argument("mismatch_profile: unknown family");
    }
    const Vector<LD> bcon = basis.g_contr() * bcov;
    LD rad = norm2 - bcov.dot(bcon);
    if (rad < 0.0L) {
      if (rad < -1e-8L)
        throw std::domain_error("mismatch_profile: inconsistent metric/coordinates");
      rad = 0.0L;
    }
    rows.push_back(ProfileRow{param, static_cast<double>(std::sqrt(norm2)),
                              static_cast<double>(std::sqrt(rad)),
                              static_cast<double>(basis.condition_number())});
  }
  return rows;
}

}  // namespace povmgeo
