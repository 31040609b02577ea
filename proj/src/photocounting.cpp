#include "povmgeo/photocounting.hpp"

#include <cmath>
#include <vector>

namespace povmgeo {
namespace {

// Gauss-Legendre 16-point nodes/weights on [-1,1].
constexpr int kGL = 16;
const double kGLx[kGL] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGLw[kGL] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
double panel_integrate(F f, double lo, double hi, double panel) {
  double total = 0.0;
  for (double a = lo; a < hi; a += panel) {
    const double b = std::min(a + panel, hi);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGL; ++i) s += kGLw[i] * f(c + h * kGLx[i]);
    total += s * h;
  }
  return total;
}

// Q-symbol of a diagonal operator at radius^2 = u: e^{-u} sum a_k u^k / k!,
// evaluated through Poisson weights (stable for all u).
double q_symbol(const Vector<double>& a, double u) {
  double w = std::exp(-u);
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    s += a[k] * w;
    w *= u / static_cast<double>(k + 1);
  }
  return s;
}

// dominant geometric envelope ratio of a diagonal
double envelope_ratio(const Vector<double>& a) {
  double r = 0.0;
  for (Index k = 0; k + 1 < a.size(); ++k) {
    const double den = std::abs(a[k]);
    if (den > 1e-290) r = std::max(r, std::abs(a[k + 1]) / den);
  }
  return r;
}

}  // namespace

double trace_formula_check(const DiagonalOperator<double>& a,
                           const DiagonalOperator<double>& b) {
  const double ra = envelope_ratio(a.diag());
  const double rb = envelope_ratio(b.diag());
  if (ra >= 1.0 || rb >= 1.0)
    throw std::domain_error("trace_formula_check: not applicable (diagonal is not Gaussian-enveloped)");
  const double ca = 1.0 - ra, cb = 1.0 - rb;
  const double gamma = 1.0 / ca + 1.0 / cb - 1.0;
  if (gamma < 0.05)
    throw std::domain_error("trace_formula_check: not applicable (radial integrand does not decay)");

  // characteristic function of the Q symbol at radial frequency s, as a
  // Hankel-type transform in t = sqrt(u)
  const double cmin = std::min(ca, cb);
  const double t_max = std::sqrt(-std::log(1e-18) / cmin);
  auto char_q = [&](const Vector<double>& diag, double s) {
    auto f = [&](double t) { return 2.0 * t * q_symbol(diag, t * t) * std::cyl_bessel_j(0.0, 2.0 * s * t); };
    const double panel = (s > 1.0) ? std::min(0.5, 3.141592653589793 / (8.0 * s)) : 0.5;
    return panel_integrate(f, 0.0, t_max, panel) / 3.141592653589793;
  };

  const double s_max = std::sqrt(-std::log(1e-18) / gamma);
  auto radial = [&](double s) {
    return s * char_q(a.diag(), s) * char_q(b.diag(), s) * std::exp(s * s);
  };
  const double integral = panel_integrate(radial, 0.0, s_max, 0.125);
  const double pi = 3.141592653589793;
  return 2.0 * pi * pi * integral;
}

namespace detail {

Vector<double> pc_covm_diag_laguerre(double eta, int n, Index truncation_dim) {
  // coefficient arrays of L_j(x) via (j+1) L_{j+1} = (2j+1-x) L_j - j L_{j-1}
  std::vector<long double> prev{1.0L}, cur{1.0L, -1.0L};
  if (n == 0) cur = prev;
  for (int j = 1; j < n; ++j) {
    std::vector<long double> next(j + 2, 0.0L);
    for (int i = 0; i <= j; ++i) {
      next[i] += (2.0L * j + 1.0L) * cur[i];
      next[i + 1] -= cur[i];
    }
    for (int i = 0; i < j; ++i) next[i] -= static_cast<long double>(j) * prev[i];
    for (auto& c : next) c /= static_cast<long double>(j + 1);
    prev.swap(cur);
    cur.swap(next);
  }
  // <k|:e^{-n} L_n(n/(1-eta)):|k> = k! * [x^k] L_n(x/(1-eta))
  const long double w = 1.0L - static_cast<long double>(eta);
  long double pref = 1.0L;
  for (int i = 0; i < n; ++i) pref *= (static_cast<long double>(eta) - 1.0L) / eta;
  Vector<double> d = Vector<double>::Zero(truncation_dim);
  long double kfact = 1.0L, wpow = 1.0L;
  for (int k = 0; k <= n && k < truncation_dim; ++k) {
    if (k > 0) {
      kfact *= k;
      wpow *= w;
    }
    d[k] = static_cast<double>(pref * kfact * cur[k] / wpow);
  }
  return d;
}

}  // namespace detail
}  // namespace povmgeo
