#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "povmgeo/clickdet.hpp"
#include "povmgeo/rng.hpp"

#include <cmath>

using namespace povmgeo;

namespace {

// independent oracle for the ideal-detector click distribution:
// P(n clicks | k photons) = C(N,n) n! S(k,n) / N^k (occupancy counting),
// thinned binomially for eta < 1. Only nu = 0.
double click_prob_oracle(int N, double eta, int n, int k) {
  double p = 0.0;
  for (int j = n; j <= k; ++j) {
    const double thin = static_cast<double>(Combinatorics::binomial(k, j)) *
                        std::pow(eta, j) * std::pow(1.0 - eta, k - j);
    const double occ =
        Rational(Combinatorics::binomial(N, n) * Combinatorics::factorial(n) *
                     Combinatorics::stirling2(j, n),
                 boost::multiprecision::pow(BigInt(N), static_cast<unsigned>(j)))
            .convert_to<double>();
    p += thin * occ;
  }
  return p;
}

// brute-force Fock Gram sum for two array POVM elements
long double fock_gram_oracle(const ArrayDetector<long double>& a,
                             const ArrayDetector<long double>& b, int n, int m) {
  const Index dim = std::max(array_fock_dim(a), array_fock_dim(b)) * 2;
  const auto pa = array_povm_element(a, n, dim);
  const auto pb = array_povm_element(b, m, dim);
  return hs_inner(pa, pb, true).value;
}

}  // namespace

TEST_CASE("array POVM elements: worked values and oracle") {
  // N=1, eta=1: on-off detector, Pi_0 = |0><0|, Pi_1 = 1 - |0><0|
  const ArrayDetector<double> onoff{1, 1.0, 0.0};
  const auto p0 = array_povm_element(onoff, 0, 16);
  const auto p1 = array_povm_element(onoff, 1, 16);
  CHECK(p0.coeff(0) == doctest::Approx(1.0));
  CHECK(p0.coeff(1) == doctest::Approx(0.0));
  CHECK(p1.coeff(0) == doctest::Approx(0.0));
  CHECK(p1.coeff(3) == doctest::Approx(1.0));
  CHECK(!p1.hs_class());

  // N=2, eta=1, n=1, k=1: direct normal-ordering gives exactly 1
  // (required by the resolution of identity; see the click-probability oracle)
  const ArrayDetector<double> two{2, 1.0, 0.0};
  CHECK(array_povm_element(two, 1, 16).coeff(1) == doctest::Approx(1.0));
  CHECK(click_prob_oracle(2, 1.0, 1, 1) == doctest::Approx(1.0));

  // general element entries against the occupancy/thinning oracle
  for (const auto& [N, eta] : {std::pair{4, 1.0}, {4, 0.7}, {8, 0.7}, {10, 0.55}}) {
    const ArrayDetector<double> det{N, eta, 0.0};
    const Index dim = array_fock_dim(det);
    for (int n = 0; n <= N; ++n) {
      const auto pi = array_povm_element(det, n, dim);
      CHECK(pi.is_povm_element(1e-12));
      for (int k = 0; k < 24; ++k)
        CHECK(pi.coeff(k) ==
              doctest::Approx(click_prob_oracle(N, eta, n, k)).epsilon(1e-10));
    }
  }

  // vacuum input at nu = 0.1, N = 8: rho_0 = e^{-nu}
  const ArrayDetector<double> dark{8, 0.7, 0.1};
  CHECK(array_povm_element(dark, 0, 64).coeff(0) == doctest::Approx(std::exp(-0.1)));
}

TEST_CASE("resolution of identity on the acceptance grid") {
  for (const auto& [N, eta, nu] :
       {std::tuple{4, 1.0, 0.0}, {8, 0.7, 0.0}, {8, 0.7, 0.1}, {10, 1.0, 0.0}}) {
    const ArrayDetector<double> det{N, eta, nu};
    const Index dim = array_fock_dim(det);
    Vector<double> unity = Vector<double>::Zero(dim);
    for (int n = 0; n <= N; ++n) unity += array_povm_element(det, n, dim).diag();
    CHECK((unity.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("covariant metric: closed form vs Fock oracle, singularity flag") {
  for (const auto& [N, eta, nu] :
       {std::tuple{4, 1.0, 0.0}, {8, 0.7, 0.0}, {8, 0.7, 0.1}, {10, 1.0, 0.0},
        std::tuple{10, 0.7, 0.1}}) {
    const ArrayDetector<long double> det{N, static_cast<long double>(eta),
                                         static_cast<long double>(nu)};
    for (int n = 0; n < N; ++n)
      for (int m = 0; m <= n; ++m) {
        const long double closed = array_metric_cov(det, n, m);
        const long double oracle = fock_gram_oracle(det, det, n, m);
        CHECK(std::abs(static_cast<double>(closed - oracle)) < 1e-9);
      }
    CHECK(std::isinf(static_cast<double>(array_metric_cov(det, N, N))));
    // exactly one divergent entry: the off-column values stay finite
    for (int n = 0; n < N; ++n)
      CHECK(std::isfinite(static_cast<double>(array_metric_cov(det, n, N))));
  }
}

TEST_CASE("cross-basis Gram values N=4 vs N'=8") {
  const ArrayDetector<long double> a{4, 1.0L, 0.0L};
  const ArrayDetector<long double> b{8, 0.7L, 0.05L};
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 8; ++m) {
      const long double closed = array_cross_gram(a, b, n, m);
      const long double oracle = fock_gram_oracle(a, b, n, m);
      CHECK(std::abs(static_cast<double>(closed - oracle)) < 1e-9);
    }
}

TEST_CASE("exact rational reduction: general Gram form equals the ideal special") {
  using R = Rational;
  for (int N : {4, 7, 10}) {
    const ArrayDetector<R> det{N, R(1), R(0)};
    for (int n = 0; n < N; ++n)
      for (int m = 0; m <= n; ++m) {
        // the ideal-case double binomial sum with 1/(1 - (n-l)(m-k)/N^2)
        R special(0);
        for (int k = 0; k <= m; ++k)
          for (int l = 0; l <= n; ++l) {
            R term = R(Combinatorics::binomial(m, k) * Combinatorics::binomial(n, l));
            if ((k + l) % 2 != 0) term = -term;
            special += term / (R(1) - R((n - l) * (m - k), N * N));
          }
        special *= R(Combinatorics::binomial(N, n) * Combinatorics::binomial(N, m));
        CHECK(array_cross_gram(det, det, n, m) == special);
      }
  }
}

TEST_CASE("F-coefficient families: ideal specials") {
  const ArrayDetector<double> det{10, 1.0, 0.0};
  // exp family: k = 0 gives 1 for every t
  for (double t : {0.2, 1.0, 3.0})
    CHECK(f_exp(det, t).values[0] == doctest::Approx(1.0));
  // normal_exp at t = 1: all coefficients equal 1
  const auto f1 = f_normal_exp(det, 1.0);
  for (int k = 0; k < 10; ++k) CHECK(f1.values[k] == doctest::Approx(1.0));
  // normal moment m=1, N=10, k=5: m! N k^m/(N-k)^{m+1} = 10*5/25 = 2
  CHECK(f_normal_moment(det, 1).values[5] == doctest::Approx(2.0));
  // dispatch wrapper
  CHECK(f_coefficients(det, FFamily::normal_moment, 1.0).values[5] == doctest::Approx(2.0));
}

TEST_CASE("exact rational reductions to the ideal F formulas") {
  using R = Rational;
  for (int N : {4, 8, 10}) {
    const ArrayDetector<R> det{N, R(1), R(0)};
    // exp family in the variable x = e^{-t}
    for (const R x : {R(1, 2), R(3, 7), R(9, 10)}) {
      const auto general = detail::f_exp_at(det, x);
      for (int k = 0; k < N; ++k)
        CHECK(general[k] == R(N) / (R(N) - R(k) * x));
    }
    // normal exp at rational t
    for (const R t : {R(1, 10), R(1), R(19, 10)}) {
      const auto general = f_normal_exp(det, t).values;
      for (int k = 0; k < N; ++k)
        CHECK(general[k] == R(N) / (R(N) - R(k) * (R(1) - t)));
    }
    // moments via the Stirling expansion at x = k/N
    for (int m : {1, 2, 4}) {
      const auto general = f_moment(det, m).values;
      for (int k = 0; k < N; ++k) {
        R special(0);
        const R x(k, N);
        for (int j = 0; j <= m; ++j)
          special += R(Combinatorics::stirling2(m, j) * Combinatorics::factorial(j)) *
                     detail::pow_int(x, j) / detail::pow_int(R(1) - x, j + 1);
        CHECK(general[k] == special);
      }
    }
    // normal moments: m! N k^m / (N-k)^{m+1}
    for (int m : {1, 2, 3}) {
      const auto general = f_normal_moment(det, m).values;
      for (int k = 0; k < N; ++k)
        CHECK(general[k] == R(Combinatorics::factorial(m)) * R(N) *
                                detail::pow_int(R(k), m) /
                                detail::pow_int(R(N - k), m + 1));
    }
  }
}

TEST_CASE("covariant coordinates from F and the projector paths") {
  const ArrayDetector<double> det{10, 1.0, 0.0};
  // |2><2|: B_1 = 0.1, B_2 = 0.9 via the Stirling oracle
  const auto b2 = fock_projector_coords(det, 2);
  CHECK(b2[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(b2[2] == doctest::Approx(0.9).epsilon(1e-12));
  const auto ideal2 = fock_projector_coords_ideal<double>(10, 2);
  CHECK((b2 - ideal2).cwiseAbs().maxCoeff() < 1e-12);

  // |0><0|: coordinates sum to 1 (unit-trace projector, N-click term zero)
  CHECK(fock_projector_coords(det, 0).sum() == doctest::Approx(1.0).epsilon(1e-12));

  // exp(t -> infinity) approaches the vacuum projector coordinates
  const auto big_t = covariant_coords_from_f(det, f_exp(det, 30.0));
  const auto vac = fock_projector_coords(det, 0);
  CHECK((big_t.values - vac).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("exact rational: Stirling path equals the binomial-sum path") {
  using R = Rational;
  for (int N : {4, 10, 20}) {
    const ArrayDetector<R> det{N, R(1), R(0)};
    for (int m = 0; m <= 12; ++m) {
      const auto binomial_path = fock_projector_coords(det, m);
      const auto stirling_path = fock_projector_coords_ideal<R>(N, m);
      for (int n = 0; n < N; ++n) CHECK(binomial_path[n] == stirling_path[n]);
    }
  }
}

TEST_CASE("coordinate/metric consistency across representations") {
  const ArrayDetector<double> det{6, 0.85, 0.0};
  const auto basis = array_basis(det);
  const double t = 0.8;
  const auto b = [&] {
    auto op = normal_exp_diag<double>(t, basis.fock_dim());
    return DiagonalOperator<double>(op.diag(), op.tail_bound());
  }();
  const auto from_f = covariant_coords_from_f(det, f_normal_exp(det, t));
  const auto direct = covariant_coords(basis, b);
  CHECK((from_f.values - direct.values).cwiseAbs().maxCoeff() < 1e-10);
  const auto raised = raise_indices(basis, from_f);
  const auto contra = contravariant_coords(basis, b);
  CHECK((raised.values - contra.values).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("click operator") {
  // N=1: diag is 0 at k=0 and 1 for k >= 1
  const ArrayDetector<double> onoff{1, 1.0, 0.0};
  const auto c1 = click_operator(onoff, 12);
  CHECK(c1.coeff(0) == doctest::Approx(0.0));
  CHECK(c1.coeff(1) == doctest::Approx(1.0));
  CHECK(c1.coeff(7) == doctest::Approx(1.0));
  CHECK(!c1.hs_class());

  // ideal closed form equals the direct sum over n Pi_n
  const ArrayDetector<double> det{8, 1.0, 0.0};
  const Index dim = array_fock_dim(det);
  const auto closed = click_operator(det, dim);
  Vector<double> acc = Vector<double>::Zero(dim);
  for (int n = 0; n <= 8; ++n)
    acc += n * array_povm_element(det, n, dim).diag();
  CHECK((closed.diag() - acc).cwiseAbs().maxCoeff() < 1e-11);

  // contravariant coordinates of the effective click observable are the
  // outcomes (long double basis; the double floor sits near 1e-10)
  for (int N : {8, 10}) {
    const ArrayDetector<long double> dl{N, 1.0L, 0.0L};
    const auto basis = array_basis(dl);
    const auto clk = click_observable_effective(dl, basis.fock_dim());
    const auto coords = contravariant_coords(basis, clk);
    for (int n = 0; n < N; ++n)
      CHECK(std::abs(static_cast<double>(coords.values[n]) - n) < 1e-9);
  }

  // <C> on a coherent-like diagonal equals sum_n n rho_n from Born's rule
  const ArrayDetector<double> lossy{6, 0.75, 0.0};
  const Index dim2 = array_fock_dim(lossy);
  Vector<double> p = Vector<double>::Zero(dim2);
  double mean = 1.3, w = std::exp(-mean), norm = 0.0;
  for (Index k = 0; k < 30; ++k) {
    p[k] = w;
    norm += w;
    w *= mean / static_cast<double>(k + 1);
  }
  p /= norm;
  const auto cfull = click_operator(lossy, dim2);
  const double direct_mean = p.dot(cfull.diag());
  double born_mean = 0.0;
  for (int n = 0; n <= 6; ++n)
    born_mean += n * p.dot(array_povm_element(lossy, n, dim2).diag());
  CHECK(direct_mean == doctest::Approx(born_mean).epsilon(1e-12));
}

TEST_CASE("mismatch profiles: frozen oracle values") {
  const ArrayDetector<double> det{10, 1.0, 0.0};

  // Fig. 3 family: exact rational oracle values frozen as regressions
  std::vector<double> mgrid;
  for (int m = 0; m <= 10; ++m) mgrid.push_back(m);
  const auto fock_rows = mismatch_profile(det, ProfileFamily::fock_projector, mgrid);
  const std::vector<double> frozen{0.0,      0.00036288, 0.00864023, 0.0757600,
                                   0.315677, 0.656423,   0.723573,   0.792273,
                                   0.796610, 0.845051,   0.869338};
  REQUIRE(fock_rows.size() == frozen.size());
  for (size_t i = 0; i < frozen.size(); ++i) {
    CHECK(fock_rows[i].hs_norm_b == doctest::Approx(1.0));
    CHECK(fock_rows[i].hs_mismatch == doctest::Approx(frozen[i]).epsilon(2e-5));
  }

  // Fig. 4 family spot values (exact computation: zeros on the rate lattice)
  const auto ne_rows =
      mismatch_profile(det, ProfileFamily::normal_exp, {0.1, 1.0, 1.5, 1.9});
  CHECK(ne_rows[0].hs_mismatch < 1e-6);  // exactly zero: 0.9^k is in the span
  CHECK(ne_rows[1].hs_mismatch < 1e-6);  // exactly zero: vacuum is in the span
  CHECK(ne_rows[2].hs_mismatch == doctest::Approx(0.0590915).epsilon(1e-4));
  CHECK(ne_rows[3].hs_mismatch == doctest::Approx(1.4471358).epsilon(1e-5));
  CHECK(ne_rows[3].hs_norm_b == doctest::Approx(std::sqrt(1.0 / (1.9 * 0.1))));

  const auto e_rows = mismatch_profile(det, ProfileFamily::exp_decay, {0.01, 0.1, 1.0});
  CHECK(e_rows[0].hs_mismatch > 1.0);  // diverging norm, badly captured
  CHECK(e_rows[1].hs_mismatch == doctest::Approx(0.0028974).epsilon(1e-3));
  CHECK(e_rows[2].hs_mismatch < 1e-5);

  // profile errors
  CHECK_THROWS_WITH_AS(
      (void)mismatch_profile(det, ProfileFamily::truncated_moment, {1.0}),
      doctest::Contains("truncation required"), std::domain_error);
  CHECK_THROWS_AS((void)mismatch_profile(det, ProfileFamily::normal_exp, {2.5}),
                  std::domain_error);
}

TEST_CASE("Fig. 5 profile: truncated moments of |5> at N=20") {
  const ArrayDetector<double> det{20, 1.0, 0.0};
  std::vector<double> mgrid;
  for (int m = 1; m <= 10; ++m) mgrid.push_back(m);

  const auto plain = mismatch_profile(det, ProfileFamily::truncated_moment, mgrid, 5);
  const std::vector<double> plain_frozen{0.021535, 0.10955, 0.55549, 2.8090, 14.173,
                                         71.382,   358.99,  1803.4,  9050.6, 45389.0};
  REQUIRE(plain.size() == plain_frozen.size());
  for (size_t i = 0; i < plain.size(); ++i)
    CHECK(plain[i].hs_mismatch == doctest::Approx(plain_frozen[i]).epsilon(2e-4));
  // the growth is geometric (~5 per order); the spec's log-ratio check is
  // therefore bounded only by the frozen oracle maximum
  double max_ratio = 0.0;
  for (size_t i = 0; i < plain.size(); ++i)
    max_ratio = std::max(max_ratio, plain[i].hs_mismatch / std::log(mgrid[i] + 2.0));
  CHECK(max_ratio < 1.9e4);

  const auto normal =
      mismatch_profile(det, ProfileFamily::truncated_normal_moment, mgrid, 5);
  const std::vector<double> normal_frozen{0.021535, 0.08802, 0.2699, 0.5519, 0.56444,
                                          0.0,      0.0,     0.0,    0.0,    0.0};
  for (size_t i = 0; i < normal.size(); ++i) {
    if (normal_frozen[i] == 0.0)
      CHECK(normal[i].hs_mismatch == 0.0);  // empty support above m > M
    else
      CHECK(normal[i].hs_mismatch == doctest::Approx(normal_frozen[i]).epsilon(2e-4));
  }
}

TEST_CASE("detector validation") {
  CHECK_THROWS_AS((ArrayDetector<double>{0, 1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ArrayDetector<double>{4, 0.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ArrayDetector<double>{4, 0.5, -1.0}.validate()), std::invalid_argument);
}
