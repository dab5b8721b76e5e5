#include "mfres/errors.hpp"
#include "mfres/halfint.hpp"
#include "mfres/lfun.hpp"

#include "oracles.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mfres;

namespace {

double rel(const Real128& a, const Real128& b) { return static_cast<double>(abs(a - b) / std::max(Real128(1e-300), Real128(abs(b)))); }

// Central value of a twist of Delta from the approximate functional equation,
// coefficients from the naive product and Q(6, y) from boost.
double afe_oracle(std::int64_t d, const std::vector<mpz_class>& tau) {
  const double q = static_cast<double>(d < 0 ? -d : d);
  double sum = 0;
  for (std::size_t n = 1; n < tau.size(); ++n) {
    const int chi = oracle::kronecker(d, static_cast<std::int64_t>(n));
    if (chi == 0) continue;
    const double lambda = tau[n].get_d() / std::pow(static_cast<double>(n), 5.5);
    sum += lambda * chi / std::sqrt(static_cast<double>(n)) *
           boost::math::gamma_q(6.0, 2 * std::numbers::pi * static_cast<double>(n) / q);
  }
  return 2 * sum;
}

}  // namespace

TEST_CASE("regularized upper gamma") {
  for (int k : {1, 6, 12, 25})
    for (double y : {0.0, 0.01, 1.0, 5.5, 30.0, 120.0})
      CHECK(static_cast<double>(regularized_upper_gamma<Real128>(k, Real128(y))) ==
            doctest::Approx(boost::math::gamma_q(static_cast<double>(k), y)).epsilon(1e-13));
  const Real128 y = Real128(37) / 10;
  CHECK(rel(regularized_upper_gamma<Real128>(12, y), boost::math::gamma_q(Real128(12), y)) < 1e-33);
  CHECK_THROWS_AS(regularized_upper_gamma<double>(0, 1.0), DomainError);
  const AfeWindow w(6);
  CHECK(w(0.5) == doctest::Approx(boost::math::gamma_q(6.0, std::numbers::pi)));
}

TEST_CASE("Gamma function") {
  for (double s : {0.25, 0.5, 1.0, 3.7, 10.5, 41.2, -0.5, -3.3, -7.9}) {
    CAPTURE(s);
    const Real128 x(s);
    CHECK(rel(real_gamma<Real128>(x), boost::math::tgamma(x)) < 1e-33);
    int sign = 0;
    const Real128 l = log_abs_gamma<Real128>(x, &sign);
    CHECK(static_cast<double>(abs(l - log(abs(boost::math::tgamma(x))))) < 1e-32);
    CHECK(sign == (boost::math::tgamma(x) > 0 ? 1 : -1));
    CHECK(real_gamma<double>(s) == doctest::Approx(std::tgamma(s)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(real_gamma<double>(-2.0), DomainError);
  CHECK(rel(gamma_ratio<Real128>(Real128(7.25), Real128(2.5)), boost::math::tgamma(Real128(7.25)) / boost::math::tgamma(Real128(2.5))) < 1e-32);
  // common poles cancel: Gamma(-2.5 - 3) / Gamma(-2.5)
  CHECK(rel(gamma_ratio<Real128>(Real128(-5.5), Real128(-2.5)),
            boost::math::tgamma(Real128(-5.5)) / boost::math::tgamma(Real128(-2.5))) < 1e-32);
  // Gamma(-4) / Gamma(-6) = (-5)(-6) = 30 through the reflection
  CHECK(static_cast<double>(gamma_ratio<Real128>(Real128(-4), Real128(-6))) == doctest::Approx(30));
}

TEST_CASE("Dirichlet L-values against closed forms") {
  const Real128 pi_ = pi<Real128>();
  CHECK(rel(dirichlet_lvalue<Real128>(FundamentalDiscriminant(1), Real128(2), 128).value, pi_ * pi_ / 6) < 1e-30);
  CHECK(rel(dirichlet_lvalue<Real128>(FundamentalDiscriminant(-4), Real128(2), 128).value,
            boost::math::constants::catalan<Real128>()) < 1e-30);
  CHECK(rel(dirichlet_lvalue<Real128>(FundamentalDiscriminant(5), Real128(2), 128).value,
            4 * pi_ * pi_ / (25 * sqrt(Real128(5)))) < 1e-30);
  CHECK(rel(dirichlet_lvalue<Real128>(FundamentalDiscriminant(-3), Real128(3), 128).value,
            4 * pi_ * pi_ * pi_ / (81 * sqrt(Real128(3)))) < 1e-30);
  const auto l = dirichlet_lvalue<double>(FundamentalDiscriminant(-4), 2.0, 53);
  CHECK(l.value == doctest::Approx(0.915965594177219));
  CHECK(l.tail_bound < 1e-7);
  CHECK_THROWS_AS(dirichlet_lvalue<double>(FundamentalDiscriminant(5), 1.0, 53), DomainError);
}

TEST_CASE("Dirichlet partial sums on shared tables") {
  const std::int64_t t = 20000;
  const auto inv = inverse_power_table<double>(t, 3.0);
  const auto spf = smallest_prime_factors(t);
  for (std::int64_t dv : {-7, 13, 24, -95}) {
    const FundamentalDiscriminant d(dv);
    const auto partial = dirichlet_partial<double>(d, inv, spf, t, 3.0, 53);
    double direct = 0;
    for (std::int64_t n = 1; n <= t; ++n) direct += oracle::kronecker(dv, n) / std::pow(static_cast<double>(n), 3);
    CHECK(partial.value == doctest::Approx(direct).epsilon(1e-14));
    const auto full = dirichlet_lvalue<double>(d, 3.0, 53);
    CHECK(std::abs(partial.value - full.value) <= partial.tail_bound + full.tail_bound);
  }
  CHECK(std::isinf(dirichlet_truncation(1, 2.0, 53)));
}

TEST_CASE("central twisted values of Delta against an independent AFE sum") {
  const auto delta = hecke_eigenforms(12, 20000);
  const auto tau = oracle::delta_naive(2500);
  const TwistEvaluator<Real128> ev(delta[0], 20000);
  for (std::int64_t dv : {1, 5, 8, 12, 13, 17, 21, 24, 28, 29}) {
    const FundamentalDiscriminant d(dv);
    const auto l = central_lvalue<Real128>(delta[0], d, 128);
    CAPTURE(dv);
    CHECK(static_cast<double>(l.value) == doctest::Approx(afe_oracle(dv, tau)).epsilon(1e-12));
    CHECK(l.tail_bound < Real128(1e-19));
    CHECK(!l.degraded);
    CHECK(rel(ev.central(d, 128).value, l.value) < 1e-30);
    const auto ld = central_lvalue<double>(delta[0], d, 53);
    CHECK(ld.value == doctest::Approx(static_cast<double>(l.value)).epsilon(1e-12));
  }
}

TEST_CASE("central values vanish exactly for the wrong sign") {
  const auto delta = hecke_eigenforms(12, 2000);
  for (std::int64_t dv : {-3, -4, -7, -8, -84}) {
    const auto l = central_lvalue<Real128>(delta[0], FundamentalDiscriminant(dv), 128);
    CHECK(l.value == 0);
    CHECK(l.tail_bound == 0);
  }
  const auto f18 = hecke_eigenforms(18, 2000);
  CHECK(central_lvalue<double>(f18[0], FundamentalDiscriminant(5), 53).value == 0);
  CHECK(central_lvalue<double>(f18[0], FundamentalDiscriminant(-3), 53).value != 0);
}

TEST_CASE("truncation and table exhaustion") {
  const auto delta = hecke_eigenforms(12, 500);
  const TwistEvaluator<double> small(delta[0], 100);
  CHECK_THROWS_AS(small.central(FundamentalDiscriminant(1001), 53), TableExhausted);
  const std::int64_t t = central_truncation(6, 101, 53);
  CHECK(central_tail_bound(6, 101, t) < std::ldexp(1.0, -26));
  CHECK(central_tail_bound(6, 101, t / 2) > central_tail_bound(6, 101, t));
}

TEST_CASE("half-integral Hecke series and Rankin sums") {
  const PlusForm g(6, plus_space_basis(6, 3000).basis.front());
  const Real128 s(9);
  const auto l = hecke_lvalue_halfint<Real128>(g, s);
  Real128 direct = 0;
  for (std::int64_t n = 1; n < 3000; ++n) direct += g.coeff<Real128>(n) / pow(Real128(n), s);
  CHECK(rel(l.value, direct) < 1e-30);
  CHECK(l.tail_bound < Real128(1e-3));
  CHECK_THROWS_AS(hecke_lvalue_halfint<double>(g, 4.0), DomainError);

  const auto delta = hecke_eigenforms(12, 1000);
  Real128 sum = 0;
  for (auto p : delta[0].primes()) {
    const Real128 a = delta[0].prime_coeff(p);
    sum += a * a * log(Real128(p)) / pow(Real128(p), 11);
  }
  CHECK(rel(rankin_sum<Real128>(delta[0], delta[0], 1000), sum) < 1e-30);
  CHECK_THROWS_AS(rankin_sum<double>(delta[0], delta[0], 2000), TableExhausted);
}
