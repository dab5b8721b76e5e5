#include "mfres/errors.hpp"
#include "mfres/halfint.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mfres;

TEST_CASE("theta and F coefficients") {
  const ExactSeries theta = theta_series(500);
  for (ExactSeries::Exponent n = 0; n < 500; ++n) {
    int reps = 0;
    for (std::int64_t m = -30; m <= 30; ++m) reps += m * m == n;
    CHECK(theta.coeff(n) == reps);
  }
  const ExactSeries f = weight_two_F(300);
  for (ExactSeries::Exponent n = 1; n < 300; ++n) CHECK(f.coeff(n) == (n % 2 ? mpq_class(oracle::sigma(1, n)) : mpq_class(0)));
  CHECK(half_integral_spanning_set(6, 20).size() == 4);
}

TEST_CASE("plus-space dimensions match dim S_2k") {
  for (int k = 6; k <= 14; ++k) {
    const PlusSpace space = plus_space_basis(k, 400);
    CAPTURE(k);
    CHECK(static_cast<int>(space.basis.size()) == cusp_form_dimension(2 * k));
    for (const auto& s : space.basis) {
      CHECK(!plus_condition_violation(PlusForm(k, s)).has_value());
      for (ExactSeries::Exponent n = 0; n < 400; ++n) {
        const std::int64_t r = ((k % 2 == 0 ? n : -n) % 4 + 4) % 4;
        if (r == 2 || r == 3) CHECK(s.coeff(n) == 0);
      }
    }
  }
  CHECK_THROWS(plus_space_basis(5, 100));
}

TEST_CASE("k = 6: normalized generator and the Shimura relation with Delta") {
  const PlusSpace space = plus_space_basis(6, 3000);
  const PlusForm g(6, space.basis.front());
  CHECK(g.exact_coeff(1) == 1);
  CHECK(g.exact_coeff(4) == -56);
  const auto delta = hecke_eigenforms(12, 3000);
  for (std::int64_t dv : {1, 5, 8, 12, 13, 17, 21, 24}) {
    const auto rep = shimura_check(g, delta[0], FundamentalDiscriminant(dv), static_cast<std::int64_t>(std::sqrt(2999.0 / dv)));
    CHECK(rep.exact);
    CHECK(rep.passed);
  }
  // c(n^2) against the multiplier computed directly from tau
  const auto tau = oracle::delta_naive(60);
  for (std::int64_t n = 1; n < 50; ++n) {
    mpz_class expected = 0;
    for (std::int64_t d = 1; d <= n; ++d)
      if (n % d == 0) {
        mpz_class term = oracle::brute_mobius(d) * tau[static_cast<std::size_t>(n / d)];
        mpz_class pw;
        mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(d), 5);
        expected += term * pw;
      }
    CHECK(g.exact_coeff(n * n) == expected);
  }
}

TEST_CASE("odd k: Shimura relation for weight 18") {
  const PlusSpace space = plus_space_basis(9, 2000);
  REQUIRE(space.basis.size() == 1);
  const PlusForm g(9, space.basis.front());
  const auto f = hecke_eigenforms(18, 2000);
  for (std::int64_t dv : {-3, -4, -7, -8, -11, -15, -19, -20}) {
    const auto rep = shimura_check(g, f[0], FundamentalDiscriminant(dv), static_cast<std::int64_t>(std::sqrt(1999.0 / -dv)));
    CHECK(rep.passed);
  }
}

TEST_CASE("numeric eigenbasis for k = 12 lifts to the two weight 24 forms") {
  const PlusSpace space = plus_space_basis(12, 3000);
  const auto forms = hecke_eigenforms(24, 3000);
  const PlusEigenbasis basis = plus_eigenbasis(space, forms);
  REQUIRE(basis.forms.size() == 2);
  for (std::size_t nu = 0; nu < 2; ++nu) {
    CHECK(basis.lifts[nu].label() == static_cast<int>(nu + 1));
    for (std::int64_t dv : {1, 5, 8, 12, 13}) {
      const auto rep = shimura_check(basis.forms[nu], basis.lifts[nu], FundamentalDiscriminant(dv),
                                     static_cast<std::int64_t>(std::sqrt(2999.0 / dv)), 1e-25);
      CAPTURE(dv);
      CHECK(rep.passed);
      CHECK(rep.checked > 0);
    }
  }
}

TEST_CASE("evaluation of g and U4") {
  const PlusForm g(6, plus_space_basis(6, 1000).basis.front());
  const std::complex<Real128> z(Real128(0.1), Real128(1));
  const auto ev = evaluate<Real128>(g, z, Real128(1e-25));
  std::complex<Real128> direct(0, 0);
  const Real128 two_pi = 2 * pi<Real128>();
  for (ExactSeries::Exponent n = 1; n < 200; ++n) {
    const Real128 c = g.coeff<Real128>(n);
    if (c == 0) continue;
    const Real128 mag = exp(-two_pi * Real128(n) * z.imag());
    direct += std::complex<Real128>(c * mag * cos(two_pi * Real128(n) * z.real()), c * mag * sin(two_pi * Real128(n) * z.real()));
  }
  CHECK(static_cast<double>(abs(ev.value.real() - direct.real())) < 1e-25);
  CHECK(static_cast<double>(abs(ev.value.imag() - direct.imag())) < 1e-25);
  CHECK_THROWS_AS(evaluate<Real128>(g, std::complex<Real128>(0, Real128(0.001)), Real128(1e-25)), PrecisionError);

  const PlusForm h = u4(g);
  for (ExactSeries::Exponent n = 1; n < 200; ++n) CHECK(h.exact_coeff(n) == g.exact_coeff(4 * n));
}
