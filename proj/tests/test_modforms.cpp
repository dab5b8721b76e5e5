#include "mfres/errors.hpp"
#include "mfres/modforms.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace mfres;

TEST_CASE("Delta equals the naive product expansion") {
  const auto expected = oracle::delta_naive(400);
  const ExactSeries d = delta(400);
  for (ExactSeries::Exponent n = 0; n < 400; ++n) CHECK(d.coeff(n) == mpq_class(expected[static_cast<std::size_t>(n)]));
  CHECK(d.coeff(2) == -24);
  CHECK(d.coeff(3) == 252);
}

TEST_CASE("Eisenstein series and the discriminant identity") {
  const ExactSeries e4 = eisenstein(4, 300), e6 = eisenstein(6, 300);
  for (ExactSeries::Exponent n = 1; n < 300; ++n) {
    CHECK(e4.coeff(n) == mpq_class(240 * oracle::sigma(3, n)));
    CHECK(e6.coeff(n) == mpq_class(-504 * oracle::sigma(5, n)));
  }
  CHECK(pow(e4, 3) - pow(e6, 2) == delta(300).scaled(1728));
}

TEST_CASE("cusp form dimensions") {
  for (int w = 2; w <= 120; w += 2) {
    // dim M_w from the valence formula
    const int modular = w % 12 == 2 ? w / 12 : w / 12 + 1;
    CHECK(cusp_form_dimension(w) == (w == 2 ? 0 : modular - 1));
  }
}

TEST_CASE("Victor Miller basis is echelon") {
  for (int w : {24, 36, 48}) {
    const auto basis = victor_miller_basis(w, 50);
    REQUIRE(static_cast<int>(basis.size()) == cusp_form_dimension(w));
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j < basis.size(); ++j) CHECK(basis[i].coeff(static_cast<ExactSeries::Exponent>(j + 1)) == (i == j ? 1 : 0));
  }
}

TEST_CASE("weight 12: the exact eigenform is Delta") {
  const auto forms = hecke_eigenforms(12, 1000);
  REQUIRE(forms.size() == 1);
  const auto& f = forms[0];
  CHECK(f.is_exact());
  CHECK(f.label() == 1);
  const auto naive = oracle::delta_naive(600);
  for (std::int64_t n = 1; n < 600; ++n) CHECK(exact_coeff_at(f, n) == naive[static_cast<std::size_t>(n)]);
  CHECK(coeff_at<double>(f, 2) == doctest::Approx(-24));
  CHECK_THROWS_AS(f.exact_prime_coeff(1009), TableExhausted);
}

TEST_CASE("weight 24: eigenvalues are the roots of the T(2) characteristic polynomial") {
  // T(2) on the Victor Miller basis from its action on coefficients: (T2 b)(n) = b(2n) + 2^23 b(n/2)
  const auto basis = victor_miller_basis(24, 20);
  mpz_class m[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const std::int64_t n = j + 1;
      mpq_class v = basis[static_cast<std::size_t>(i)].coeff(2 * n);
      if (n % 2 == 0) v += mpq_class(mpz_class(1) << 23) * basis[static_cast<std::size_t>(i)].coeff(n / 2);
      m[j][i] = v.get_num();
    }
  const mpz_class trace = m[0][0] + m[1][1];
  const mpz_class det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  CHECK(trace == 1080);
  const double disc = std::sqrt(mpz_class(trace * trace - 4 * det).get_d());
  const double lo = (trace.get_d() - disc) / 2, hi = (trace.get_d() + disc) / 2;
  CHECK(lo == doctest::Approx(540 - 12 * std::sqrt(144169.0)).epsilon(1e-14));

  const auto forms = hecke_eigenforms(24, 500);
  REQUIRE(forms.size() == 2);
  CHECK(static_cast<double>(forms[0].prime_coeff(2)) == doctest::Approx(lo).epsilon(1e-14));
  CHECK(static_cast<double>(forms[1].prime_coeff(2)) == doctest::Approx(hi).epsilon(1e-14));
}

TEST_CASE("Hecke relations and the Deligne bound") {
  for (int w : {12, 16, 24, 28, 36}) {
    const auto forms = hecke_eigenforms(w, 2000);
    CHECK(static_cast<int>(forms.size()) == cusp_form_dimension(w));
    for (const auto& f : forms) {
      const int k = f.k();
      for (auto p : f.primes()) {
        const double bound = 2 * std::pow(static_cast<double>(p), k - 0.5);
        CHECK(std::abs(static_cast<double>(f.prime_coeff(p))) <= bound * (1 + 1e-12));
      }
      for (std::int64_t m = 2; m < 60; ++m)
        for (std::int64_t n = 2; n < 60; ++n) {
          if (std::gcd(m, n) != 1) continue;
          const Real128 lhs = coeff_at<Real128>(f, m * n), rhs = coeff_at<Real128>(f, m) * coeff_at<Real128>(f, n);
          CHECK(static_cast<double>(abs(lhs - rhs) / std::max(Real128(1), Real128(abs(rhs)))) < 1e-30);
        }
      for (std::int64_t p : {2, 3, 5, 7}) {
        const Real128 a = f.prime_coeff(p);
        const Real128 expected = a * a - pow(Real128(p), w - 1);
        CHECK(static_cast<double>(abs(coeff_at<Real128>(f, p * p) - expected) / abs(expected)) < 1e-30);
      }
      const NormalizedCoeffTable<double> table(f, 100);
      CHECK(table(7) == doctest::Approx(static_cast<double>(f.prime_coeff(7)) / std::pow(7.0, k - 0.5)));
    }
  }
}
