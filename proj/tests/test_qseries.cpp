#include "mfres/errors.hpp"
#include "mfres/ntt.hpp"
#include "mfres/qseries.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace mfres;

namespace {

std::vector<mpz_class> random_ints(std::mt19937_64& rng, std::size_t n, int bits, double density = 1.0) {
  std::vector<mpz_class> v(n);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& x : v) {
    if (u(rng) > density) continue;
    mpz_class r = 0;
    for (int b = 0; b < bits; b += 32) r = (r << 32) + static_cast<unsigned long>(rng() & 0xffffffffu);
    r >>= (bits % 32 == 0 ? 0 : 32 - bits % 32);
    x = (rng() & 1) ? -r : r;
  }
  return v;
}

}  // namespace

TEST_CASE("NTT convolution equals the schoolbook product") {
  std::mt19937_64 rng(11);
  for (int bits : {8, 64, 300}) {
    const auto a = random_ints(rng, 700, bits), b = random_ints(rng, 500, bits);
    const auto expected = oracle::series_mul(a, b, 1000);
    const std::size_t bound = 2 * static_cast<std::size_t>(bits) + 12;
    CHECK(detail::convolve_exact(a, b, 1000, bound) == expected);
  }
  CHECK(detail::primes_for_bound(1) >= 1);
  const auto primes = detail::ntt_primes(4);
  for (std::size_t i = 1; i < primes.size(); ++i) CHECK(primes[i].modulus < primes[i - 1].modulus);
}

TEST_CASE("series products agree across strategies and with a dense oracle") {
  std::mt19937_64 rng(5);
  const auto na = random_ints(rng, 400, 40, 0.5), nb = random_ints(rng, 400, 40, 0.5);
  const ExactSeries a = ExactSeries::from_dense(400, na, 6);
  const ExactSeries b = ExactSeries::from_dense(400, nb, 35);
  const ExactSeries s = mul(a, b, MulStrategy::schoolbook);
  const ExactSeries t = mul(a, b, MulStrategy::transform);
  CHECK(s == t);
  CHECK(mul(a, b) == s);
  const auto dense = oracle::series_mul(na, nb, 400);
  for (ExactSeries::Exponent n = 0; n < 400; ++n) {
    mpq_class expected(dense[static_cast<std::size_t>(n)], 6 * 35);
    expected.canonicalize();
    CHECK(s.coeff(n) == expected);
  }
}

TEST_CASE("canonical form and arithmetic") {
  const ExactSeries a = ExactSeries::from_terms(10, {{3, 4}, {1, 2}, {5, 0}, {12, 7}}, 6);
  CHECK(a.nnz() == 2);
  CHECK(a.denominator() == 3);
  CHECK(a.coeff(1) == mpq_class(1, 3));
  CHECK(a.coeff(3) == mpq_class(2, 3));
  CHECK(a.valuation() == 1);
  CHECK_THROWS_AS(a.coeff(10), DomainError);
  CHECK((a - a).is_zero());
  CHECK(a + a == a.scaled(2));
  CHECK(a.shifted(2).coeff(5) == mpq_class(2, 3));
  CHECK(a.shifted(2).prec() == 12);
  CHECK(a.truncated(3).nnz() == 1);
  CHECK(a.picked(3).coeff(1) == mpq_class(2, 3));
  CHECK(pow(ExactSeries::one(5) + ExactSeries::monomial(1, 1, 5), 4).coeff(2) == 6);
  const std::vector<ExactSeries> rows{a, ExactSeries::monomial(2, 1, 10)};
  const std::vector<mpq_class> coeffs{3, mpq_class(1, 2)};
  const ExactSeries c = combine(rows, coeffs);
  CHECK(c.coeff(1) == 1);
  CHECK(c.coeff(2) == mpq_class(1, 2));
}

TEST_CASE("text round trip") {
  std::mt19937_64 rng(3);
  const ExactSeries a = ExactSeries::from_dense(200, random_ints(rng, 200, 90, 0.3), 77);
  std::stringstream ss;
  write_series(ss, a);
  CHECK(read_series(ss) == a);
}

TEST_CASE("linear solve") {
  // x (1 + q) + y (q + q^2) with coeff(q^0) = 2, coeff(q^2) = 3
  const std::vector<ExactSeries> rows{ExactSeries::from_terms(4, {{0, 1}, {1, 1}}),
                                      ExactSeries::from_terms(4, {{1, 1}, {2, 1}})};
  const std::vector<SeriesConstraint> cons{{0, 2}, {2, 3}};
  const auto sol = linear_solve(rows, cons);
  REQUIRE(sol.consistent);
  REQUIRE(sol.particular.size() == 1);
  CHECK(sol.particular[0].coeff(1) == 5);
  const std::vector<SeriesConstraint> bad{{0, 1}, {3, 1}};
  CHECK(!linear_solve(rows, bad).consistent);
  const std::vector<SeriesConstraint> homog{{0, 0}};
  const auto kernel = linear_solve(rows, homog);
  CHECK(kernel.basis.size() == 1);

  std::vector<std::vector<mpq_class>> m{{2, 4, 6}, {1, 2, 4}};
  const auto piv = rref(m);
  CHECK(piv == std::vector<std::size_t>{0, 2});
  CHECK(m[0][1] == 2);
}
