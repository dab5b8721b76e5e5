#include "mfres/arith.hpp"
#include "mfres/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace mfres;

TEST_CASE("kronecker symbol agrees with Euler's criterion") {
  for (std::int64_t d = -60; d <= 60; ++d) {
    if (d == 0) continue;
    for (std::int64_t n = 1; n <= 200; ++n) {
      CAPTURE(d);
      CAPTURE(n);
      CHECK(kronecker_symbol(d, n) == oracle::kronecker(d, n));
    }
  }
}

TEST_CASE("kronecker symbol is completely multiplicative in n") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t d = static_cast<std::int64_t>(rng() % 2000) - 1000;
    if (d == 0) continue;
    const std::int64_t a = 1 + static_cast<std::int64_t>(rng() % 5000), b = 1 + static_cast<std::int64_t>(rng() % 5000);
    CHECK(kronecker_symbol(d, a * b) == kronecker_symbol(d, a) * kronecker_symbol(d, b));
  }
}

TEST_CASE("fundamental discriminants match the definition") {
  for (std::int64_t d = -3000; d <= 3000; ++d) {
    if (d == 0) continue;
    CAPTURE(d);
    CHECK(is_fundamental(d) == oracle::fundamental(d));
    CHECK(fundamental_failure(d).empty() == oracle::fundamental(d));
  }
  CHECK_THROWS_AS(FundamentalDiscriminant(12 * 4), DomainError);
  CHECK_THROWS_AS(FundamentalDiscriminant(3), DomainError);
  CHECK_THROWS_AS(is_fundamental(0), DomainError);
  CHECK(FundamentalDiscriminant(-4).parity_delta() == 1);
  CHECK(FundamentalDiscriminant(5).parity_delta() == 0);
}

TEST_CASE("enumerated discriminants equal a brute-force scan") {
  for (auto sign : {DiscriminantSign::positive, DiscriminantSign::negative})
    for (auto filter : {ResidueFilter::all, ResidueFilter::one_mod_four}) {
      const std::int64_t lo = 1000, hi = 4000;
      std::vector<std::int64_t> expected;
      for (std::int64_t a = lo + 1; a <= hi; ++a) {
        const std::int64_t d = sign == DiscriminantSign::positive ? a : -a;
        if (!oracle::fundamental(d)) continue;
        if (filter == ResidueFilter::one_mod_four && ((d % 4) + 4) % 4 != 1) continue;
        expected.push_back(d);
      }
      std::vector<std::int64_t> got;
      for (const auto& d : enumerate_discriminants(lo, hi, sign, filter)) got.push_back(d.value());
      CHECK(got == expected);
      std::vector<std::int64_t> visited;
      for_each_discriminant(lo, hi, sign, filter, [&](FundamentalDiscriminant d) { visited.push_back(d.value()); });
      CHECK(visited == expected);
    }
}

TEST_CASE("first admissible discriminants") {
  std::vector<std::int64_t> even, odd;
  for (const auto& d : first_admissible_discriminants(Parity::even, 6)) even.push_back(d.value());
  for (const auto& d : first_admissible_discriminants(Parity::odd, 6)) odd.push_back(d.value());
  CHECK(even == std::vector<std::int64_t>{1, 5, 8, 12, 13, 17});
  CHECK(odd == std::vector<std::int64_t>{-3, -4, -7, -8, -11, -15});
}

TEST_CASE("squarefree decomposition") {
  for (std::int64_t n = 1; n <= 3000; ++n)
    for (auto parity : {Parity::even, Parity::odd}) {
      const auto dec = try_squarefree_decompose(n, parity);
      // brute: |D| m^2 = n over all m
      std::optional<std::int64_t> expected;
      for (std::int64_t m = 1; m * m <= n; ++m)
        if (n % (m * m) == 0) {
          const std::int64_t d = sign_of(parity) * (n / (m * m));
          if (oracle::fundamental(d)) expected = d;
        }
      CAPTURE(n);
      REQUIRE(dec.has_value() == expected.has_value());
      if (dec) {
        CHECK(dec->d.value() == *expected);
        CHECK(dec->d.abs() * dec->m * dec->m == n);
      }
    }
  CHECK_THROWS_AS(squarefree_decompose(2, Parity::even), DomainError);
}

TEST_CASE("sieves and multiplicative functions") {
  const PrimeTable table(10000);
  std::vector<std::int64_t> brute;
  for (std::int64_t n = 2; n <= 10000; ++n)
    if (oracle::trial_prime(n)) brute.push_back(n);
  CHECK(std::equal(table.primes().begin(), table.primes().end(), brute.begin(), brute.end()));
  CHECK(table.count_upto(1000) == 168);
  CHECK(table.index_of(97) == 24);
  CHECK(table.index_of(98) == -1);

  const auto spf = smallest_prime_factors(5000);
  for (std::int64_t n = 2; n <= 5000; ++n) CHECK(spf[static_cast<std::size_t>(n)] == oracle::prime_factors(n).front());

  for (std::int64_t n = 1; n <= 3000; ++n) {
    CHECK(mobius(n) == oracle::brute_mobius(n));
    CHECK(is_prime(n) == oracle::trial_prime(n));
    CHECK(is_squarefree(n) == (oracle::brute_mobius(n) != 0));
    CHECK(prime_divisors(n) == (n == 1 ? std::vector<std::int64_t>{} : oracle::prime_factors(n)));
    CHECK(divisor_count(n) == static_cast<int>(divisors(n).size()));
  }
  CHECK(is_prime(1000000007));
  CHECK(!is_prime(1000000007ll * 3));
  CHECK(is_perfect_square(144));
  CHECK(!is_perfect_square(145));

  const auto sig = divisor_sigma_table(3, 200);
  for (std::int64_t n = 1; n <= 200; ++n) CHECK(sig[static_cast<std::size_t>(n)] == oracle::sigma(3, n));

  const auto chi = character_table(-23, 5000, spf);
  for (std::int64_t n = 1; n <= 5000; ++n) CHECK(chi[static_cast<std::size_t>(n)] == oracle::kronecker(-23, n));
}
