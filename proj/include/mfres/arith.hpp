#pragma once

// Integer and quadratic-character primitives.

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfres {

enum class Parity { even, odd };

inline Parity parity_of(std::int64_t k) { return (k % 2 == 0) ? Parity::even : Parity::odd; }

/// +1 for even parity, -1 for odd: the sign (-1)^k.
inline int sign_of(Parity p) { return p == Parity::even ? 1 : -1; }

enum class DiscriminantSign { positive, negative };
enum class ResidueFilter { all, one_mod_four };

/// Reason `d` is not a fundamental discriminant, or an empty string when it is.
/// Throws DomainError for d == 0.
std::string fundamental_failure(std::int64_t d);

bool is_fundamental(std::int64_t d);

/// Kronecker symbol (d/n) for arbitrary integers, no validation of d.
int kronecker_symbol(std::int64_t d, std::int64_t n);

/// chi_D(n) for a fundamental discriminant D (or D = -1). Validates D.
int kronecker(std::int64_t d, std::int64_t n);

class FundamentalDiscriminant {
 public:
  /// Throws DomainError naming the failed condition when d is not fundamental.
  explicit FundamentalDiscriminant(std::int64_t d);

  std::int64_t value() const { return d_; }
  std::int64_t abs() const { return d_ < 0 ? -d_ : d_; }
  /// 0 when D > 0, 1 when D < 0.
  int parity_delta() const { return d_ > 0 ? 0 : 1; }
  int chi(std::int64_t n) const { return kronecker_symbol(d_, n); }

  friend bool operator==(const FundamentalDiscriminant&, const FundamentalDiscriminant&) = default;
  friend auto operator<=>(const FundamentalDiscriminant&, const FundamentalDiscriminant&) = default;

 private:
  struct Unchecked {};
  FundamentalDiscriminant(std::int64_t d, Unchecked) : d_(d) {}
  friend std::vector<FundamentalDiscriminant> enumerate_discriminants(std::int64_t, std::int64_t,
                                                                      DiscriminantSign,
                                                                      ResidueFilter);
  friend void for_each_discriminant(std::int64_t, std::int64_t, DiscriminantSign, ResidueFilter,
                                    const std::function<void(FundamentalDiscriminant)>&);

  std::int64_t d_;
};

struct SquarefreeDecomposition {
  FundamentalDiscriminant d;
  std::int64_t m;
};

/// n = |D| m^2 with (-1)^k D > 0 and D fundamental; nullopt when no such D exists.
std::optional<SquarefreeDecomposition> try_squarefree_decompose(std::int64_t n, Parity k_parity);

/// Throwing variant of try_squarefree_decompose.
SquarefreeDecomposition squarefree_decompose(std::int64_t n, Parity k_parity);

/// Fundamental D with lo < |D| <= hi and the given sign, ascending in |D|.
/// Segmented sieve over odd square divisors.
std::vector<FundamentalDiscriminant> enumerate_discriminants(std::int64_t lo, std::int64_t hi,
                                                             DiscriminantSign sign,
                                                             ResidueFilter filter);

void for_each_discriminant(std::int64_t lo, std::int64_t hi, DiscriminantSign sign,
                           ResidueFilter filter,
                           const std::function<void(FundamentalDiscriminant)>& visit);

/// The sign with (-1)^k D > 0.
inline DiscriminantSign admissible_sign(Parity k_parity) {
  return k_parity == Parity::even ? DiscriminantSign::positive : DiscriminantSign::negative;
}

/// First `count` fundamental D with (-1)^k D > 0, ascending in |D|.
std::vector<FundamentalDiscriminant> first_admissible_discriminants(Parity k_parity,
                                                                    std::size_t count);

class PrimeTable {
 public:
  explicit PrimeTable(std::int64_t limit);

  std::int64_t limit() const { return limit_; }
  std::span<const std::int64_t> primes() const { return primes_; }
  bool contains(std::int64_t p) const;
  /// Index of p in primes(), or -1.
  std::ptrdiff_t index_of(std::int64_t p) const;
  /// Number of primes <= x (x <= limit).
  std::size_t count_upto(std::int64_t x) const;

 private:
  std::int64_t limit_;
  std::vector<std::int64_t> primes_;
};

/// spf[n] = smallest prime factor of n for 2 <= n <= limit (spf[0] = spf[1] = 0).
std::vector<std::uint32_t> smallest_prime_factors(std::int64_t limit);

bool is_prime(std::int64_t n);
int mobius(std::int64_t n);
int divisor_count(std::int64_t n);
bool is_squarefree(std::int64_t n);
bool is_perfect_square(std::int64_t n);
std::vector<std::int64_t> prime_divisors(std::int64_t n);
std::vector<std::int64_t> divisors(std::int64_t n);

/// sigma_power(n) for 0 <= n <= limit (entry 0 is 0), exact.
std::vector<mpz_class> divisor_sigma_table(unsigned power, std::int64_t limit);

/// chi_D(n) for 0 <= n <= limit, using complete multiplicativity over `spf`.
std::vector<std::int8_t> character_table(std::int64_t d, std::int64_t limit,
                                         std::span<const std::uint32_t> spf);

}  // namespace mfres
