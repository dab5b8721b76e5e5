#include "mfres/arith.hpp"

#include "mfres/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace mfres {

namespace {

std::int64_t mod4(std::int64_t d) { return ((d % 4) + 4) % 4; }

std::int64_t isqrt(std::int64_t n) {
  if (n < 0) return -1;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Jacobi symbol (a/n), n odd positive, a >= 0.
int jacobi(std::uint64_t a, std::uint64_t n) {
  a %= n;
  int t = 1;
  while (a != 0) {
    const int v = std::countr_zero(a);
    a >>= v;
    if ((v & 1) && ((n & 7) == 3 || (n & 7) == 5)) t = -t;
    if ((a & 3) == 3 && (n & 3) == 3) t = -t;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? t : 0;
}

}  // namespace

int kronecker_symbol(std::int64_t d, std::int64_t n) {
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  int result = 1;
  if (n < 0) {
    n = -n;
    if (d < 0) result = -result;
  }
  const int v = std::countr_zero(static_cast<std::uint64_t>(n));
  if (v > 0) {
    if ((d & 1) == 0) return 0;
    n >>= v;
    const std::int64_t r = ((d % 8) + 8) % 8;
    if ((v & 1) && (r == 3 || r == 5)) result = -result;
  }
  if (n == 1) return result;
  const auto un = static_cast<std::uint64_t>(n);
  const std::int64_t a = ((d % n) + n) % n;
  return result * jacobi(static_cast<std::uint64_t>(a), un);
}

std::string fundamental_failure(std::int64_t d) {
  if (d == 0) throw DomainError("fundamental discriminant: D must be nonzero");
  if (d == 1) return {};
  const std::int64_t r = mod4(d);
  if (r == 1) {
    if (!is_squarefree(d < 0 ? -d : d)) return "D = " + std::to_string(d) + " is 1 mod 4 but not squarefree";
    return {};
  }
  if (r == 0) {
    const std::int64_t m = d / 4;
    const std::int64_t rm = mod4(m);
    if (rm != 2 && rm != 3)
      return "D = " + std::to_string(d) + " = 4m with m not congruent to 2 or 3 mod 4";
    if (!is_squarefree(m < 0 ? -m : m))
      return "D = " + std::to_string(d) + " = 4m with m not squarefree";
    return {};
  }
  return "D = " + std::to_string(d) + " is congruent to " + std::to_string(r) + " mod 4";
}

bool is_fundamental(std::int64_t d) { return fundamental_failure(d).empty(); }

int kronecker(std::int64_t d, std::int64_t n) {
  if (d != -1) {
    const std::string why = fundamental_failure(d);
    if (!why.empty()) throw DomainError("kronecker: " + why);
  }
  return kronecker_symbol(d, n);
}

FundamentalDiscriminant::FundamentalDiscriminant(std::int64_t d) : d_(d) {
  const std::string why = fundamental_failure(d);
  if (!why.empty()) throw DomainError("not a fundamental discriminant: " + why);
}

std::optional<SquarefreeDecomposition> try_squarefree_decompose(std::int64_t n, Parity k_parity) {
  if (n <= 0) throw DomainError("squarefree_decompose: n must be positive");
  // n = s f^2 with s squarefree
  std::int64_t s = 1, f = 1, rest = n;
  for (std::int64_t p = 2; p * p <= rest; ++p) {
    if (rest % p != 0) continue;
    int e = 0;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) f *= p;
    if (e & 1) s *= p;
  }
  s *= rest;
  const std::int64_t signed_s = sign_of(k_parity) * s;
  if (mod4(signed_s) == 1) return SquarefreeDecomposition{FundamentalDiscriminant(signed_s), f};
  if (f % 2 != 0) return std::nullopt;
  return SquarefreeDecomposition{FundamentalDiscriminant(4 * signed_s), f / 2};
}

SquarefreeDecomposition squarefree_decompose(std::int64_t n, Parity k_parity) {
  auto dec = try_squarefree_decompose(n, k_parity);
  if (!dec) {
    throw DomainError("squarefree_decompose: " + std::to_string(n) +
                      " admits no decomposition |D| m^2 with (-1)^k D > 0 (residue " +
                      std::to_string(mod4(sign_of(k_parity) * n)) + " mod 4)");
  }
  return *dec;
}

void for_each_discriminant(std::int64_t lo, std::int64_t hi, DiscriminantSign sign,
                           ResidueFilter filter,
                           const std::function<void(FundamentalDiscriminant)>& visit) {
  if (lo < 0 || hi <= lo) throw DomainError("enumerate_discriminants: need 0 <= lo < hi");
  const std::int64_t sgn = sign == DiscriminantSign::positive ? 1 : -1;
  const std::int64_t root = isqrt(hi);
  std::vector<std::int64_t> odd_primes;
  {
    std::vector<bool> composite(static_cast<size_t>(root) + 1, false);
    for (std::int64_t p = 2; p <= root; ++p) {
      if (composite[p]) continue;
      if (p > 2) odd_primes.push_back(p);
      for (std::int64_t q = p * p; q <= root; q += p) composite[q] = true;
    }
  }
  constexpr std::int64_t kBlock = 1 << 18;
  std::vector<char> odd_squarefree;
  for (std::int64_t start = lo + 1; start <= hi; start += kBlock) {
    const std::int64_t stop = std::min(hi, start + kBlock - 1);
    odd_squarefree.assign(static_cast<size_t>(stop - start + 1), 1);
    for (const std::int64_t p : odd_primes) {
      const std::int64_t sq = p * p;
      if (sq > stop) break;
      std::int64_t first = ((start + sq - 1) / sq) * sq;
      for (std::int64_t v = first; v <= stop; v += sq) odd_squarefree[v - start] = 0;
    }
    for (std::int64_t a = start; a <= stop; ++a) {
      if (!odd_squarefree[a - start]) continue;
      const std::int64_t d = sgn * a;
      const std::int64_t r = mod4(d);
      bool fundamental = false;
      if (r == 1) {
        fundamental = true;
      } else if (r == 0 && filter == ResidueFilter::all) {
        const std::int64_t rm = mod4(d / 4);
        fundamental = (rm == 2 || rm == 3);
      }
      if (fundamental) visit(FundamentalDiscriminant(d, FundamentalDiscriminant::Unchecked{}));
    }
  }
}

std::vector<FundamentalDiscriminant> enumerate_discriminants(std::int64_t lo, std::int64_t hi,
                                                             DiscriminantSign sign,
                                                             ResidueFilter filter) {
  std::vector<FundamentalDiscriminant> out;
  for_each_discriminant(lo, hi, sign, filter, [&](FundamentalDiscriminant d) { out.push_back(d); });
  return out;
}

std::vector<FundamentalDiscriminant> first_admissible_discriminants(Parity k_parity,
                                                                    std::size_t count) {
  std::vector<FundamentalDiscriminant> out;
  std::int64_t hi = 64;
  while (out.size() < count) {
    out = enumerate_discriminants(0, hi, admissible_sign(k_parity), ResidueFilter::all);
    hi *= 2;
  }
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
  return out;
}

PrimeTable::PrimeTable(std::int64_t limit) : limit_(limit) {
  if (limit < 2) return;
  std::vector<bool> composite(static_cast<size_t>(limit) + 1, false);
  for (std::int64_t p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    primes_.push_back(p);
    if (p <= limit / p)
      for (std::int64_t q = p * p; q <= limit; q += p) composite[q] = true;
  }
}

bool PrimeTable::contains(std::int64_t p) const { return std::binary_search(primes_.begin(), primes_.end(), p); }

std::ptrdiff_t PrimeTable::index_of(std::int64_t p) const {
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p) return -1;
  return it - primes_.begin();
}

std::size_t PrimeTable::count_upto(std::int64_t x) const {
  return static_cast<std::size_t>(std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
}

std::vector<std::uint32_t> smallest_prime_factors(std::int64_t limit) {
  std::vector<std::uint32_t> spf(static_cast<size_t>(std::max<std::int64_t>(limit, 1)) + 1, 0);
  std::vector<std::uint32_t> primes;
  for (std::int64_t i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      spf[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (const std::uint32_t p : primes) {
      if (p > spf[i] || static_cast<std::int64_t>(p) * i > limit) break;
      spf[static_cast<size_t>(p * i)] = p;
    }
  }
  return spf;
}

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

std::vector<std::int64_t> prime_divisors(std::int64_t n) {
  if (n < 0) n = -n;
  std::vector<std::int64_t> out;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

int mobius(std::int64_t n) {
  if (n <= 0) throw DomainError("mobius: n must be positive");
  int mu = 1;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0;
    mu = -mu;
  }
  if (n > 1) mu = -mu;
  return mu;
}

int divisor_count(std::int64_t n) {
  if (n <= 0) throw DomainError("divisor_count: n must be positive");
  int count = 1;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    count *= e + 1;
  }
  if (n > 1) count *= 2;
  return count;
}

bool is_squarefree(std::int64_t n) {
  if (n < 0) n = -n;
  if (n == 0) return false;
  if (n % 4 == 0) return false;
  for (std::int64_t p = 3; p * p <= n; p += 2) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return false;
  }
  return true;
}

bool is_perfect_square(std::int64_t n) {
  if (n < 0) return false;
  const std::int64_t r = isqrt(n);
  return r * r == n;
}

std::vector<std::int64_t> divisors(std::int64_t n) {
  std::vector<std::int64_t> small, large;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    small.push_back(d);
    if (d != n / d) large.push_back(n / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

std::vector<mpz_class> divisor_sigma_table(unsigned power, std::int64_t limit) {
  const auto spf = smallest_prime_factors(limit);
  std::vector<mpz_class> sigma(static_cast<size_t>(limit) + 1);
  if (limit >= 1) sigma[1] = 1;
  for (std::int64_t n = 2; n <= limit; ++n) {
    const std::int64_t p = spf[n];
    std::int64_t m = n;
    mpz_class pk, term = 1, local = 1;
    mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), power);
    while (m % p == 0) {
      m /= p;
      term *= pk;
      local += term;
    }
    sigma[n] = local * sigma[m];
  }
  return sigma;
}

std::vector<std::int8_t> character_table(std::int64_t d, std::int64_t limit,
                                         std::span<const std::uint32_t> spf) {
  if (static_cast<std::int64_t>(spf.size()) <= limit)
    throw DomainError("character_table: factor table too short");
  std::vector<std::int8_t> chi(static_cast<size_t>(limit) + 1, 0);
  if (limit >= 1) chi[1] = 1;
  for (std::int64_t n = 2; n <= limit; ++n) {
    const std::uint32_t p = spf[n];
    if (p == n) {
      chi[n] = static_cast<std::int8_t>(kronecker_symbol(d, n));
    } else {
      chi[n] = static_cast<std::int8_t>(chi[p] * chi[n / p]);
    }
  }
  return chi;
}

}  // namespace mfres
