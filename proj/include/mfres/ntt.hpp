#pragma once

// Residue-number-system convolution: several word-sized NTT primes, CRT back
// to exact integers.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mfres::detail {

struct NttPrime {
  std::uint64_t modulus;
  std::uint64_t generator;  // primitive root
  int two_adicity;          // 2^two_adicity divides modulus - 1
};

/// NTT-friendly primes below 2^62, descending. The list is generated once.
std::span<const NttPrime> ntt_primes(std::size_t count);

/// Primes needed so that the modulus product exceeds 2^(bound_bits + 1).
std::size_t primes_for_bound(std::size_t bound_bits);

/// Exact truncated product: out[i] = sum_{j} a[j] b[i-j] for i < out_len.
/// `bound_bits` must bound log2 of every |out[i]|.
std::vector<mpz_class> convolve_exact(std::span<const mpz_class> a, std::span<const mpz_class> b,
                                      std::size_t out_len, std::size_t bound_bits);

}  // namespace mfres::detail
