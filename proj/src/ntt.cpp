#include "mfres/ntt.hpp"

#include "mfres/errors.hpp"

#include <algorithm>
#include <mutex>

namespace mfres::detail {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

bool miller_rabin(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

u64 primitive_root(u64 p) {
  std::vector<u64> factors;
  u64 m = p - 1;
  for (u64 q = 2; q * q <= m; ++q) {
    if (m % q) continue;
    factors.push_back(q);
    while (m % q == 0) m /= q;
  }
  if (m > 1) factors.push_back(m);
  for (u64 g = 2;; ++g) {
    bool ok = true;
    for (u64 q : factors)
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
}

constexpr int kTwoAdicity = 24;

// Montgomery arithmetic modulo an odd p < 2^62, R = 2^64.
struct Montgomery {
  u64 p, pinv_neg, r2;

  explicit Montgomery(u64 mod) : p(mod) {
    u64 inv = p;  // Newton iteration for p^{-1} mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    pinv_neg = ~inv + 1;
    r2 = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    r2 = mulmod(r2, r2, p);
  }
  u64 reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * pinv_neg;
    const u64 r = static_cast<u64>((t + static_cast<u128>(m) * p) >> 64);
    return r >= p ? r - p : r;
  }
  u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
  u64 to(u64 a) const { return mul(a % p, r2); }
  u64 from(u64 a) const { return reduce(a); }
};

void ntt(std::vector<u64>& a, const Montgomery& mg, u64 root_mont, bool invert) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const u64 p = mg.p;
  std::vector<u64> w;
  for (size_t len = 2; len <= n; len <<= 1) {
    // root of order len
    u64 wl = root_mont;
    for (size_t s = n; s > len; s >>= 1) wl = mg.mul(wl, wl);
    const size_t half = len >> 1;
    w.resize(half);
    w[0] = mg.to(1);
    for (size_t i = 1; i < half; ++i) w[i] = mg.mul(w[i - 1], wl);
    for (size_t i = 0; i < n; i += len) {
      for (size_t j = 0; j < half; ++j) {
        const u64 u = a[i + j];
        const u64 v = mg.mul(a[i + j + half], w[j]);
        u64 x = u + v;
        if (x >= p) x -= p;
        a[i + j] = x;
        a[i + j + half] = u >= v ? u - v : u + p - v;
      }
    }
  }
  if (invert) {
    const u64 ninv = mg.to(powmod(n % p, p - 2, p));
    for (auto& x : a) x = mg.mul(x, ninv);
  }
}

std::vector<NttPrime>& prime_cache() {
  static std::vector<NttPrime> cache;
  return cache;
}

}  // namespace

std::span<const NttPrime> ntt_primes(std::size_t count) {
  static std::mutex lock;
  std::lock_guard<std::mutex> guard(lock);
  auto& cache = prime_cache();
  u64 c = cache.empty() ? ((1ULL << 62) >> kTwoAdicity) - 1
                        : ((cache.back().modulus - 1) >> kTwoAdicity) - 1;
  while (cache.size() < count) {
    const u64 p = (c << kTwoAdicity) + 1;
    if (miller_rabin(p)) cache.push_back({p, primitive_root(p), kTwoAdicity});
    --c;
  }
  return std::span<const NttPrime>(cache.data(), count);
}

std::size_t primes_for_bound(std::size_t bound_bits) {
  // each prime contributes at least 61 bits
  return (bound_bits + 2 + 60) / 61;
}

std::vector<mpz_class> convolve_exact(std::span<const mpz_class> a, std::span<const mpz_class> b,
                                      std::size_t out_len, std::size_t bound_bits) {
  std::vector<mpz_class> out(out_len);
  if (a.empty() || b.empty() || out_len == 0) return out;
  const size_t la = std::min(a.size(), out_len), lb = std::min(b.size(), out_len);
  const size_t full = std::min(la + lb - 1, out_len);
  size_t n = 1;
  while (n < la + lb - 1) n <<= 1;
  if (n > (size_t{1} << kTwoAdicity)) throw PrecisionError("convolve_exact: transform length exceeds prime support");

  const size_t count = primes_for_bound(bound_bits);
  const auto primes = ntt_primes(count);
  std::vector<std::vector<u64>> residues(count);

  std::vector<u64> fa, fb;
  for (size_t k = 0; k < count; ++k) {
    const Montgomery mg(primes[k].modulus);
    const u64 p = primes[k].modulus;
    auto load = [&](std::span<const mpz_class> src, size_t len, std::vector<u64>& dst) {
      dst.assign(n, 0);
      for (size_t i = 0; i < len; ++i) {
        mpz_srcptr z = src[i].get_mpz_t();
        u64 r;
        if (mpz_fits_slong_p(z)) {
          const long v = mpz_get_si(z);
          r = v >= 0 ? static_cast<u64>(v) % p : p - (static_cast<u64>(-(v + 1)) + 1) % p;
          if (r == p) r = 0;
        } else {
          r = mpz_fdiv_ui(z, p);
        }
        dst[i] = mg.to(r);
      }
    };
    load(a, la, fa);
    load(b, lb, fb);
    const u64 g = mg.to(primes[k].generator);
    u64 root = powmod(primes[k].generator, (p - 1) / n, p);
    const u64 root_mont = mg.to(root);
    (void)g;
    ntt(fa, mg, root_mont, false);
    ntt(fb, mg, root_mont, false);
    for (size_t i = 0; i < n; ++i) fa[i] = mg.mul(fa[i], fb[i]);
    const u64 inv_root = mg.to(powmod(root, p - 2, p));
    ntt(fa, mg, inv_root, true);
    residues[k].resize(full);
    for (size_t i = 0; i < full; ++i) residues[k][i] = mg.from(fa[i]);
  }

  // Garner mixed-radix reconstruction, symmetric range
  std::vector<std::vector<u64>> inv(count, std::vector<u64>(count, 0));
  for (size_t i = 0; i < count; ++i)
    for (size_t j = i + 1; j < count; ++j)
      inv[i][j] = powmod(primes[i].modulus % primes[j].modulus, primes[j].modulus - 2, primes[j].modulus);
  mpz_class modulus = 1;
  for (size_t k = 0; k < count; ++k) modulus *= static_cast<unsigned long>(primes[k].modulus);
  mpz_class half = modulus / 2;
  std::vector<u64> digits(count);
  for (size_t i = 0; i < full; ++i) {
    for (size_t j = 0; j < count; ++j) {
      const u64 pj = primes[j].modulus;
      u64 t = residues[j][i];
      for (size_t l = 0; l < j; ++l) {
        const u64 d = digits[l] % pj;
        t = t >= d ? t - d : t + pj - d;
        t = mulmod(t, inv[l][j], pj);
      }
      digits[j] = t;
    }
    mpz_class& x = out[i];
    x = static_cast<unsigned long>(digits[count - 1]);
    for (size_t j = count - 1; j-- > 0;) {
      x *= static_cast<unsigned long>(primes[j].modulus);
      x += static_cast<unsigned long>(digits[j]);
    }
    if (x > half) x -= modulus;
  }
  return out;
}

}  // namespace mfres::detail
