#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numeric routines.

#include "mfres/resonance.hpp"
#include "mfres/scalar.hpp"

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using mfres::Real128;

inline std::vector<std::int64_t> prime_factors(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  if (n > 1) out.push_back(n);
  return out;
}

inline bool trial_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

inline int brute_mobius(std::int64_t n) {
  int mu = 1;
  for (std::int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      mu = -mu;
    }
  return n > 1 ? -mu : mu;
}

inline std::int64_t powmod(std::int64_t a, std::int64_t e, std::int64_t m) {
  __int128 r = 1, b = ((a % m) + m) % m;
  while (e > 0) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return static_cast<std::int64_t>(r);
}

// Legendre symbol by Euler's criterion.
inline int legendre(std::int64_t a, std::int64_t p) {
  const std::int64_t r = powmod(a, (p - 1) / 2, p);
  return r == 0 ? 0 : (r == 1 ? 1 : -1);
}

// Kronecker (d/n), n > 0, by factoring n.
inline int kronecker(std::int64_t d, std::int64_t n) {
  int result = 1;
  for (std::int64_t p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      n /= p;
      if (p == 2) {
        if (d % 2 == 0) return 0;
        const std::int64_t r = ((d % 8) + 8) % 8;
        result *= (r == 1 || r == 7) ? 1 : -1;
      } else {
        result *= legendre(d, p);
      }
    }
  if (n > 1) {
    if (n == 2) {
      if (d % 2 == 0) return 0;
      const std::int64_t r = ((d % 8) + 8) % 8;
      result *= (r == 1 || r == 7) ? 1 : -1;
    } else {
      result *= legendre(d, n);
    }
  }
  return result;
}

// The definition: 1, squarefree = 1 mod 4, or 4m with m squarefree = 2, 3 mod 4.
inline bool fundamental(std::int64_t d) {
  if (d == 1) return true;
  auto squarefree = [](std::int64_t m) {
    m = m < 0 ? -m : m;
    for (std::int64_t p = 2; p * p <= m; ++p)
      if (m % (p * p) == 0) return false;
    return m != 0;
  };
  const std::int64_t r = ((d % 4) + 4) % 4;
  if (r == 1) return squarefree(d);
  if (r == 0) {
    const std::int64_t m = d / 4;
    const std::int64_t rm = ((m % 4) + 4) % 4;
    return (rm == 2 || rm == 3) && squarefree(m);
  }
  return false;
}

inline double zeta2() { return std::numbers::pi * std::numbers::pi / 6; }

// X / (2 zeta(2)) prod_{p | 2u} p / (p + 1)
inline double lemma1_main_term(std::int64_t u, double x) {
  double prod = 1;
  for (auto p : prime_factors(2 * u)) prod *= static_cast<double>(p) / static_cast<double>(p + 1);
  return x / (2 * zeta2()) * prod;
}

// The diagonal main term, with the resonator weights rebuilt from the window data.
inline double diagonal_main_term(const mfres::Resonator& res, double x) {
  long double sum = 0;
  for (const auto& term : res.support) {
    long double w = 1;
    for (auto i : term.factors) w *= static_cast<long double>(res.r_p[i]) * res.a1_normalized[i];
    long double local = 1;
    for (auto p : prime_factors(2 * term.n)) local *= static_cast<long double>(p) / static_cast<long double>(p + 1);
    sum += w * w * local;
  }
  return static_cast<double>(static_cast<long double>(x) / (2 * zeta2()) * sum);
}

inline mpq_class exact(long double v) {
  int e = 0;
  long double m = std::frexp(v, &e);
  // 64-bit mantissa
  m = std::ldexp(m, 64);
  mpz_class mant;
  const bool neg = m < 0;
  if (neg) m = -m;
  const auto hi = static_cast<unsigned long>(std::floor(m / 4294967296.0L));
  const auto lo = static_cast<unsigned long>(m - static_cast<long double>(hi) * 4294967296.0L);
  mant = mpz_class(hi) * mpz_class(4294967296ul) + lo;
  if (neg) mant = -mant;
  mpq_class q(mant);
  e -= 64;
  if (e > 0) q *= mpq_class(mpz_class(1) << e);
  else if (e < 0) q /= mpq_class(mpz_class(1) << -e);
  return q;
}

// moment2^3 <= count^2 moment6 in exact rational arithmetic
inline bool holder_exact(long double moment2, long double moment6, std::int64_t count) {
  const mpq_class m2 = exact(moment2), m6 = exact(moment6);
  const mpq_class c(static_cast<long>(count));
  return m2 * m2 * m2 <= c * c * m6;
}

// p(s) / q(s) with deg p = a, q monic of degree b, through a + b + 1 points.
inline std::function<Real128(Real128)> rational_fit(const std::vector<Real128>& xs, const std::vector<Real128>& ys,
                                                    int a, int b) {
  const std::size_t n = static_cast<std::size_t>(a + b + 1);
  if (xs.size() != n || ys.size() != n) throw std::invalid_argument("rational_fit: need a + b + 1 samples");
  // unknowns p_0..p_a, q_0..q_{b-1}:  p(x) - y q(x) = y x^b
  std::vector<std::vector<Real128>> m(n, std::vector<Real128>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    Real128 pw = 1;
    for (int j = 0; j <= a; ++j, pw *= xs[i]) m[i][static_cast<std::size_t>(j)] = pw;
    pw = 1;
    for (int j = 0; j < b; ++j, pw *= xs[i]) m[i][static_cast<std::size_t>(a + 1 + j)] = -ys[i] * pw;
    m[i][n] = ys[i] * pw;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (abs(m[r][c]) > abs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const Real128 f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<Real128> p(static_cast<std::size_t>(a + 1)), q(static_cast<std::size_t>(b + 1));
  for (int j = 0; j <= a; ++j) p[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)][n] / m[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
  for (int j = 0; j < b; ++j) {
    const auto r = static_cast<std::size_t>(a + 1 + j);
    q[static_cast<std::size_t>(j)] = m[r][n] / m[r][r];
  }
  q[static_cast<std::size_t>(b)] = 1;
  return [p, q](Real128 s) {
    Real128 num = 0, den = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) num = num * s + *it;
    for (auto it = q.rbegin(); it != q.rend(); ++it) den = den * s + *it;
    return num / den;
  };
}

// Integer q-expansion helpers on plain vectors.
inline std::vector<mpz_class> series_mul(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b, std::size_t len) {
  std::vector<mpz_class> out(len);
  for (std::size_t i = 0; i < a.size() && i < len; ++i)
    if (a[i] != 0)
      for (std::size_t j = 0; j < b.size() && i + j < len; ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Delta = q prod (1 - q^n)^24, by direct products.
inline std::vector<mpz_class> delta_naive(std::size_t len) {
  std::vector<mpz_class> p(len);
  p[0] = 1;
  for (std::size_t n = 1; n < len; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (std::size_t i = len; i-- > n;) p[i] -= p[i - n];
  std::vector<mpz_class> out(len);
  for (std::size_t i = 1; i < len; ++i) out[i] = p[i - 1];
  return out;
}

inline mpz_class sigma(unsigned power, std::int64_t n) {
  mpz_class s = 0;
  for (std::int64_t d = 1; d <= n; ++d)
    if (n % d == 0) {
      mpz_class t;
      mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(d), power);
      s += t;
    }
  return s;
}

}  // namespace oracle
