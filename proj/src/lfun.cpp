#include "mfres/lfun.hpp"

#include "mfres/errors.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace mfres {

namespace {

template <class Scalar>
void require_bits(int bits) {
  if (bits < 8 || bits > mantissa_bits<Scalar>())
    throw DomainError("bits " + std::to_string(bits) + " outside [8, " + std::to_string(mantissa_bits<Scalar>()) +
                      "] for this scalar");
}

}  // namespace

const std::vector<mpq_class>& bernoulli_numbers(std::size_t n) {
  static std::mutex m;
  static std::vector<mpq_class> b{mpq_class(1)};
  std::lock_guard lock(m);
  while (b.size() <= n) {
    const std::size_t k = b.size();
    mpq_class s = 0;
    mpz_class binom = 1;  // C(k+1, j)
    for (std::size_t j = 0; j < k; ++j) {
      s += binom * b[j];
      binom = binom * static_cast<unsigned long>(k + 1 - j) / static_cast<unsigned long>(j + 1);
    }
    b.push_back(-s / static_cast<unsigned long>(k + 1));
  }
  return b;
}

template <class Scalar>
Scalar regularized_upper_gamma(int k, Scalar y) {
  if (k < 1) throw DomainError("regularized_upper_gamma: k must be positive");
  if (y < 0) throw DomainError("regularized_upper_gamma: y must be nonnegative");
  using std::exp;
  Scalar t = 1;
  for (int j = k - 1; j >= 1; --j) t = 1 + t * y / Scalar(j);
  return exp(-y) * t;
}

AfeWindow::AfeWindow(int k) : k_(k) {
  if (k < 1) throw DomainError("AfeWindow: k must be positive");
}

template <class Scalar>
Scalar AfeWindow::operator()(Scalar x) const {
  return regularized_upper_gamma<Scalar>(k_, 2 * pi<Scalar>() * x);
}

double central_tail_bound(int k, std::int64_t q, std::int64_t t) {
  // sum_{n>t} Q(k, c n) <= (1/c) int_{ct}^inf Q(k, y) dy = (1/c) sum_{j=1}^{k} Q(j, ct)
  const double c = 2 * 3.14159265358979323846 / static_cast<double>(q);
  const double y = c * static_cast<double>(t);
  double s = 0, term = 1, partial = 0;
  for (int j = 1; j <= k; ++j) {
    partial += term;  // sum_{i<j} y^i / i!
    s += partial;
    term *= y / j;
  }
  return 4 / c * std::exp(-y) * s;
}

std::int64_t central_truncation(int k, std::int64_t q, int bits) {
  if (q < 1) throw DomainError("central_truncation: |D| must be positive");
  const double target = std::ldexp(1.0, -bits / 2);
  auto t = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(q) * (k + 0.7 * bits) / (2 * 3.14159265358979323846)));
  t = std::max<std::int64_t>(t, 1);
  while (central_tail_bound(k, q, t) >= target) t += std::max<std::int64_t>(1, t / 16);
  return t;
}

template <class Scalar>
TwistEvaluator<Scalar>::TwistEvaluator(const Eigenform& f, std::int64_t limit)
    : k_(f.k()), limit_(limit) {
  NormalizedCoeffTable<Scalar> table(f, limit);
  weight_.assign(static_cast<size_t>(limit) + 1, Scalar(0));
  using std::sqrt;
  for (std::int64_t n = 1; n <= limit; ++n) weight_[n] = table(n) / sqrt(Scalar(n));
  spf_ = smallest_prime_factors(limit);
}

template <class Scalar>
LValue<Scalar> TwistEvaluator<Scalar>::central_at(const FundamentalDiscriminant& d, std::int64_t t, int bits) const {
  require_bits<Scalar>(bits);
  LValue<Scalar> out;
  out.bits = bits;
  // root number (-1)^k chi_D(-1) = -1 forces a zero central value
  if ((k_ % 2 == 0) != (d.value() > 0)) return out;
  if (t > limit_)
    throw TableExhausted("central value for D = " + std::to_string(d.value()) + " needs truncation " +
                             std::to_string(t) + " beyond coefficient table " + std::to_string(limit_),
                         t);
  const auto chi = character_table(d.value(), t, spf_);
  using std::exp;
  const Scalar c = 2 * pi<Scalar>() / Scalar(d.abs());
  const Scalar step = exp(-c);
  std::vector<Scalar> inv(static_cast<size_t>(k_));
  for (int j = 1; j < k_; ++j) inv[j] = Scalar(1) / Scalar(j);
  Scalar e = 1, sum = 0;
  for (std::int64_t n = 1; n <= t; ++n) {
    if (n % 256 == 0) {
      e = exp(-c * Scalar(n));
    } else {
      e *= step;
    }
    const int x = chi[static_cast<size_t>(n)];
    if (x == 0 || weight_[n] == 0) continue;
    const Scalar y = c * Scalar(n);
    Scalar poly = 1;
    for (int j = k_ - 1; j >= 1; --j) poly = 1 + poly * y * inv[j];
    const Scalar term = weight_[n] * poly * e;
    if (x > 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }
  out.value = 2 * sum;
  out.truncation = t;
  const double tail = central_tail_bound(k_, d.abs(), t);
  out.tail_bound = Scalar(tail);
  out.degraded = !(tail < std::ldexp(1.0, -bits / 2));
  return out;
}

template <class Scalar>
LValue<Scalar> TwistEvaluator<Scalar>::central(const FundamentalDiscriminant& d, int bits) const {
  require_bits<Scalar>(bits);
  if ((k_ % 2 == 0) != (d.value() > 0)) {
    LValue<Scalar> zero;
    zero.bits = bits;
    return zero;
  }
  return central_at(d, central_truncation(k_, d.abs(), bits), bits);
}

template <class Scalar>
LValue<Scalar> central_lvalue(const Eigenform& f, const FundamentalDiscriminant& d, int bits) {
  require_bits<Scalar>(bits);
  if ((f.k() % 2 == 0) != (d.value() > 0)) {
    LValue<Scalar> zero;
    zero.bits = bits;
    return zero;
  }
  const auto t = central_truncation(f.k(), d.abs(), bits);
  if (t > f.prec_primes())
    throw TableExhausted("central value for D = " + std::to_string(d.value()) + " of weight " +
                             std::to_string(f.weight()),
                         t);
  return TwistEvaluator<Scalar>(f, t).central_at(d, t, bits);
}

namespace {

/// sum_{m >= 0} (m + x)^(-s) by Euler-Maclaurin; *rem receives twice the first omitted term.
template <class Scalar>
Scalar hurwitz_tail(Scalar s, Scalar x, int terms, Scalar* rem) {
  using std::abs;
  using std::pow;
  const auto& b = bernoulli_numbers(static_cast<size_t>(2 * terms + 2));
  const Scalar xs = pow(x, -s);
  Scalar sum = x * xs / (s - 1) + xs / 2;
  Scalar rising = s;          // s (s+1) ... (s + 2j - 2)
  Scalar xp = xs / x;         // x^(-s-2j+1)
  Scalar fact = 2;            // (2j)!
  const Scalar x2 = x * x;
  for (int j = 1; j <= terms + 1; ++j) {
    const Scalar term = to_scalar<Scalar>(b[static_cast<size_t>(2 * j)]) / fact * rising * xp;
    if (j == terms + 1) {
      *rem = 2 * abs(term);
      break;
    }
    sum += term;
    rising *= (s + Scalar(2 * j - 1)) * (s + Scalar(2 * j));
    xp /= x2;
    fact *= Scalar((2 * j + 1) * (2 * j + 2));
  }
  return sum;
}

}  // namespace

template <class Scalar>
LValue<Scalar> dirichlet_lvalue(const FundamentalDiscriminant& d, Scalar s, int bits) {
  require_bits<Scalar>(bits);
  if (!(s > 1)) throw DomainError("dirichlet_lvalue: s must exceed 1");
  using std::pow;
  LValue<Scalar> out;
  out.bits = bits;
  const double target = std::ldexp(1.0, -bits / 2);
  const std::int64_t q = d.abs();
  const double sd = static_cast<double>(s);

  const double t_pv = dirichlet_truncation(q, sd, bits);
  const int em_terms = bits >= 100 ? 24 : 12;
  std::int64_t m = 64;
  const double em_cost = static_cast<double>(q) * (static_cast<double>(m) + 2.0 * em_terms + 20);

  if (t_pv <= em_cost) {
    const auto t = static_cast<std::int64_t>(t_pv);
    const auto spf = smallest_prime_factors(t);
    const auto pw = inverse_power_table<Scalar>(t, s);
    return dirichlet_partial<Scalar>(d, pw, spf, t, sd, bits);
  }

  // Euler-Maclaurin per residue class: n = a + q m, m >= M
  for (;;) {
    const std::int64_t t = q * m;
    Scalar rem_unit = 0;
    hurwitz_tail<Scalar>(s, Scalar(m), em_terms, &rem_unit);
    const Scalar bound = Scalar(q) * pow(Scalar(q), -s) * rem_unit;
    if (!(static_cast<double>(bound) < target) && m < (std::int64_t(1) << 20)) {
      m *= 2;
      continue;
    }
    const auto spf = smallest_prime_factors(std::max<std::int64_t>(t, q));
    const auto chi = character_table(d.value(), std::max<std::int64_t>(t, q), spf);
    const auto pw = inverse_power_table<Scalar>(t, s);
    Scalar sum = 0;
    for (std::int64_t n = 1; n <= t; ++n)
      if (chi[n] != 0) sum += chi[n] > 0 ? pw[n] : -pw[n];
    const Scalar qs = pow(Scalar(q), -s);
    Scalar rem_total = 0;
    for (std::int64_t a = 1; a <= q; ++a) {
      if (chi[a] == 0) continue;
      Scalar rem = 0;
      const Scalar x = Scalar(m) + Scalar(a) / Scalar(q);
      // class a: n = a + q (m + j), j >= 0, i.e. q (x + j) with x = m + a/q
      const Scalar h = hurwitz_tail<Scalar>(s, x, em_terms, &rem);
      sum += chi[a] > 0 ? qs * h : -qs * h;
      rem_total += qs * rem;
    }
    out.value = sum;
    out.tail_bound = rem_total;
    out.truncation = t;
    out.degraded = !(static_cast<double>(rem_total) < target);
    return out;
  }
}

double dirichlet_truncation(std::int64_t q, double s, int bits) {
  if (q == 1) return INFINITY;
  const double target = std::ldexp(1.0, -bits / 2);
  const double pv = 2 * std::sqrt(static_cast<double>(q)) * std::log(4.0 * static_cast<double>(q));
  return std::max(1.0, std::ceil(std::pow(pv / target, 1 / s)));
}

template <class Scalar>
LValue<Scalar> dirichlet_partial(const FundamentalDiscriminant& d, std::span<const Scalar> inv_powers,
                                 std::span<const std::uint32_t> spf, std::int64_t t, double s, int bits) {
  if (t >= static_cast<std::int64_t>(inv_powers.size()) || t >= static_cast<std::int64_t>(spf.size()))
    throw DomainError("dirichlet_partial: tables shorter than the truncation");
  const auto chi = character_table(d.value(), t, spf);
  Scalar sum = 0;
  for (std::int64_t n = 1; n <= t; ++n)
    if (chi[n] != 0) sum += chi[n] > 0 ? inv_powers[n] : -inv_powers[n];
  LValue<Scalar> out;
  out.bits = bits;
  out.value = sum;
  out.truncation = t;
  const double q = static_cast<double>(d.abs());
  const double tail = d.abs() == 1 ? INFINITY : 2 * std::sqrt(q) * std::log(4 * q) * std::pow(static_cast<double>(t), -s);
  out.tail_bound = Scalar(tail);
  out.degraded = !(tail < std::ldexp(1.0, -bits / 2));
  return out;
}

template <class Scalar>
std::vector<Scalar> inverse_power_table(std::int64_t limit, Scalar s) {
  std::vector<Scalar> pw(static_cast<size_t>(std::max<std::int64_t>(limit, 0)) + 1, Scalar(0));
  if (limit < 1) return pw;
  pw[1] = 1;
  const auto spf = smallest_prime_factors(limit);
  using std::exp;
  using std::log;
  for (std::int64_t n = 2; n <= limit; ++n) {
    const std::int64_t p = spf[static_cast<size_t>(n)];
    pw[n] = p == n ? exp(-s * log(Scalar(p))) : pw[p] * pw[n / p];
  }
  return pw;
}

template <class Scalar>
LValue<Scalar> hecke_lvalue_halfint(const PlusForm& g, Scalar s, std::int64_t terms) {
  const double sigma0 = g.k() / 2.0 + 1.25;
  if (!(static_cast<double>(s) > sigma0 + 0.25))
    throw DomainError("hecke_lvalue_halfint: s must exceed k/2 + 5/4 + 1/4 (no analytic continuation)");
  const std::int64_t n_max = terms < 0 ? g.prec() - 1 : std::min<std::int64_t>(terms, g.prec() - 1);
  LValue<Scalar> out;
  out.bits = mantissa_bits<Scalar>();
  out.truncation = n_max;
  if (n_max < 1) return out;
  const auto c = g.dense<Scalar>(n_max + 1);
  const auto pw = inverse_power_table<Scalar>(n_max, s);
  Scalar sum = 0;
  for (std::int64_t n = 1; n <= n_max; ++n)
    if (c[n] != 0) sum += c[n] * pw[n];
  out.value = sum;
  // sum_{n > N} 2W n^(k/2+1/4-s) <= 2W N^(k/2+5/4-s) / (s - k/2 - 5/4)
  const double sd = static_cast<double>(s);
  out.tail_bound = Scalar(2 * g.hecke_witness() * std::pow(static_cast<double>(n_max), sigma0 - sd) / (sd - sigma0));
  return out;
}

template <class Scalar>
Scalar rankin_sum(const Eigenform& f, const Eigenform& f2, std::int64_t x) {
  if (f.weight() != f2.weight()) throw DomainError("rankin_sum: weights differ");
  if (x > f.prec_primes() || x > f2.prec_primes()) throw TableExhausted("rankin_sum", x);
  Real128 sum = 0;
  for (auto p : f.primes()) {
    if (p > x) break;
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(f.weight() - 1));
    sum += f.prime_coeff(p) * f2.prime_coeff(p) / to_scalar<Real128>(pw) * log(Real128(p));
  }
  return scalar_cast<Scalar>(sum);
}

namespace {

template <class Scalar>
struct StirlingData {
  double shift;
  std::vector<Scalar> coeffs;  // B_2j / (2j (2j - 1))
  Scalar half_log_two_pi;
};

template <class Scalar>
const StirlingData<Scalar>& stirling() {
  static const StirlingData<Scalar> data = [] {
    const int terms = mantissa_bits<Scalar>() > 64 ? 20 : 8;
    StirlingData<Scalar> d;
    d.shift = mantissa_bits<Scalar>() > 64 ? 40 : 10;
    const auto& b = bernoulli_numbers(static_cast<size_t>(2 * terms));
    for (int j = 1; j <= terms; ++j)
      d.coeffs.push_back(to_scalar<Scalar>(b[static_cast<size_t>(2 * j)] / mpq_class(2 * j * (2 * j - 1))));
    using std::log;
    d.half_log_two_pi = log(2 * pi<Scalar>()) / 2;
    return d;
  }();
  return data;
}

template <class Scalar>
Scalar log_gamma_positive(Scalar x) {
  using std::log;
  const auto& st = stirling<Scalar>();
  Scalar prod = 1;
  Scalar z = x;
  while (z < Scalar(st.shift)) {
    prod *= z;
    z += 1;
  }
  const Scalar inv = 1 / z;
  const Scalar inv2 = inv * inv;
  Scalar series = 0;
  Scalar p = inv;
  for (const auto& c : st.coeffs) {
    series += c * p;
    p *= inv2;
  }
  Scalar result = (z - Scalar(0.5)) * log(z) - z + st.half_log_two_pi + series;
  if (prod != 1) result -= log(prod);
  return result;
}

template <class Scalar>
bool is_nonpositive_integer(const Scalar& s) {
  using std::floor;
  return s <= 0 && floor(s) == s;
}

template <class Scalar>
Scalar sin_pi(Scalar s) {
  using std::floor;
  using std::sin;
  const Scalar r = s - 2 * floor(s / 2);  // [0, 2)
  return sin(pi<Scalar>() * r);
}

}  // namespace

template <class Scalar>
Scalar log_abs_gamma(Scalar s, int* sign) {
  if (is_nonpositive_integer(s)) throw DomainError("Gamma has a pole at " + to_decimal(s));
  using std::abs;
  using std::log;
  if (s > 0) {
    if (sign) *sign = 1;
    return log_gamma_positive(s);
  }
  const Scalar sp = sin_pi(s);
  if (sign) *sign = sp > 0 ? 1 : -1;
  return log(pi<Scalar>()) - log(abs(sp)) - log_gamma_positive(1 - s);
}

template <class Scalar>
Scalar real_gamma(Scalar s) {
  if (is_nonpositive_integer(s)) throw DomainError("Gamma has a pole at " + to_decimal(s));
  using std::exp;
  if (s < Scalar(0.5)) return pi<Scalar>() / (sin_pi(s) * real_gamma(1 - s));
  return exp(log_gamma_positive(s));
}

template <class Scalar>
Scalar gamma_ratio(Scalar x, Scalar y) {
  using std::exp;
  using std::floor;
  using std::round;
  const Scalar diff = x - y;
  if (x < Scalar(0.5) && y < Scalar(0.5) && floor(diff) == diff) {
    const bool odd = static_cast<long long>(diff) % 2 != 0;
    const Scalar r = gamma_ratio(1 - y, 1 - x);
    return odd ? -r : r;
  }
  if (is_nonpositive_integer(x)) throw DomainError("gamma_ratio: numerator pole at " + to_decimal(x));
  if (is_nonpositive_integer(y)) return Scalar(0);
  int sx = 1, sy = 1;
  const Scalar lx = log_abs_gamma(x, &sx);
  const Scalar ly = log_abs_gamma(y, &sy);
  const Scalar r = exp(lx - ly);
  return sx * sy > 0 ? r : -r;
}

#define MFRES_LFUN_INSTANTIATE(S)                                                                  \
  template S regularized_upper_gamma<S>(int, S);                                                  \
  template S AfeWindow::operator()<S>(S) const;                                                   \
  template class TwistEvaluator<S>;                                                               \
  template LValue<S> central_lvalue<S>(const Eigenform&, const FundamentalDiscriminant&, int);    \
  template LValue<S> dirichlet_lvalue<S>(const FundamentalDiscriminant&, S, int);                 \
  template LValue<S> dirichlet_partial<S>(const FundamentalDiscriminant&, std::span<const S>,     \
                                          std::span<const std::uint32_t>, std::int64_t, double, int); \
  template LValue<S> hecke_lvalue_halfint<S>(const PlusForm&, S, std::int64_t);                   \
  template std::vector<S> inverse_power_table<S>(std::int64_t, S);                                \
  template S rankin_sum<S>(const Eigenform&, const Eigenform&, std::int64_t);                     \
  template S real_gamma<S>(S);                                                                    \
  template S log_abs_gamma<S>(S, int*);                                                           \
  template S gamma_ratio<S>(S, S);
MFRES_LFUN_INSTANTIATE(double)
MFRES_LFUN_INSTANTIATE(Real128)

}  // namespace mfres
