#include "mfres/dseries.hpp"

#include "mfres/errors.hpp"
#include "mfres/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfres {

namespace {

using MatrixR = Eigen::Matrix<Real128, Eigen::Dynamic, Eigen::Dynamic>;
using VectorR = Eigen::Matrix<Real128, Eigen::Dynamic, 1>;

double sigma_hecke(int k) { return k / 2.0 + 1.25; }

void require_region(const char* who, int k, double s) {
  if (!(s > sigma_hecke(k) + 0.25))
    throw DomainError(std::string(who) + ": s must exceed k/2 + 5/4 + 1/4");
}

std::vector<std::int8_t> mobius_table(std::int64_t limit) {
  std::vector<std::int8_t> mu(static_cast<size_t>(limit) + 1, 1);
  std::vector<bool> composite(static_cast<size_t>(limit) + 1, false);
  if (limit >= 0) mu[0] = 0;
  for (std::int64_t p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    for (std::int64_t j = p; j <= limit; j += p) {
      if (j > p) composite[j] = true;
      mu[j] = static_cast<std::int8_t>(-mu[j]);
    }
    if (p <= limit / p)
      for (std::int64_t j = p * p; j <= limit; j += p * p) mu[j] = 0;
  }
  return mu;
}

// sum_{n > x} n^(-a) <= x^(1-a) / (a - 1)
double power_tail(double x, double a) { return std::pow(x, 1 - a) / (a - 1); }

bool near_nonpositive_integer(double x) { return x < 0.5 && std::abs(x - std::round(x)) < 1e-6; }

template <class Scalar>
void require_off_poles(const char* who, std::initializer_list<Scalar> args) {
  for (const Scalar& a : args)
    if (near_nonpositive_integer(static_cast<double>(a)))
      throw DomainError(std::string(who) + ": within 1e-6 of a Gamma pole at " + to_decimal(a));
}

}  // namespace

AlphaValue alpha(std::int64_t n, const PlusForm& g, Parity k_parity) {
  if (parity_of(g.k()) != k_parity) throw DomainError("alpha: parity does not match the weight");
  const auto dec = try_squarefree_decompose(n, k_parity);
  if (!dec) return {mpq_class(0), false};
  if (dec->d.abs() >= g.prec()) throw TableExhausted("alpha: c(|D|) beyond the stored series", dec->d.abs());
  const int mu = mobius(dec->m);
  if (mu == 0) return {mpq_class(0), true};
  const int chi = dec->d.chi(dec->m);
  if (chi == 0) return {mpq_class(0), true};
  mpz_class mk;
  mpz_ui_pow_ui(mk.get_mpz_t(), static_cast<unsigned long>(dec->m), static_cast<unsigned long>(g.k() - 1));
  mpq_class v = g.exact_coeff(dec->d.abs()) * mk;
  if (mu * chi < 0) v = -v;
  return {v, true};
}

template <class Scalar>
LValue<Scalar> dg_via_coeffs(const PlusForm& g, Scalar s, std::int64_t n_terms) {
  const int k = g.k();
  const double sd = static_cast<double>(s);
  require_region("dg_via_coeffs", k, sd);
  const std::int64_t n_max = std::min<std::int64_t>(n_terms, g.prec() - 1);
  LValue<Scalar> out;
  out.bits = mantissa_bits<Scalar>();
  out.truncation = std::max<std::int64_t>(n_max, 0);
  if (n_max < 1) return out;

  const auto c = g.dense<Scalar>(n_max + 1);
  const auto pw = inverse_power_table<Scalar>(n_max, s);
  std::int64_t root = 1;
  while ((root + 1) * (root + 1) <= n_max) ++root;
  const auto mu = mobius_table(root);
  std::vector<Scalar> mpow(static_cast<size_t>(root) + 1);
  using std::pow;
  for (std::int64_t m = 1; m <= root; ++m) mpow[m] = pow(Scalar(m), k - 1);

  Scalar sum = 0;
  for_each_discriminant(0, n_max, admissible_sign(parity_of(k)), ResidueFilter::all, [&](FundamentalDiscriminant d) {
    const std::int64_t a = d.abs();
    const Scalar& cd = c[a];
    if (cd == 0) return;
    for (std::int64_t m = 1; a * m * m <= n_max; ++m) {
      if (mu[m] == 0) continue;
      const int chi = d.chi(m);
      if (chi == 0) continue;
      const Scalar term = cd * mpow[m] * pw[a * m * m];
      sum += mu[m] * chi > 0 ? term : -term;
    }
  });
  out.value = sum;
  const double sh = sigma_hecke(k);
  out.tail_bound = Scalar(2 * g.hecke_witness() * std::pow(static_cast<double>(n_max), sh - sd) / (sd - sh));
  return out;
}

template <class Scalar>
LValue<Scalar> dg_via_twists(const PlusForm& g, Scalar s, std::int64_t d_max, int bits) {
  const int k = g.k();
  const double sd = static_cast<double>(s);
  const Scalar sigma = 2 * s - k + 1;
  const double sigma_d = static_cast<double>(sigma);
  if (!(sigma_d > 1.25)) throw DomainError("dg_via_twists: 2s - k + 1 must exceed 1.25");
  if (bits < 8 || bits > mantissa_bits<Scalar>()) throw DomainError("dg_via_twists: bits outside the scalar range");
  LValue<Scalar> out;
  out.bits = bits;
  out.truncation = std::max<std::int64_t>(d_max, 0);
  if (d_max < 1) return out;
  if (d_max >= g.prec()) throw TableExhausted("dg_via_twists: c(|D|) beyond the stored series", d_max);

  const auto ds = enumerate_discriminants(0, d_max, admissible_sign(parity_of(k)), ResidueFilter::all);
  const double t_max_d = dirichlet_truncation(std::max<std::int64_t>(d_max, 2), sigma_d, bits);
  const auto t_max = static_cast<std::int64_t>(t_max_d);
  const auto spf = smallest_prime_factors(t_max);
  const auto pw = inverse_power_table<Scalar>(t_max, sigma);
  const auto mu = mobius_table(t_max);

  struct Term {
    Scalar value = 0;
    Scalar error = 0;
    bool degraded = false;
    bool mismatch = false;
  };
  const std::size_t cross_checks = sigma_d > 2 ? 16 : 0;
  const auto terms = parallel_map<Term>(ds.size(), 0, [&](std::size_t i) {
    Term t;
    const FundamentalDiscriminant& d = ds[i];
    const std::int64_t q = d.abs();
    const Scalar c = g.coeff<Scalar>(q);
    if (c == 0) return t;
    const double t_pv = dirichlet_truncation(q, sigma_d, bits);
    const LValue<Scalar> l = t_pv <= t_max_d ? dirichlet_partial<Scalar>(d, pw, spf, static_cast<std::int64_t>(t_pv), sigma_d, bits)
                                             : dirichlet_lvalue<Scalar>(d, sigma, bits);
    using std::abs;
    using std::pow;
    const Scalar scale = c * pow(Scalar(q), -s);
    t.value = scale / l.value;
    const Scalar margin = abs(l.value) - l.tail_bound;
    t.error = margin > 0 ? abs(scale) * l.tail_bound / (abs(l.value) * margin) : Scalar(INFINITY);
    t.degraded = l.degraded;
    if (i < cross_checks) {
      // 1/L(chi, sigma) = sum mu(n) chi(n) n^(-sigma)
      const auto chi = character_table(d.value(), t_max, spf);
      Scalar inv = 0;
      for (std::int64_t n = 1; n <= t_max; ++n)
        if (mu[n] != 0 && chi[n] != 0) inv += mu[n] * chi[n] > 0 ? pw[n] : -pw[n];
      const Scalar allowed = Scalar(power_tail(static_cast<double>(t_max), sigma_d)) +
                             (margin > 0 ? l.tail_bound / (abs(l.value) * margin) : Scalar(INFINITY)) +
                             Scalar(std::ldexp(1.0, 16 - bits));
      t.mismatch = abs(inv - 1 / l.value) > allowed;
    }
    return t;
  }, 64);

  Scalar sum = 0, err = 0;
  for (const Term& t : terms) {
    sum += t.value;
    err += t.error;
    out.degraded = out.degraded || t.degraded || t.mismatch;
  }
  out.value = sum;

  // |D| > d_max: |c| <= 2W |D|^(k/2+1/4) and 1/|L(chi, sigma)| <= zeta(sigma)/zeta(2 sigma)
  const double sh = sigma_hecke(k);
  if (sd > sh) {
    const double zeta_ratio = static_cast<double>(dirichlet_lvalue<double>(FundamentalDiscriminant(1), sigma_d, 53).value) /
                              static_cast<double>(dirichlet_lvalue<double>(FundamentalDiscriminant(1), 2 * sigma_d, 53).value);
    err += Scalar(2 * g.hecke_witness() * zeta_ratio * std::pow(static_cast<double>(d_max), sh - sd) / (sd - sh));
  } else {
    err = Scalar(INFINITY);
    out.degraded = true;
  }
  out.tail_bound = err;
  return out;
}

template <class Scalar>
LValue<Scalar> euler_product_lvalue(const Eigenform& f, Scalar s) {
  const int k = f.k();
  const double sd = static_cast<double>(s);
  if (!(sd > k + 0.5)) throw DomainError("euler_product_lvalue: s must exceed k + 1/2");
  using std::exp;
  using std::log;
  Real128 log_l = 0;
  const Real128 sr = scalar_cast<Real128>(s);
  for (auto p : f.primes()) {
    if (p > f.prec_primes()) break;
    const Real128 x = exp(-sr * log(Real128(p)));
    log_l -= log(1 - f.prime_coeff(p) * x + exp((2 * k - 1) * log(Real128(p))) * x * x);
  }
  LValue<Scalar> out;
  out.bits = mantissa_bits<Scalar>();
  out.truncation = f.prec_primes();
  out.value = scalar_cast<Scalar>(exp(log_l));
  // each omitted factor: |log| <= 2u/(1-u), u = p^(k-1/2-s)
  const double p0 = static_cast<double>(f.prec_primes());
  const double u = std::pow(p0, k - 0.5 - sd);
  const double delta = 2 / (1 - u) * power_tail(p0, sd - k + 0.5);
  out.tail_bound = scalar_cast<Scalar>(abs(scalar_cast<Real128>(out.value)) * Real128(std::expm1(delta)));
  return out;
}

template <class Scalar>
LValue<Scalar> dg_via_quotients(const PlusEigenbasis& basis, std::span<const Real128> lambda, Scalar s) {
  if (lambda.size() != basis.forms.size()) throw DomainError("dg_via_quotients: lambda has the wrong length");
  require_region("dg_via_quotients", basis.k, static_cast<double>(s));
  LValue<Scalar> out;
  out.bits = mantissa_bits<Scalar>();
  using std::abs;
  for (std::size_t nu = 0; nu < lambda.size(); ++nu) {
    const Scalar lam = scalar_cast<Scalar>(lambda[nu]);
    if (lam == 0) continue;
    const auto lg = hecke_lvalue_halfint<Scalar>(basis.forms[nu], s);
    const auto lf = euler_product_lvalue<Scalar>(basis.lifts[nu], 2 * s);
    if (!(abs(lf.value) > lf.tail_bound)) throw PrecisionError("dg_via_quotients: Euler product not separated from 0");
    out.value += lam * lg.value / lf.value;
    const Scalar margin = abs(lf.value) - lf.tail_bound;
    out.tail_bound += abs(lam) * (lg.tail_bound / margin + abs(lg.value) * lf.tail_bound / (abs(lf.value) * margin));
    out.truncation = std::max(out.truncation, lg.truncation);
  }
  return out;
}

std::vector<Real128> eigen_coordinates(const PlusEigenbasis& basis, const PlusForm& g) {
  const std::size_t r = basis.forms.size();
  if (r == 0) return {};
  if (g.k() != basis.k) throw DomainError("eigen_coordinates: weights differ");
  std::vector<ExactSeries::Exponent> rows;
  const int sgn = sign_of(parity_of(g.k()));
  ExactSeries::Exponent limit = g.prec();
  for (const auto& f : basis.forms) limit = std::min(limit, f.prec());
  for (ExactSeries::Exponent n = 1; n < limit && rows.size() < 4 * r + 8; ++n) {
    const std::int64_t m = ((sgn * n) % 4 + 4) % 4;
    if (m == 0 || m == 1) rows.push_back(n);
  }
  if (rows.size() < r) throw PrecisionError("eigen_coordinates: too few coefficients");
  MatrixR a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r));
  VectorR b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < r; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = basis.forms[j].coeff<Real128>(rows[i]);
    b(static_cast<Eigen::Index>(i)) = g.coeff<Real128>(rows[i]);
  }
  const VectorR x = a.colPivHouseholderQr().solve(b);
  Real128 residual = 0, scale = 1;
  const VectorR fit = a * x;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    residual = std::max(residual, Real128(abs(fit(i) - b(i))));
    scale = std::max(scale, Real128(abs(b(i))));
  }
  if (residual > scale * Real128(1e-20)) throw ConstructionError("eigen_coordinates: g is not in the span of the eigenbasis");
  return {x.data(), x.data() + x.size()};
}

template <class Scalar>
GammaForms<Scalar> gamma_factor(Scalar s, int k) {
  const Scalar half = Scalar(1) / 2;
  require_off_poles<Scalar>("gamma_factor", {2 * s, k + half - s, s, 2 * k - 2 * s, s + half, k - s});
  using std::pow;
  const Scalar sign = k % 2 == 0 ? Scalar(1) : Scalar(-1);
  const Scalar pi_pow = pow(pi<Scalar>(), k - half - 2 * s);
  GammaForms<Scalar> out;
  out.form_a = sign * pow(Scalar(2), 2 * k - 4 * s) * pi_pow * gamma_ratio(2 * s, s) * gamma_ratio(k + half - s, 2 * k - 2 * s);
  out.form_b = sign * pi_pow * gamma_ratio(s + half, k - s);
  return out;
}

template <class Scalar>
Scalar rational_R(Scalar s, int k) {
  const int delta = k % 2 == 0 ? 0 : 1;
  const int m = (k - delta) / 2;
  // Gamma(k-s)/Gamma(k-s-m) = prod_{j=1..m} (k-s-j); Gamma(x)/Gamma(x+m) = 1/prod_{j<m} (x+j)
  const Scalar x = s + Scalar(1 + delta - k) / 2;
  Scalar num = k % 2 == 0 ? Scalar(1) : Scalar(-1);
  Scalar den = 1;
  for (int j = 1; j <= m; ++j) num *= Scalar(k - j) - s;
  for (int j = 0; j < m; ++j) {
    const Scalar f = x + j;
    if (std::abs(static_cast<double>(f)) < 1e-6) throw DomainError("rational_R: within 1e-6 of a pole at s = " + to_decimal(s));
    den *= f;
  }
  return num / den;
}

int rational_R_limit(int k) {
  const int delta = k % 2 == 0 ? 0 : 1;
  return (k + (k - delta) / 2) % 2 == 0 ? 1 : -1;
}

W4U4Report w4_u4_check(const PlusForm& g, std::complex<Real128> z, double tolerance) {
  if (!(z.imag() > 0)) throw DomainError("w4_u4_check: Im z must be positive");
  using C = std::complex<Real128>;
  const int k = g.k();
  const Real128 eval_tol = Real128(tolerance) * Real128(1e-3);

  // -1/(4z)
  const Real128 norm = z.real() * z.real() + z.imag() * z.imag();
  const C w(-z.real() / (4 * norm), z.imag() / (4 * norm));
  const auto left = evaluate<Real128>(u4(g), z, eval_tol);
  const auto right = evaluate<Real128>(g, w, eval_tol);

  // principal (-2iz)^(-k-1/2); -2iz = 2 Im z - 2i Re z
  const Real128 re = 2 * z.imag(), im = -2 * z.real();
  const Real128 e = -Real128(k) - Real128(0.5);
  const Real128 mag = pow(sqrt(re * re + im * im), e);
  const Real128 arg = e * atan2(im, re);
  const C factor(mag * cos(arg), mag * sin(arg));

  const int jacobi = kronecker_symbol(2, 2 * k + 1);
  const Real128 constant = Real128(jacobi) * pow(Real128(2), k);
  const C fr = factor * right.value;

  W4U4Report out;
  out.lhs = left.value;
  out.rhs = C(constant * fr.real(), constant * fr.imag());
  const Real128 dr = out.lhs.real() - out.rhs.real(), di = out.lhs.imag() - out.rhs.imag();
  const Real128 diff = sqrt(dr * dr + di * di);
  const Real128 size = std::max(sqrt(out.lhs.real() * out.lhs.real() + out.lhs.imag() * out.lhs.imag()),
                                sqrt(out.rhs.real() * out.rhs.real() + out.rhs.imag() * out.rhs.imag()));
  out.deviation = size > 0 ? static_cast<double>(diff / size) : static_cast<double>(diff);
  out.tail_bound = static_cast<double>(left.tail_bound + abs(constant) * mag * right.tail_bound);
  out.passed = out.deviation < tolerance;
  return out;
}

std::vector<CoefficientIdentityRow> coefficient_identity_check(const PlusEigenbasis& basis,
                                                               const FundamentalDiscriminant& d, std::int64_t p,
                                                               double tolerance) {
  const int k = basis.k;
  if (d.abs() % 4 != 0) throw DomainError("coefficient_identity_check: 4 must divide D");
  if (sign_of(parity_of(k)) * d.value() < 0) throw DomainError("coefficient_identity_check: need (-1)^k D > 0");
  if (p < 3 || !is_prime(p)) throw DomainError("coefficient_identity_check: p must be an odd prime");
  const std::int64_t n = d.abs() * p * p;
  const int chi = d.chi(p);
  std::vector<CoefficientIdentityRow> rows;
  for (std::size_t nu = 0; nu < basis.forms.size(); ++nu) {
    const PlusForm& g = basis.forms[nu];
    const Eigenform& f = basis.lifts[nu];
    if (n >= g.prec()) throw TableExhausted("coefficient_identity_check: |D| p^2 beyond the stored series", n);
    CoefficientIdentityRow row{f.label(), g.is_exact() && f.is_exact(), 0, false};
    if (row.exact) {
      const mpq_class cd = g.exact_coeff(d.abs());
      const mpz_class a = f.exact_prime_coeff(p);
      mpz_class pk;
      mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k - 1));
      const mpq_class lhs = g.exact_coeff(n) - cd * p * a;
      const mpq_class rhs = cd * (a * (1 - p) - chi * pk);
      row.passed = lhs == rhs;
      row.deviation = row.passed ? 0.0 : std::abs(mpq_class(lhs - rhs).get_d());
    } else {
      const Real128 cd = g.coeff<Real128>(d.abs());
      const Real128 a = f.prime_coeff(p);
      const Real128 lhs = g.coeff<Real128>(n) - cd * p * a;
      const Real128 rhs = cd * (a * (1 - p) - chi * pow(Real128(p), k - 1));
      const Real128 scale = std::max({Real128(1), Real128(abs(lhs)), Real128(abs(rhs))});
      row.deviation = static_cast<double>(abs(lhs - rhs) / scale);
      row.passed = row.deviation < tolerance;
    }
    rows.push_back(row);
  }
  return rows;
}

#define MFRES_DSERIES_INSTANTIATE(S)                                                                  \
  template LValue<S> dg_via_coeffs<S>(const PlusForm&, S, std::int64_t);                              \
  template LValue<S> dg_via_twists<S>(const PlusForm&, S, std::int64_t, int);                         \
  template LValue<S> dg_via_quotients<S>(const PlusEigenbasis&, std::span<const Real128>, S);         \
  template LValue<S> euler_product_lvalue<S>(const Eigenform&, S);                                    \
  template GammaForms<S> gamma_factor<S>(S, int);                                                     \
  template S rational_R<S>(S, int);
MFRES_DSERIES_INSTANTIATE(double)
MFRES_DSERIES_INSTANTIATE(Real128)

}  // namespace mfres
