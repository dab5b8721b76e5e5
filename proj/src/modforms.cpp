#include "mfres/modforms.hpp"

#include "mfres/errors.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfres {

using Exponent = ExactSeries::Exponent;

ExactSeries eisenstein(int weight, Exponent prec) {
  if (prec < 1) throw DomainError("eisenstein: precision must be positive");
  long factor;
  unsigned power;
  if (weight == 4) {
    factor = 240;
    power = 3;
  } else if (weight == 6) {
    factor = -504;
    power = 5;
  } else {
    throw DomainError("eisenstein: unsupported weight " + std::to_string(weight));
  }
  auto sigma = divisor_sigma_table(power, prec - 1);
  sigma[0] = 1;
  for (std::size_t n = 1; n < sigma.size(); ++n) sigma[n] *= factor;
  return ExactSeries::from_dense(prec, sigma);
}

ExactSeries delta(Exponent prec) {
  if (prec < 1) throw DomainError("delta: precision must be positive");
  if (prec == 1) return ExactSeries(1);
  // prod (1 - q^n)^3 = sum (-1)^m (2m+1) q^(m(m+1)/2)
  std::vector<ExactSeries::Term> terms;
  for (Exponent m = 0; m * (m + 1) / 2 < prec - 1; ++m)
    terms.push_back({m * (m + 1) / 2, mpz_class(m % 2 == 0 ? 2 * m + 1 : -(2 * m + 1))});
  auto eta3 = ExactSeries::from_terms(prec - 1, std::move(terms));
  auto e6 = mul(eta3, eta3);
  auto e12 = mul(e6, e6);
  return mul(e12, e12).shifted(1);
}

int cusp_form_dimension(int weight) {
  if (weight < 0 || weight % 2 != 0) throw DomainError("cusp_form_dimension: weight must be even and nonnegative");
  if (weight < 12) return 0;
  return weight % 12 == 2 ? weight / 12 - 1 : weight / 12;
}

namespace {

void require_cusp_weight(int weight) {
  if (weight < 12 || weight % 2 != 0)
    throw DomainError("weight must be an even integer >= 12, got " + std::to_string(weight));
}

}  // namespace

std::vector<ExactSeries> victor_miller_basis(int weight, Exponent prec) {
  require_cusp_weight(weight);
  const int dim = cusp_form_dimension(weight);
  if (prec < dim + 1)
    throw DomainError("victor_miller_basis: precision " + std::to_string(prec) + " below dim + 1");
  if (dim == 0) return {};
  static constexpr int ab[6][2] = {{0, 0}, {2, 1}, {1, 0}, {0, 1}, {2, 0}, {1, 1}};
  const int a = ab[(weight % 12) / 2][0];
  const int b = ab[(weight % 12) / 2][1];
  const int d = (weight - 4 * a - 6 * b) / 12;
  if (d != dim) throw ConstructionError("victor_miller_basis: monomial count disagrees with dimension");

  const auto e4 = eisenstein(4, prec);
  const auto e6 = eisenstein(6, prec);
  const auto dl = delta(prec);
  auto tail = ExactSeries::one(prec);
  if (a > 0) tail = pow(e4, static_cast<unsigned>(a));
  if (b > 0) tail = mul(tail, e6);
  const auto e6sq = mul(e6, e6);

  // g_j = Delta^j E6^(2(d-j)) E4^a E6^b, built from j = d downward
  std::vector<ExactSeries> g(static_cast<size_t>(d));
  std::vector<ExactSeries> delta_pow(static_cast<size_t>(d) + 1);
  delta_pow[0] = ExactSeries::one(prec);
  for (int j = 1; j <= d; ++j) delta_pow[j] = mul(delta_pow[j - 1], dl);
  auto e6_pow = ExactSeries::one(prec);
  for (int j = d; j >= 1; --j) {
    g[j - 1] = mul(mul(delta_pow[j], e6_pow), tail);
    if (j > 1) e6_pow = mul(e6_pow, e6sq);
  }
  // back substitution: clear coefficient j of every other form
  for (int j = d; j >= 1; --j) {
    for (int i = 1; i <= d; ++i) {
      if (i == j) continue;
      const mpq_class c = g[i - 1].coeff(j);
      if (sgn(c) != 0) g[i - 1] -= g[j - 1].scaled(c);
    }
  }
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j)
      if (g[i - 1].coeff(j) != (i == j ? 1 : 0))
        throw ConstructionError("victor_miller_basis: echelon form not reached");
  return g;
}

std::vector<std::vector<mpz_class>> hecke_t2_matrix(int weight, std::span<const ExactSeries> basis) {
  const auto d = basis.size();
  std::vector<std::vector<mpz_class>> m(d, std::vector<mpz_class>(d));
  mpz_class p2k1;
  mpz_ui_pow_ui(p2k1.get_mpz_t(), 2, static_cast<unsigned long>(weight - 1));
  for (size_t i = 0; i < d; ++i) {
    if (basis[i].prec() <= static_cast<Exponent>(2 * d))
      throw DomainError("hecke_t2_matrix: basis precision must exceed 2 dim");
    for (size_t j = 1; j <= d; ++j) {
      mpq_class v = basis[i].coeff(static_cast<Exponent>(2 * j));
      if (j % 2 == 0) v += p2k1 * basis[i].coeff(static_cast<Exponent>(j / 2));
      if (v.get_den() != 1) throw ConstructionError("hecke_t2_matrix: non-integral basis");
      m[j - 1][i] = v.get_num();
    }
  }
  return m;
}

std::vector<mpq_class> characteristic_polynomial(const std::vector<std::vector<mpz_class>>& a) {
  // Faddeev-LeVerrier over Q
  const size_t n = a.size();
  std::vector<mpq_class> c(n + 1);
  c[n] = 1;
  std::vector<std::vector<mpq_class>> mk(n, std::vector<mpq_class>(n, 0));
  std::vector<std::vector<mpq_class>> amk(n, std::vector<mpq_class>(n, 0));
  for (size_t k = 1; k <= n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        mpq_class s = 0;
        for (size_t l = 0; l < n; ++l) s += a[i][l] * mk[l][j];
        amk[i][j] = s;
      }
    }
    // M_k = A M_(k-1) + c_(n-k+1) I
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) mk[i][j] = amk[i][j];
      mk[i][i] += c[n - k + 1];
    }
    mpq_class tr = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t l = 0; l < n; ++l) tr += a[i][l] * mk[l][i];
    c[n - k] = -tr / static_cast<long>(k);
  }
  return c;
}

Eigenform::Eigenform(int weight, int label, std::int64_t prec_primes, std::vector<std::int64_t> primes,
                     std::vector<mpz_class> a_p)
    : weight_(weight),
      label_(label),
      exact_flag_(true),
      prec_primes_(prec_primes),
      primes_(std::move(primes)),
      exact_(std::move(a_p)),
      coords_{Real128(1)} {
  if (exact_.size() != primes_.size()) throw DomainError("Eigenform: table size mismatch");
  numeric_.reserve(exact_.size());
  for (const auto& a : exact_) numeric_.push_back(to_scalar<Real128>(a));
}

Eigenform::Eigenform(int weight, int label, std::int64_t prec_primes, std::vector<std::int64_t> primes,
                     std::vector<Real128> a_p, std::vector<Real128> basis_coords)
    : weight_(weight),
      label_(label),
      exact_flag_(false),
      prec_primes_(prec_primes),
      primes_(std::move(primes)),
      numeric_(std::move(a_p)),
      coords_(std::move(basis_coords)) {
  if (numeric_.size() != primes_.size()) throw DomainError("Eigenform: table size mismatch");
}

std::size_t Eigenform::index_of(std::int64_t p) const {
  if (p > prec_primes_)
    throw TableExhausted("prime " + std::to_string(p) + " beyond eigenform table of weight " +
                             std::to_string(weight_),
                         p);
  auto it = std::lower_bound(primes_.begin(), primes_.end(), p);
  if (it == primes_.end() || *it != p) throw DomainError(std::to_string(p) + " is not prime");
  return static_cast<std::size_t>(it - primes_.begin());
}

const mpz_class& Eigenform::exact_prime_coeff(std::int64_t p) const {
  if (!exact_flag_) throw DomainError("exact coefficients unavailable for a numeric eigenform");
  return exact_[index_of(p)];
}

const Real128& Eigenform::prime_coeff(std::int64_t p) const { return numeric_[index_of(p)]; }

namespace {

std::vector<std::int64_t> primes_upto(std::int64_t limit) {
  PrimeTable table(limit);
  return {table.primes().begin(), table.primes().end()};
}

void check_deligne_exact(int weight, std::int64_t p, const mpz_class& a) {
  mpz_class bound;
  mpz_ui_pow_ui(bound.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(weight - 1));
  bound *= 4;
  if (a * a > bound)
    throw ConstructionError("Deligne bound violated at p = " + std::to_string(p));
}

using MatrixR = Eigen::Matrix<Real128, Eigen::Dynamic, Eigen::Dynamic>;
using VectorR = Eigen::Matrix<Real128, Eigen::Dynamic, 1>;

Real128 newton_root(const std::vector<Real128>& poly, Real128 x) {
  const Real128 eps = std::numeric_limits<Real128>::epsilon() * 4;
  for (int it = 0; it < 100; ++it) {
    Real128 v = 0, dv = 0;
    for (size_t i = poly.size(); i-- > 0;) {
      dv = dv * x + v;
      v = v * x + poly[i];
    }
    if (dv == 0) throw PrecisionError("hecke_eigenforms: repeated T(2) eigenvalue");
    const Real128 step = v / dv;
    x -= step;
    if (abs(step) <= eps * (1 + abs(x))) return x;
  }
  throw PrecisionError("hecke_eigenforms: Newton refinement of a T(2) eigenvalue did not converge");
}

}  // namespace

std::vector<Eigenform> hecke_eigenforms(int weight, std::int64_t prec_primes) {
  require_cusp_weight(weight);
  const int dim = cusp_form_dimension(weight);
  const Exponent prec = std::max<Exponent>(prec_primes + 1, 2 * dim + 1);
  const auto basis = victor_miller_basis(weight, prec);
  return hecke_eigenforms(weight, prec_primes, basis);
}

std::vector<Eigenform> hecke_eigenforms(int weight, std::int64_t prec_primes,
                                        std::span<const ExactSeries> basis) {
  require_cusp_weight(weight);
  if (prec_primes < 2) throw DomainError("hecke_eigenforms: prec_primes must be at least 2");
  const auto dim = static_cast<size_t>(cusp_form_dimension(weight));
  if (basis.size() != dim) throw DomainError("hecke_eigenforms: basis size differs from dim S");
  for (const auto& b : basis)
    if (b.prec() <= prec_primes) throw DomainError("hecke_eigenforms: basis precision below prec_primes + 1");
  auto primes = primes_upto(prec_primes);
  std::vector<Eigenform> out;

  if (dim == 1) {
    std::vector<mpz_class> a_p;
    a_p.reserve(primes.size());
    for (auto p : primes) {
      a_p.push_back(basis[0].numerator_at(p));
      if (basis[0].denominator() != 1) throw ConstructionError("hecke_eigenforms: non-integral cusp form");
      check_deligne_exact(weight, p, a_p.back());
    }
    out.emplace_back(weight, 1, prec_primes, std::move(primes), std::move(a_p));
    return out;
  }

  const auto t2 = hecke_t2_matrix(weight, basis);
  const auto charpoly = characteristic_polynomial(t2);
  std::vector<Real128> poly;
  for (const auto& c : charpoly) poly.push_back(to_scalar<Real128>(c));

  Eigen::MatrixXd approx(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (size_t i = 0; i < dim; ++i)
    for (size_t j = 0; j < dim; ++j) approx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t2[i][j].get_d();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(approx, false);
  std::vector<Real128> mu;
  double scale = 1;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) scale = std::max(scale, std::abs(solver.eigenvalues()[i]));
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const auto z = solver.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * scale) throw PrecisionError("hecke_eigenforms: complex T(2) eigenvalue estimate");
    mu.push_back(newton_root(poly, Real128(z.real())));
  }
  std::sort(mu.begin(), mu.end());
  for (size_t i = 1; i < mu.size(); ++i)
    if (mu[i] - mu[i - 1] < Real128(1e-12) * Real128(scale))
      throw PrecisionError("hecke_eigenforms: T(2) eigenvalues not separated; raise working precision");

  const Eigen::Index r = static_cast<Eigen::Index>(dim);
  for (size_t v = 0; v < dim; ++v) {
    MatrixR a(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) a(i, j) = to_scalar<Real128>(t2[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    for (Eigen::Index i = 0; i < r; ++i) a(i, i) -= mu[v];
    // x_1 = 1, remaining rows solve for the rest
    const MatrixR sub = a.bottomRightCorner(r - 1, r - 1);
    const VectorR rhs = -a.bottomLeftCorner(r - 1, 1);
    const VectorR rest = sub.fullPivLu().solve(rhs);
    std::vector<Real128> x(dim);
    x[0] = 1;
    for (Eigen::Index i = 0; i + 1 < r; ++i) x[static_cast<size_t>(i) + 1] = rest(i);

    std::vector<Real128> a_p;
    a_p.reserve(primes.size());
    for (auto p : primes) {
      Real128 s = 0;
      for (size_t i = 0; i < dim; ++i) s += x[i] * to_scalar<Real128>(basis[i].coeff(p));
      using std::pow;
      const Real128 bound = 2 * pow(Real128(p), Real128(weight - 1) / 2);
      if (abs(s) > bound * (1 + Real128(1e-20)))
        throw ConstructionError("Deligne bound violated at p = " + std::to_string(p));
      a_p.push_back(s);
    }
    out.emplace_back(weight, static_cast<int>(v) + 1, prec_primes, primes, std::move(a_p), std::move(x));
  }
  return out;
}

namespace {

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
  std::vector<std::pair<std::int64_t, int>> f;
  for (std::int64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.emplace_back(p, e);
  }
  if (n > 1) f.emplace_back(n, 1);
  return f;
}

}  // namespace

mpz_class exact_coeff_at(const Eigenform& f, std::int64_t n) {
  if (n < 1) throw DomainError("coeff_at: n must be positive");
  mpz_class result = 1;
  for (auto [p, e] : factorize(n)) {
    const mpz_class& ap = f.exact_prime_coeff(p);
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(f.weight() - 1));
    mpz_class prev = 1, cur = ap;
    for (int j = 1; j < e; ++j) {
      mpz_class next = ap * cur - pw * prev;
      prev = std::move(cur);
      cur = std::move(next);
    }
    result *= cur;
  }
  return result;
}

template <class Scalar>
Scalar coeff_at(const Eigenform& f, std::int64_t n) {
  if (n < 1) throw DomainError("coeff_at: n must be positive");
  if (f.is_exact()) return to_scalar<Scalar>(exact_coeff_at(f, n));
  Scalar result = 1;
  for (auto [p, e] : factorize(n)) {
    const Scalar ap = scalar_cast<Scalar>(f.prime_coeff(p));
    using std::pow;
    const Scalar pw = pow(Scalar(p), Scalar(f.weight() - 1));
    Scalar prev = 1, cur = ap;
    for (int j = 1; j < e; ++j) {
      Scalar next = ap * cur - pw * prev;
      prev = cur;
      cur = next;
    }
    result *= cur;
  }
  return result;
}

template <class Scalar>
NormalizedCoeffTable<Scalar>::NormalizedCoeffTable(const Eigenform& f, std::int64_t limit)
    : weight_(f.weight()) {
  if (limit < 1) throw DomainError("NormalizedCoeffTable: limit must be positive");
  if (limit > f.prec_primes())
    throw TableExhausted("normalized coefficient table to " + std::to_string(limit), limit);
  const auto spf = smallest_prime_factors(limit);
  lambda_.assign(static_cast<size_t>(limit) + 1, Scalar(0));
  lambda_[1] = 1;
  const unsigned k = static_cast<unsigned>(f.k());
  for (std::int64_t n = 2; n <= limit; ++n) {
    const std::int64_t p = spf[static_cast<size_t>(n)];
    if (p == n) {
      using std::sqrt;
      if (f.is_exact()) {
        mpz_class pk;
        mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), k);
        lambda_[n] = to_scalar<Scalar>(mpq_class(f.exact_prime_coeff(p), pk)) * sqrt(Scalar(p));
      } else {
        mpz_class pk;
        mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), k);
        lambda_[n] = scalar_cast<Scalar>(f.prime_coeff(p) / to_scalar<Real128>(pk) * sqrt(Real128(p)));
      }
      continue;
    }
    std::int64_t q = n, pe = 1;
    while (q % p == 0) {
      q /= p;
      pe *= p;
    }
    if (q == 1) {
      // lambda(p^e) = lambda(p) lambda(p^(e-1)) - lambda(p^(e-2))
      lambda_[n] = lambda_[p] * lambda_[n / p] - lambda_[n / p / p];
    } else {
      lambda_[n] = lambda_[pe] * lambda_[q];
    }
  }
}

template class NormalizedCoeffTable<double>;
template class NormalizedCoeffTable<Real128>;
template double coeff_at<double>(const Eigenform&, std::int64_t);
template Real128 coeff_at<Real128>(const Eigenform&, std::int64_t);

}  // namespace mfres
