#include "mfres/halfint.hpp"

#include "mfres/errors.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>

namespace mfres {

using Exponent = ExactSeries::Exponent;

ExactSeries theta_series(Exponent prec) {
  if (prec < 1) throw DomainError("theta_series: precision must be positive");
  std::vector<ExactSeries::Term> terms{{0, mpz_class(1)}};
  for (Exponent m = 1; m * m < prec; ++m) terms.push_back({m * m, mpz_class(2)});
  return ExactSeries::from_terms(prec, std::move(terms));
}

ExactSeries weight_two_F(Exponent prec) {
  if (prec < 1) throw DomainError("weight_two_F: precision must be positive");
  auto sigma = divisor_sigma_table(1, prec - 1);
  for (std::size_t n = 0; n < sigma.size(); n += 2) sigma[n] = 0;
  return ExactSeries::from_dense(prec, sigma);
}

std::vector<ExactSeries> half_integral_spanning_set(int k, Exponent prec) {
  if (k < 1) throw DomainError("half_integral_spanning_set: k must be positive");
  const int top = (2 * k + 1) / 4;
  const auto theta = theta_series(prec);
  const auto f = weight_two_F(prec);
  const auto theta4 = pow(theta, 4);
  std::vector<ExactSeries> f_pow{ExactSeries::one(prec)};
  for (int j = 1; j <= top; ++j) f_pow.push_back(mul(f_pow.back(), f));
  std::vector<ExactSeries> out(static_cast<size_t>(top) + 1);
  auto t = pow(theta, static_cast<unsigned>(2 * k + 1 - 4 * top));
  for (int j = top; j >= 0; --j) {
    out[static_cast<size_t>(j)] = j == 0 ? t : mul(t, f_pow[static_cast<size_t>(j)]);
    if (j > 0) t = mul(t, theta4);
  }
  return out;
}

PlusForm::PlusForm(int k, ExactSeries series)
    : k_(k), prec_(series.prec()), exact_(true), series_(std::move(series)) {
  if (k < 1) throw DomainError("PlusForm: k must be positive");
  compute_witness();
}

PlusForm::PlusForm(int k, Exponent prec, std::vector<Real128> values)
    : k_(k), prec_(prec), exact_(false), values_(std::move(values)) {
  if (k < 1) throw DomainError("PlusForm: k must be positive");
  if (static_cast<Exponent>(values_.size()) != prec) throw DomainError("PlusForm: value count differs from precision");
  compute_witness();
}

void PlusForm::compute_witness() {
  const double a = k_ / 2.0 + 0.25;
  witness_ = 0;
  if (exact_) {
    const double den = series_.denominator().get_d();
    for (const auto& t : series_.terms()) {
      if (t.exponent == 0) continue;
      const double c = std::abs(t.numerator.get_d()) / den;
      witness_ = std::max(witness_, c / std::pow(static_cast<double>(t.exponent), a));
    }
  } else {
    for (size_t n = 1; n < values_.size(); ++n) {
      const double c = std::abs(static_cast<double>(values_[n]));
      witness_ = std::max(witness_, c / std::pow(static_cast<double>(n), a));
    }
  }
}

const ExactSeries& PlusForm::series() const {
  if (!exact_) throw DomainError("PlusForm: numeric form has no exact series");
  return series_;
}

mpq_class PlusForm::exact_coeff(Exponent n) const { return series().coeff(n); }

template <class Scalar>
Scalar PlusForm::coeff(Exponent n) const {
  if (n < 0 || n >= prec_) throw DomainError("PlusForm: coefficient " + std::to_string(n) + " beyond precision");
  if (exact_) return to_scalar<Scalar>(series_.coeff(n));
  return scalar_cast<Scalar>(values_[static_cast<size_t>(n)]);
}

template <class Scalar>
std::vector<Scalar> PlusForm::dense(Exponent upto) const {
  upto = std::clamp<Exponent>(upto, 0, prec_);
  std::vector<Scalar> out(static_cast<size_t>(upto), Scalar(0));
  if (exact_) {
    const Scalar den = to_scalar<Scalar>(series_.denominator());
    for (const auto& t : series_.terms()) {
      if (t.exponent >= upto) break;
      out[static_cast<size_t>(t.exponent)] = to_scalar<Scalar>(t.numerator) / den;
    }
  } else {
    for (Exponent n = 0; n < upto; ++n) out[static_cast<size_t>(n)] = scalar_cast<Scalar>(values_[static_cast<size_t>(n)]);
  }
  return out;
}

PlusForm PlusForm::scaled(const mpq_class& c) const {
  if (exact_) {
    PlusForm g(k_, series_.scaled(c));
    g.lambda = lambda;
    return g;
  }
  auto v = values_;
  const Real128 s = to_scalar<Real128>(c);
  for (auto& x : v) x *= s;
  PlusForm g(k_, prec_, std::move(v));
  g.lambda = lambda;
  return g;
}

namespace {

bool forbidden_residue(int k, Exponent n) {
  const Exponent r = ((k % 2 == 0 ? n : -n) % 4 + 4) % 4;
  return r == 2 || r == 3;
}

}  // namespace

std::optional<Exponent> plus_condition_violation(const PlusForm& g) {
  if (g.is_exact()) {
    for (const auto& t : g.series().terms())
      if (t.exponent == 0 || forbidden_residue(g.k(), t.exponent)) return t.exponent;
    return std::nullopt;
  }
  for (Exponent n = 0; n < g.prec(); ++n)
    if ((n == 0 || forbidden_residue(g.k(), n)) && g.coeff<Real128>(n) != 0) return n;
  return std::nullopt;
}

namespace {

struct Solved {
  Exponent cutoff;
  std::vector<std::vector<mpq_class>> coords;
  std::vector<Exponent> pivots;
};

std::optional<Solved> solve_plus_conditions(int k, Exponent cutoff, std::size_t dim) {
  const auto rows = half_integral_spanning_set(k, cutoff + 1);
  std::vector<SeriesConstraint> constraints;
  constraints.push_back({0, 0});
  for (Exponent n = 1; n <= cutoff; ++n)
    if (forbidden_residue(k, n)) constraints.push_back({n, 0});
  auto sol = linear_solve(rows, constraints);
  if (!sol.consistent || sol.basis.size() != dim) return std::nullopt;
  return Solved{cutoff, std::move(sol.kernel_coords), std::move(sol.pivots)};
}

}  // namespace

PlusSpace plus_space_basis(int k, Exponent prec) {
  if (k < 1) throw DomainError("plus_space_basis: k must be positive");
  const Exponent cutoff = 20 * (k + 2);
  if (prec < cutoff)
    throw DomainError("plus_space_basis: precision " + std::to_string(prec) + " below 20(k+2) = " +
                      std::to_string(cutoff));
  const auto dim = static_cast<std::size_t>(cusp_form_dimension(2 * k));
  auto solved = solve_plus_conditions(k, cutoff, dim);
  if (!solved) solved = solve_plus_conditions(k, 2 * cutoff, dim);
  if (!solved)
    throw ConstructionError("plus_space_basis: solution dimension differs from dim S_" + std::to_string(2 * k) +
                            " = " + std::to_string(dim) + " at cutoffs " + std::to_string(cutoff) + " and " +
                            std::to_string(2 * cutoff));

  const Exponent work = std::max(prec, solved->cutoff + 1);
  const auto rows = half_integral_spanning_set(k, work);
  PlusSpace space{k, prec, solved->cutoff, {}, solved->pivots};
  for (const auto& c : solved->coords) {
    auto s = combine(rows, c).truncated(prec);
    for (const auto& t : s.terms())
      if (t.exponent == 0 || forbidden_residue(k, t.exponent))
        throw ConstructionError("plus_space_basis: plus condition fails at n = " + std::to_string(t.exponent));
    space.basis.push_back(std::move(s));
  }
  return space;
}

template <class Scalar>
Scalar shimura_multiplier(const Eigenform& f, const FundamentalDiscriminant& d, std::int64_t n) {
  Scalar sum = 0;
  const int k = f.k();
  for (auto e : divisors(n)) {
    const int mu = mobius(e);
    if (mu == 0) continue;
    const int chi = d.chi(e);
    if (chi == 0) continue;
    using std::pow;
    sum += Scalar(mu * chi) * pow(Scalar(e), Scalar(k - 1)) * coeff_at<Scalar>(f, n / e);
  }
  return sum;
}

mpz_class exact_shimura_multiplier(const Eigenform& f, const FundamentalDiscriminant& d, std::int64_t n) {
  mpz_class sum = 0;
  for (auto e : divisors(n)) {
    const int mu = mobius(e);
    if (mu == 0) continue;
    const int chi = d.chi(e);
    if (chi == 0) continue;
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(e), static_cast<unsigned long>(f.k() - 1));
    sum += mu * chi * pw * exact_coeff_at(f, n / e);
  }
  return sum;
}

ShimuraReport shimura_check(const PlusForm& g, const Eigenform& f, const FundamentalDiscriminant& d,
                            std::int64_t n_max, double tolerance) {
  if (f.weight() != 2 * g.k()) throw DomainError("shimura_check: lift weight differs from 2k");
  if ((g.k() % 2 == 0) != (d.value() > 0)) throw DomainError("shimura_check: (-1)^k D must be positive");
  if (n_max < 1) throw DomainError("shimura_check: n_max must be positive");
  if (static_cast<Exponent>(n_max) * n_max * d.abs() >= g.prec())
    throw DomainError("shimura_check: n_max^2 |D| must be below the form precision");
  ShimuraReport report{d.value(), n_max};
  report.exact = g.is_exact() && f.is_exact();
  report.passed = true;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const Exponent idx = static_cast<Exponent>(n) * n * d.abs();
    if (report.exact) {
      const mpq_class lhs = g.exact_coeff(idx);
      const mpq_class rhs = g.exact_coeff(d.abs()) * exact_shimura_multiplier(f, d, n);
      if (lhs != rhs) {
        report.passed = false;
        report.max_deviation = std::max(report.max_deviation, std::abs(mpq_class(lhs - rhs).get_d()));
      }
    } else {
      const Real128 lhs = g.coeff<Real128>(idx);
      const Real128 rhs = g.coeff<Real128>(d.abs()) * shimura_multiplier<Real128>(f, d, n);
      const Real128 scale = std::max({Real128(1e-300), abs(lhs), abs(rhs)});
      const double dev = static_cast<double>(abs(lhs - rhs) / scale);
      report.max_deviation = std::max(report.max_deviation, dev);
      if (!(dev <= tolerance)) report.passed = false;
    }
    ++report.checked;
  }
  return report;
}

namespace {

using MatrixR = Eigen::Matrix<Real128, Eigen::Dynamic, Eigen::Dynamic>;

PlusForm normalize_first(int k, Exponent prec, std::vector<Real128> values) {
  Real128 peak = 0;
  for (const auto& v : values) peak = std::max(peak, abs(v));
  for (const auto& v : values) {
    if (abs(v) > peak * Real128(1e-30)) {
      const Real128 lead = v;
      for (auto& x : values) x /= lead;
      return PlusForm(k, prec, std::move(values));
    }
  }
  throw ConstructionError("plus_eigenbasis: eigenform vanishes identically");
}

void validate_pairing(const PlusForm& g, const Eigenform& f) {
  const auto discs = first_admissible_discriminants(parity_of(g.k()), 10);
  std::size_t tested = 0;
  for (const auto& d : discs) {
    const std::int64_t n_max = std::min<std::int64_t>(
        3, static_cast<std::int64_t>(std::sqrt(static_cast<double>(g.prec() - 1) / static_cast<double>(d.abs()))));
    if (n_max < 2 || g.coeff<Real128>(d.abs()) == 0) continue;
    if (f.prec_primes() < n_max) throw TableExhausted("plus_eigenbasis pairing check", n_max);
    const auto rep = shimura_check(g, f, d, n_max, 1e-20);
    if (!rep.passed)
      throw ConstructionError("plus_eigenbasis: Shimura identity fails for weight " + std::to_string(f.weight()) +
                              " eigenform " + std::to_string(f.label()) + " at D = " + std::to_string(d.value()));
    if (++tested >= 2) return;
  }
  if (tested == 0) throw ConstructionError("plus_eigenbasis: no discriminant available to validate the pairing");
}

}  // namespace

PlusEigenbasis plus_eigenbasis(const PlusSpace& space, std::span<const Eigenform> eigenforms) {
  const int k = space.k;
  const std::size_t r = space.basis.size();
  if (eigenforms.size() != r) throw DomainError("plus_eigenbasis: eigenform count differs from plus-space dimension");
  for (const auto& f : eigenforms)
    if (f.weight() != 2 * k) throw DomainError("plus_eigenbasis: eigenform weight differs from 2k");
  PlusEigenbasis out{k, {}, {eigenforms.begin(), eigenforms.end()}};
  if (r == 0) return out;

  if (r == 1) {
    const auto& s = space.basis[0];
    const mpq_class lead = s.coeff(s.valuation());
    PlusForm g(k, s.scaled(1 / lead));
    validate_pairing(g, eigenforms[0]);
    g.lambda = std::vector<Real128>{1};
    out.forms.push_back(std::move(g));
    return out;
  }

  std::vector<std::vector<Real128>> dense;
  for (const auto& s : space.basis) dense.push_back(PlusForm(k, s).dense<Real128>(space.prec));
  const auto discs = first_admissible_discriminants(parity_of(k), 12);
  const Eigen::Index cols = static_cast<Eigen::Index>(r);
  for (std::size_t nu = 0; nu < r; ++nu) {
    const auto& f = eigenforms[nu];
    std::vector<std::vector<Real128>> rows;
    for (const auto& d : discs) {
      for (std::int64_t n : {2, 3, 5}) {
        const Exponent idx = static_cast<Exponent>(n) * n * d.abs();
        if (idx >= space.prec || n > f.prec_primes()) continue;
        const Real128 mult = shimura_multiplier<Real128>(f, d, n);
        std::vector<Real128> row(r);
        Real128 norm = 0;
        for (std::size_t i = 0; i < r; ++i) {
          row[i] = dense[i][static_cast<size_t>(idx)] - dense[i][static_cast<size_t>(d.abs())] * mult;
          norm += row[i] * row[i];
        }
        if (norm == 0) continue;
        norm = sqrt(norm);
        for (auto& x : row) x /= norm;
        rows.push_back(std::move(row));
      }
    }
    if (rows.size() < r) throw ConstructionError("plus_eigenbasis: too few Shimura constraints; raise precision");
    MatrixR a(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < r; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    Eigen::JacobiSVD<MatrixR> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(cols - 1) > sv(0) * Real128(1e-25))
      throw ConstructionError("plus_eigenbasis: no null vector for eigenform " + std::to_string(f.label()));
    if (cols >= 2 && sv(cols - 2) < sv(0) * Real128(1e-10))
      throw PrecisionError("plus_eigenbasis: null space is not one-dimensional");
    std::vector<Real128> values(static_cast<size_t>(space.prec), Real128(0));
    for (std::size_t i = 0; i < r; ++i) {
      const Real128 y = svd.matrixV()(static_cast<Eigen::Index>(i), cols - 1);
      for (std::size_t n = 0; n < values.size(); ++n) values[n] += y * dense[i][n];
    }
    auto g = normalize_first(k, space.prec, std::move(values));
    validate_pairing(g, f);
    std::vector<Real128> lam(r, Real128(0));
    lam[nu] = 1;
    g.lambda = std::move(lam);
    out.forms.push_back(std::move(g));
  }
  return out;
}

PlusForm u4(const PlusForm& g) {
  if (g.is_exact()) return PlusForm(g.k(), g.series().picked(4));
  const Exponent prec = (g.prec() + 3) / 4;
  std::vector<Real128> v(static_cast<size_t>(prec));
  for (Exponent n = 0; n < prec; ++n) v[static_cast<size_t>(n)] = g.coeff<Real128>(4 * n);
  return PlusForm(g.k(), prec, std::move(v));
}

template <class Scalar>
Evaluation<Scalar> evaluate(const PlusForm& g, std::complex<Scalar> z, Scalar tolerance) {
  using std::cos;
  using std::exp;
  using std::floor;
  using std::sin;
  const Scalar y = z.imag();
  if (!(y > 0)) throw DomainError("evaluate: Im z must be positive");
  const Scalar x = z.real() - floor(z.real());
  const Scalar two_pi = 2 * pi<Scalar>();
  const Scalar r = exp(-two_pi * y);
  const std::complex<Scalar> q(r * cos(two_pi * x), r * sin(two_pi * x));

  // tail from n = m on: C m^a r^m / (1 - (1 + 1/m)^a r), C = 2 witness
  const double a = g.k() / 2.0 + 0.25;
  const double log_r = -2 * 3.14159265358979323846 * static_cast<double>(y);
  const double c = 2 * g.hecke_witness();
  auto tail = [&](Exponent m) -> double {
    if (c == 0) return 0;
    const double md = static_cast<double>(m);
    const double rho = std::exp(a * std::log1p(1 / md) + log_r);
    if (rho >= 1) return std::numeric_limits<double>::infinity();
    return c * std::exp(a * std::log(md) + md * log_r) / (1 - rho);
  };
  const double target = static_cast<double>(tolerance) * 1e-3;
  Exponent m = 1;
  while (m < g.prec() && tail(m) > target) m = std::min(g.prec(), m + 1 + m / 8);
  const double bound = tail(std::max<Exponent>(m, 1));
  if (!(bound <= static_cast<double>(tolerance)))
    throw PrecisionError("evaluate: tail bound " + std::to_string(bound) + " exceeds tolerance at precision " +
                         std::to_string(g.prec()));
  std::complex<Scalar> sum(0), qn(1);
  const auto coeffs = g.dense<Scalar>(m);
  for (Exponent n = 0; n < m; ++n) {
    if (coeffs[static_cast<size_t>(n)] != 0) sum += coeffs[static_cast<size_t>(n)] * qn;
    qn *= q;
  }
  return {sum, Scalar(bound), m};
}

template double PlusForm::coeff<double>(Exponent) const;
template Real128 PlusForm::coeff<Real128>(Exponent) const;
template std::vector<double> PlusForm::dense<double>(Exponent) const;
template std::vector<Real128> PlusForm::dense<Real128>(Exponent) const;
template double shimura_multiplier<double>(const Eigenform&, const FundamentalDiscriminant&, std::int64_t);
template Real128 shimura_multiplier<Real128>(const Eigenform&, const FundamentalDiscriminant&, std::int64_t);
template Evaluation<double> evaluate<double>(const PlusForm&, std::complex<double>, double);
template Evaluation<Real128> evaluate<Real128>(const PlusForm&, std::complex<Real128>, Real128);

}  // namespace mfres
