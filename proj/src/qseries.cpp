#include "mfres/qseries.hpp"

#include "mfres/errors.hpp"
#include "mfres/ntt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mfres {

namespace {

std::size_t bit_length(const mpz_class& x) {
  return sgn(x) == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

std::size_t bit_length(std::uint64_t x) { return static_cast<std::size_t>(std::bit_width(x)); }

}  // namespace

ExactSeries::ExactSeries(Exponent prec) : prec_(prec) {
  if (prec < 0) throw DomainError("ExactSeries: negative precision");
}

ExactSeries ExactSeries::one(Exponent prec) { return monomial(0, 1, prec); }

ExactSeries ExactSeries::monomial(Exponent exponent, const mpq_class& coeff, Exponent prec) {
  ExactSeries s(prec);
  if (exponent < prec && sgn(coeff) != 0) {
    s.terms_.push_back({exponent, coeff.get_num()});
    s.den_ = coeff.get_den();
  }
  return s;
}

ExactSeries ExactSeries::from_terms(Exponent prec, std::vector<Term> terms, mpz_class denominator) {
  ExactSeries s(prec);
  std::erase_if(terms, [&](const Term& t) { return t.exponent >= prec || sgn(t.numerator) == 0; });
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.exponent < b.exponent; });
  // merge duplicate exponents
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (auto& t : terms) {
    if (t.exponent < 0) throw DomainError("ExactSeries: negative exponent");
    if (!merged.empty() && merged.back().exponent == t.exponent) {
      merged.back().numerator += t.numerator;
    } else {
      merged.push_back(std::move(t));
    }
  }
  s.terms_ = std::move(merged);
  s.den_ = std::move(denominator);
  s.normalize();
  return s;
}

ExactSeries ExactSeries::from_dense(Exponent prec, std::span<const mpz_class> numerators,
                                    mpz_class denominator) {
  ExactSeries s(prec);
  const Exponent upto = std::min<Exponent>(prec, static_cast<Exponent>(numerators.size()));
  for (Exponent i = 0; i < upto; ++i)
    if (sgn(numerators[i]) != 0) s.terms_.push_back({i, numerators[i]});
  s.den_ = std::move(denominator);
  s.normalize();
  return s;
}

void ExactSeries::normalize() {
  if (sgn(den_) == 0) throw DomainError("ExactSeries: zero denominator");
  std::erase_if(terms_, [](const Term& t) { return sgn(t.numerator) == 0; });
  if (sgn(den_) < 0) {
    den_ = -den_;
    for (auto& t : terms_) t.numerator = -t.numerator;
  }
  if (terms_.empty()) {
    den_ = 1;
    return;
  }
  if (den_ == 1) return;
  mpz_class g = den_;
  for (const auto& t : terms_) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.numerator.get_mpz_t());
    if (g == 1) return;
  }
  den_ /= g;
  for (auto& t : terms_) mpz_divexact(t.numerator.get_mpz_t(), t.numerator.get_mpz_t(), g.get_mpz_t());
}

mpz_class ExactSeries::numerator_at(Exponent n) const {
  if (n < 0 || n >= prec_) throw DomainError("ExactSeries: exponent " + std::to_string(n) +
                                             " outside precision " + std::to_string(prec_));
  auto it = std::lower_bound(terms_.begin(), terms_.end(), n,
                             [](const Term& t, Exponent e) { return t.exponent < e; });
  if (it == terms_.end() || it->exponent != n) return 0;
  return it->numerator;
}

mpq_class ExactSeries::coeff(Exponent n) const {
  mpq_class q(numerator_at(n), den_);
  q.canonicalize();
  return q;
}

std::vector<mpz_class> ExactSeries::dense_numerators(Exponent upto) const {
  upto = std::clamp<Exponent>(upto, 0, prec_);
  std::vector<mpz_class> out(static_cast<size_t>(upto));
  for (const auto& t : terms_) {
    if (t.exponent >= upto) break;
    out[static_cast<size_t>(t.exponent)] = t.numerator;
  }
  return out;
}

mpz_class ExactSeries::max_abs_numerator() const {
  mpz_class m = 0;
  for (const auto& t : terms_)
    if (mpz_cmpabs(t.numerator.get_mpz_t(), m.get_mpz_t()) > 0) m = abs(t.numerator);
  return m;
}

ExactSeries ExactSeries::truncated(Exponent prec) const {
  ExactSeries s(std::min(prec, prec_));
  s.den_ = den_;
  for (const auto& t : terms_) {
    if (t.exponent >= s.prec_) break;
    s.terms_.push_back(t);
  }
  s.normalize();
  return s;
}

ExactSeries ExactSeries::shifted(Exponent m) const {
  if (m < 0) throw DomainError("ExactSeries::shifted: negative shift");
  ExactSeries s = *this;
  s.prec_ += m;
  for (auto& t : s.terms_) t.exponent += m;
  return s;
}

ExactSeries ExactSeries::scaled(const mpq_class& c) const {
  ExactSeries s(prec_);
  if (sgn(c) == 0) return s;
  s.terms_ = terms_;
  for (auto& t : s.terms_) t.numerator *= c.get_num();
  s.den_ = den_ * c.get_den();
  s.normalize();
  return s;
}

ExactSeries ExactSeries::picked(Exponent step) const {
  if (step <= 0) throw DomainError("ExactSeries::picked: step must be positive");
  ExactSeries s((prec_ + step - 1) / step);
  s.den_ = den_;
  for (const auto& t : terms_)
    if (t.exponent % step == 0) s.terms_.push_back({t.exponent / step, t.numerator});
  s.normalize();
  return s;
}

ExactSeries& ExactSeries::operator+=(const ExactSeries& other) {
  const Exponent prec = std::min(prec_, other.prec_);
  const mpz_class den = lcm(den_, other.den_);
  const mpz_class fa = den / den_, fb = den / other.den_;
  std::vector<Term> merged;
  merged.reserve(terms_.size() + other.terms_.size());
  auto i = terms_.begin();
  auto j = other.terms_.begin();
  auto live = [&](const auto& it, const auto& end) { return it != end && it->exponent < prec; };
  while (live(i, terms_.end()) || live(j, other.terms_.end())) {
    if (!live(j, other.terms_.end()) || (live(i, terms_.end()) && i->exponent < j->exponent)) {
      merged.push_back({i->exponent, i->numerator * fa});
      ++i;
    } else if (!live(i, terms_.end()) || j->exponent < i->exponent) {
      merged.push_back({j->exponent, j->numerator * fb});
      ++j;
    } else {
      merged.push_back({i->exponent, i->numerator * fa + j->numerator * fb});
      ++i;
      ++j;
    }
  }
  prec_ = prec;
  den_ = den;
  terms_ = std::move(merged);
  normalize();
  return *this;
}

ExactSeries& ExactSeries::operator-=(const ExactSeries& other) { return *this += -other; }

ExactSeries operator+(ExactSeries a, const ExactSeries& b) { return a += b; }
ExactSeries operator-(ExactSeries a, const ExactSeries& b) { return a -= b; }
ExactSeries operator-(const ExactSeries& a) { return a.scaled(-1); }
ExactSeries operator*(const mpq_class& c, const ExactSeries& a) { return a.scaled(c); }

namespace {

ExactSeries mul_schoolbook(const ExactSeries& a, const ExactSeries& b, ExactSeries::Exponent prec,
                           std::size_t bound_bits) {
  const auto ta = a.terms(), tb = b.terms();
  ExactSeries::Exponent top = 0;
  if (!ta.empty() && !tb.empty())
    top = std::min(prec, ta.back().exponent + tb.back().exponent + 1);
  std::vector<ExactSeries::Term> terms;
  const bool small = bound_bits < 120 && bit_length(a.max_abs_numerator()) < 63 &&
                     bit_length(b.max_abs_numerator()) < 63;
  if (small) {
    std::vector<__int128> acc(static_cast<size_t>(top), 0);
    std::vector<long> vb(tb.size());
    for (size_t j = 0; j < tb.size(); ++j) vb[j] = tb[j].numerator.get_si();
    for (const auto& x : ta) {
      const __int128 xa = x.numerator.get_si();
      for (size_t j = 0; j < tb.size(); ++j) {
        const auto e = x.exponent + tb[j].exponent;
        if (e >= top) break;
        acc[static_cast<size_t>(e)] += xa * vb[j];
      }
    }
    for (size_t e = 0; e < acc.size(); ++e) {
      if (acc[e] == 0) continue;
      const bool neg = acc[e] < 0;
      unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(acc[e]) : acc[e];
      mpz_class hi = static_cast<unsigned long>(static_cast<std::uint64_t>(mag >> 64));
      hi <<= 64;
      hi += static_cast<unsigned long>(static_cast<std::uint64_t>(mag));
      terms.push_back({static_cast<ExactSeries::Exponent>(e), neg ? mpz_class(-hi) : hi});
    }
  } else {
    std::vector<mpz_class> acc(static_cast<size_t>(top));
    for (const auto& x : ta)
      for (const auto& y : tb) {
        const auto e = x.exponent + y.exponent;
        if (e >= top) break;
        mpz_addmul(acc[static_cast<size_t>(e)].get_mpz_t(), x.numerator.get_mpz_t(),
                   y.numerator.get_mpz_t());
      }
    for (size_t e = 0; e < acc.size(); ++e)
      if (sgn(acc[e]) != 0) terms.push_back({static_cast<ExactSeries::Exponent>(e), std::move(acc[e])});
  }
  return ExactSeries::from_terms(prec, std::move(terms), a.denominator() * b.denominator());
}

ExactSeries mul_transform(const ExactSeries& a, const ExactSeries& b, ExactSeries::Exponent prec,
                          std::size_t bound_bits) {
  const auto la = std::min(prec, a.terms().back().exponent + 1);
  const auto lb = std::min(prec, b.terms().back().exponent + 1);
  const auto da = a.dense_numerators(la), db = b.dense_numerators(lb);
  const auto out_len = std::min(prec, la + lb - 1);
  auto product = detail::convolve_exact(da, db, static_cast<size_t>(out_len), bound_bits);
  return ExactSeries::from_dense(prec, product, a.denominator() * b.denominator());
}

}  // namespace

ExactSeries mul(const ExactSeries& a, const ExactSeries& b, MulStrategy strategy) {
  const auto prec = std::min(a.prec(), b.prec());
  if (a.is_zero() || b.is_zero()) return ExactSeries(prec);
  // valuation shortcut keeps sparse leading zeros out of the transform
  const auto va = a.valuation(), vb = b.valuation();
  if (va + vb >= prec) return ExactSeries(prec);
  const std::size_t overlap = std::min(a.nnz(), b.nnz());
  const std::size_t bound_bits = bit_length(a.max_abs_numerator()) + bit_length(b.max_abs_numerator()) +
                                 bit_length(static_cast<std::uint64_t>(overlap)) + 1;
  if (strategy == MulStrategy::automatic) {
    const double n = static_cast<double>(std::min(prec, a.terms().back().exponent + b.terms().back().exponent + 1));
    const double primes = static_cast<double>(detail::primes_for_bound(bound_bits));
    const double transform_cost = 12.0 * n * std::max(1.0, std::log2(n)) * primes + 40.0 * n * primes;
    const double school_cost = static_cast<double>(a.nnz()) * static_cast<double>(b.nnz()) *
                               (bound_bits < 120 ? 1.0 : 20.0);
    strategy = school_cost <= transform_cost ? MulStrategy::schoolbook : MulStrategy::transform;
  }
  if (strategy == MulStrategy::schoolbook) return mul_schoolbook(a, b, prec, bound_bits);
  // strip common valuations so the transform length stays minimal
  if (va > 0 || vb > 0) {
    auto strip = [](const ExactSeries& s, ExactSeries::Exponent v) {
      std::vector<ExactSeries::Term> terms(s.terms().begin(), s.terms().end());
      for (auto& t : terms) t.exponent -= v;
      return ExactSeries::from_terms(s.prec() - v, std::move(terms), s.denominator());
    };
    const auto tail = prec - va - vb;
    auto product = mul_transform(strip(a, va).truncated(tail), strip(b, vb).truncated(tail), tail, bound_bits);
    return product.shifted(va + vb).truncated(prec);
  }
  return mul_transform(a, b, prec, bound_bits);
}

ExactSeries pow(const ExactSeries& a, unsigned e) {
  ExactSeries result = ExactSeries::one(a.prec());
  ExactSeries base = a;
  bool first = true;
  while (e) {
    if (e & 1) {
      result = first ? base : mul(result, base);
      first = false;
    }
    e >>= 1;
    if (e) base = mul(base, base);
  }
  return result;
}

ExactSeries combine(std::span<const ExactSeries> series, std::span<const mpq_class> coeffs) {
  if (series.size() != coeffs.size()) throw DomainError("combine: size mismatch");
  if (series.empty()) return ExactSeries(0);
  ExactSeries::Exponent prec = series[0].prec();
  for (const auto& s : series) prec = std::min(prec, s.prec());
  // accumulate over a common denominator in one dense pass
  mpz_class den = 1;
  for (size_t i = 0; i < series.size(); ++i)
    if (sgn(coeffs[i]) != 0) den = lcm(den, series[i].denominator() * coeffs[i].get_den());
  ExactSeries::Exponent top = 0;
  for (size_t i = 0; i < series.size(); ++i)
    if (sgn(coeffs[i]) != 0 && !series[i].is_zero())
      top = std::max(top, std::min(prec, series[i].terms().back().exponent + 1));
  std::vector<mpz_class> acc(static_cast<size_t>(top));
  for (size_t i = 0; i < series.size(); ++i) {
    if (sgn(coeffs[i]) == 0) continue;
    const mpz_class factor = coeffs[i].get_num() * (den / (series[i].denominator() * coeffs[i].get_den()));
    for (const auto& t : series[i].terms()) {
      if (t.exponent >= top) break;
      mpz_addmul(acc[static_cast<size_t>(t.exponent)].get_mpz_t(), t.numerator.get_mpz_t(),
                 factor.get_mpz_t());
    }
  }
  return ExactSeries::from_dense(prec, acc, den);
}

std::vector<std::size_t> rref(std::vector<std::vector<mpq_class>>& m, std::size_t pivot_columns) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const size_t cols = m[0].size();
  const size_t limit = std::min(cols, pivot_columns);
  size_t row = 0;
  for (size_t col = 0; col < limit && row < m.size(); ++col) {
    size_t sel = row;
    while (sel < m.size() && sgn(m[sel][col]) == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[sel], m[row]);
    const mpq_class inv = 1 / m[row][col];
    for (size_t c = col; c < cols; ++c) m[row][c] *= inv;
    for (size_t r = 0; r < m.size(); ++r) {
      if (r == row || sgn(m[r][col]) == 0) continue;
      const mpq_class f = m[r][col];
      for (size_t c = col; c < cols; ++c) m[r][c] -= f * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

LinearSolution linear_solve(std::span<const ExactSeries> rows,
                            std::span<const SeriesConstraint> constraints) {
  LinearSolution sol;
  const size_t n = rows.size();
  ExactSeries::Exponent prec = rows.empty() ? 0 : rows[0].prec();
  for (const auto& r : rows) prec = std::min(prec, r.prec());
  bool homogeneous = true;
  for (const auto& c : constraints) {
    if (c.exponent >= prec)
      throw DomainError("linear_solve: constraint exponent " + std::to_string(c.exponent) +
                        " beyond row precision " + std::to_string(prec));
    if (sgn(c.value) != 0) homogeneous = false;
  }

  std::vector<std::vector<mpq_class>> system(constraints.size(), std::vector<mpq_class>(n + 1));
  for (size_t i = 0; i < constraints.size(); ++i) {
    for (size_t j = 0; j < n; ++j) system[i][j] = rows[j].coeff(constraints[i].exponent);
    system[i][n] = constraints[i].value;
  }
  const auto pivots = rref(system, n + 1);
  if (!pivots.empty() && pivots.back() == n) return sol;  // 0 = 1 row
  sol.consistent = true;

  std::vector<bool> is_pivot(n, false);
  for (auto p : pivots) is_pivot[p] = true;
  if (!homogeneous) {
    sol.particular_coords.assign(n, 0);
    for (size_t r = 0; r < pivots.size(); ++r) sol.particular_coords[pivots[r]] = system[r][n];
    sol.particular.push_back(combine(rows, sol.particular_coords));
  }
  std::vector<std::vector<mpq_class>> kernel;
  for (size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    std::vector<mpq_class> v(n, 0);
    v[f] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -system[r][f];
    kernel.push_back(std::move(v));
  }
  if (kernel.empty()) return sol;

  // Echelonize the kernel series by their coefficients, widening the window
  // until the rank stabilizes at full precision or full kernel rank.
  std::vector<ExactSeries> series;
  for (const auto& v : kernel) series.push_back(combine(rows, v));
  const size_t m = series.size();
  ExactSeries::Exponent window = std::min<ExactSeries::Exponent>(prec, 64);
  std::vector<std::vector<mpq_class>> aug;
  std::vector<std::size_t> piv;
  for (;;) {
    aug.assign(m, std::vector<mpq_class>(static_cast<size_t>(window) + m));
    for (size_t i = 0; i < m; ++i) {
      for (const auto& t : series[i].terms()) {
        if (t.exponent >= window) break;
        aug[i][static_cast<size_t>(t.exponent)] = mpq_class(t.numerator, series[i].denominator());
        aug[i][static_cast<size_t>(t.exponent)].canonicalize();
      }
      aug[i][static_cast<size_t>(window) + i] = 1;
    }
    piv = rref(aug, static_cast<size_t>(window));
    if (piv.size() == m || window == prec) break;
    window = std::min(prec, window * 4);
  }
  for (size_t r = 0; r < piv.size(); ++r) {
    std::vector<mpq_class> coords(n, 0);
    for (size_t j = 0; j < m; ++j) {
      const mpq_class& t = aug[r][static_cast<size_t>(window) + j];
      if (sgn(t) == 0) continue;
      for (size_t i = 0; i < n; ++i) coords[i] += t * kernel[j][i];
    }
    sol.basis.push_back(combine(rows, coords));
    sol.kernel_coords.push_back(std::move(coords));
    sol.pivots.push_back(static_cast<ExactSeries::Exponent>(piv[r]));
  }
  return sol;
}

void write_series(std::ostream& out, const ExactSeries& s) {
  out << "# prec=" << s.prec() << '\n';
  for (const auto& t : s.terms()) {
    mpq_class c(t.numerator, s.denominator());
    c.canonicalize();
    out << t.exponent << ',' << c.get_num() << '/' << c.get_den() << '\n';
  }
}

ExactSeries read_series(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# prec=", 0) != 0)
    throw DomainError("read_series: missing '# prec=' header");
  const auto prec = std::stoll(line.substr(7));
  std::vector<std::pair<ExactSeries::Exponent, mpq_class>> entries;
  mpz_class den = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("read_series: malformed line '" + line + "'");
    mpq_class c;
    if (c.set_str(line.substr(comma + 1), 10) != 0)
      throw DomainError("read_series: malformed coefficient '" + line + "'");
    c.canonicalize();
    den = lcm(den, c.get_den());
    entries.emplace_back(std::stoll(line.substr(0, comma)), c);
  }
  std::vector<ExactSeries::Term> terms;
  terms.reserve(entries.size());
  for (auto& [e, c] : entries) terms.push_back({e, c.get_num() * (den / c.get_den())});
  return ExactSeries::from_terms(prec, std::move(terms), den);
}

}  // namespace mfres
