#pragma once

// Exact truncated power series over the rationals.
//
// A series stores integer numerators over one common denominator, sparsely:
// only nonzero terms are kept, sorted by exponent. The representation is
// canonical (denominator positive, coprime to the numerator content), so
// structural equality is exact equality.

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mfres {

class ExactSeries {
 public:
  using Exponent = std::int64_t;

  struct Term {
    Exponent exponent;
    mpz_class numerator;
    friend bool operator==(const Term&, const Term&) = default;
  };

  ExactSeries() = default;
  /// The zero series known to precision `prec` (exponents 0 .. prec-1).
  explicit ExactSeries(Exponent prec);

  static ExactSeries one(Exponent prec);
  static ExactSeries monomial(Exponent exponent, const mpq_class& coeff, Exponent prec);
  /// Terms need not be sorted or nonzero; exponents >= prec are dropped.
  static ExactSeries from_terms(Exponent prec, std::vector<Term> terms, mpz_class denominator = 1);
  /// numerators[i] is the numerator of q^i.
  static ExactSeries from_dense(Exponent prec, std::span<const mpz_class> numerators,
                                mpz_class denominator = 1);

  Exponent prec() const { return prec_; }
  const mpz_class& denominator() const { return den_; }
  std::span<const Term> terms() const { return terms_; }
  std::size_t nnz() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_integral() const { return den_ == 1; }

  /// Coefficient of q^n; zero when absent. Throws DomainError if n >= prec.
  mpq_class coeff(Exponent n) const;
  /// Numerator of q^n over denominator().
  mpz_class numerator_at(Exponent n) const;
  /// Numerators for exponents 0 .. upto-1 (upto clamped to prec).
  std::vector<mpz_class> dense_numerators(Exponent upto) const;
  /// Largest |numerator|.
  mpz_class max_abs_numerator() const;
  /// Lowest exponent with a nonzero coefficient, or -1 for the zero series.
  Exponent valuation() const { return terms_.empty() ? -1 : terms_.front().exponent; }

  ExactSeries truncated(Exponent prec) const;
  /// Multiplication by q^m: exponents and precision both shift by m.
  ExactSeries shifted(Exponent m) const;
  ExactSeries scaled(const mpq_class& c) const;
  /// Series with coefficients c(step * n), precision ceil(prec / step).
  ExactSeries picked(Exponent step) const;

  ExactSeries& operator+=(const ExactSeries& other);
  ExactSeries& operator-=(const ExactSeries& other);

  friend bool operator==(const ExactSeries&, const ExactSeries&) = default;

 private:
  void normalize();

  Exponent prec_ = 0;
  mpz_class den_ = 1;
  std::vector<Term> terms_;
};

ExactSeries operator+(ExactSeries a, const ExactSeries& b);
ExactSeries operator-(ExactSeries a, const ExactSeries& b);
ExactSeries operator-(const ExactSeries& a);
ExactSeries operator*(const mpq_class& c, const ExactSeries& a);

enum class MulStrategy { automatic, schoolbook, transform };

/// Exact Cauchy product truncated to min(prec_a, prec_b).
ExactSeries mul(const ExactSeries& a, const ExactSeries& b,
                MulStrategy strategy = MulStrategy::automatic);
inline ExactSeries operator*(const ExactSeries& a, const ExactSeries& b) { return mul(a, b); }

/// a^e by repeated squaring; a^0 is 1 at a's precision.
ExactSeries pow(const ExactSeries& a, unsigned e);

/// Linear combination sum coeffs[i] * series[i] at the common precision.
ExactSeries combine(std::span<const ExactSeries> series, std::span<const mpq_class> coeffs);

struct SeriesConstraint {
  ExactSeries::Exponent exponent;
  mpq_class value;
};

struct LinearSolution {
  bool consistent = false;
  /// A particular solution (absent for homogeneous systems or when inconsistent).
  std::vector<mpq_class> particular_coords;
  std::vector<ExactSeries> particular;  // zero or one element
  /// Coordinates (over the input rows) of a kernel basis, matching `basis`.
  std::vector<std::vector<mpq_class>> kernel_coords;
  /// Kernel solutions as series: reduced echelon, pivots normalized to 1.
  std::vector<ExactSeries> basis;
  /// Pivot exponent of each basis series.
  std::vector<ExactSeries::Exponent> pivots;
};

/// Solutions sum x_i rows[i] meeting every constraint coeff(e) = value.
/// Inconsistent systems return consistent == false rather than throwing.
LinearSolution linear_solve(std::span<const ExactSeries> rows,
                            std::span<const SeriesConstraint> constraints);

/// Reduced row echelon form over Q in place; pivots are searched only in the
/// first `pivot_columns` columns. Returns the pivot columns.
std::vector<std::size_t> rref(std::vector<std::vector<mpq_class>>& matrix,
                              std::size_t pivot_columns = static_cast<std::size_t>(-1));

/// Text form: a `# prec=<M>` header, then `exponent,numerator/denominator` lines.
void write_series(std::ostream& out, const ExactSeries& s);
ExactSeries read_series(std::istream& in);

}  // namespace mfres
