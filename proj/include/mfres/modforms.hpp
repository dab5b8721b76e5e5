#pragma once

// Level-one integral weight forms: Eisenstein series, the Victor Miller
// basis, Hecke eigenforms and their coefficients.

#include "mfres/arith.hpp"
#include "mfres/qseries.hpp"
#include "mfres/scalar.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mfres {

/// E_4 = 1 + 240 sum sigma_3(n) q^n, E_6 = 1 - 504 sum sigma_5(n) q^n.
ExactSeries eisenstein(int weight, ExactSeries::Exponent prec);

/// Delta = q prod (1 - q^n)^24, via Jacobi's triple product for eta^3.
ExactSeries delta(ExactSeries::Exponent prec);

/// dim S_weight(SL_2(Z)) for even weight; 0 for weight < 12.
int cusp_form_dimension(int weight);

/// Echelon basis b_1..b_d of S_weight with coeff(q^j) of b_i = delta_ij.
std::vector<ExactSeries> victor_miller_basis(int weight, ExactSeries::Exponent prec);

/// T(2) on the span of a Victor Miller basis: entry (j, i) is the q^(j+1)
/// coefficient of T(2) b_(i+1). Needs basis precision > 2 dim.
std::vector<std::vector<mpz_class>> hecke_t2_matrix(int weight, std::span<const ExactSeries> basis);

/// Characteristic polynomial det(x I - M), coefficients from x^0 upward.
std::vector<mpq_class> characteristic_polynomial(const std::vector<std::vector<mpz_class>>& m);

/// A normalized Hecke eigenform of weight 2k, stored by its prime coefficients.
class Eigenform {
 public:
  /// Exact eigenform (dim S = 1): primes[i] has coefficient a_p[i].
  Eigenform(int weight, int label, std::int64_t prec_primes, std::vector<std::int64_t> primes,
            std::vector<mpz_class> a_p);
  /// Numeric eigenform; `basis_coords` are its coordinates in the Victor Miller basis.
  Eigenform(int weight, int label, std::int64_t prec_primes, std::vector<std::int64_t> primes,
            std::vector<Real128> a_p, std::vector<Real128> basis_coords);

  int weight() const { return weight_; }
  int k() const { return weight_ / 2; }
  /// 1-based position in the a(2)-ascending ordering.
  int label() const { return label_; }
  /// Every prime p <= prec_primes has a stored coefficient.
  std::int64_t prec_primes() const { return prec_primes_; }
  bool is_exact() const { return exact_flag_; }

  std::span<const std::int64_t> primes() const { return primes_; }
  /// Throws DomainError for numeric forms, TableExhausted beyond the table.
  const mpz_class& exact_prime_coeff(std::int64_t p) const;
  const Real128& prime_coeff(std::int64_t p) const;
  std::span<const Real128> basis_coordinates() const { return coords_; }

 private:
  std::size_t index_of(std::int64_t p) const;

  int weight_;
  int label_;
  bool exact_flag_;
  std::int64_t prec_primes_;
  std::vector<std::int64_t> primes_;
  std::vector<mpz_class> exact_;
  std::vector<Real128> numeric_;
  std::vector<Real128> coords_;
};

/// The dim S_weight normalized eigenforms, ordered by a(2) ascending.
/// Throws PrecisionError if T(2) eigenvalues are not numerically separated.
std::vector<Eigenform> hecke_eigenforms(int weight, std::int64_t prec_primes);

/// Same, from an already computed Victor Miller basis of precision > prec_primes.
std::vector<Eigenform> hecke_eigenforms(int weight, std::int64_t prec_primes,
                                        std::span<const ExactSeries> basis);

/// a(n) through the Hecke relations; exact forms only.
mpz_class exact_coeff_at(const Eigenform& f, std::int64_t n);

/// a(n) through the Hecke relations at scalar precision.
template <class Scalar>
Scalar coeff_at(const Eigenform& f, std::int64_t n);

/// lambda(n) = a(n) / n^(k - 1/2) for 1 <= n <= limit (entry 0 is 0).
template <class Scalar>
class NormalizedCoeffTable {
 public:
  NormalizedCoeffTable(const Eigenform& f, std::int64_t limit);

  int weight() const { return weight_; }
  std::int64_t limit() const { return static_cast<std::int64_t>(lambda_.size()) - 1; }
  const Scalar& operator()(std::int64_t n) const { return lambda_[static_cast<std::size_t>(n)]; }
  std::span<const Scalar> lambdas() const { return lambda_; }

 private:
  int weight_;
  std::vector<Scalar> lambda_;
};

extern template class NormalizedCoeffTable<double>;
extern template class NormalizedCoeffTable<Real128>;
extern template double coeff_at<double>(const Eigenform&, std::int64_t);
extern template Real128 coeff_at<Real128>(const Eigenform&, std::int64_t);

}  // namespace mfres
