#pragma once

// Half-integral weight forms on Gamma_0(4): the Kohnen plus space, its Hecke
// eigenbasis, and the Shimura relations tying it to integral weight forms.

#include "mfres/arith.hpp"
#include "mfres/modforms.hpp"
#include "mfres/qseries.hpp"
#include "mfres/scalar.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mfres {

/// theta = 1 + 2 sum q^(m^2), sparse.
ExactSeries theta_series(ExactSeries::Exponent prec);

/// F = sum_{n odd} sigma_1(n) q^n.
ExactSeries weight_two_F(ExactSeries::Exponent prec);

/// theta^(2k+1-4j) F^j for 0 <= j <= (2k+1)/4: a spanning set of M_{k+1/2}(Gamma_0(4)).
std::vector<ExactSeries> half_integral_spanning_set(int k, ExactSeries::Exponent prec);

/// A weight k+1/2 form given by its coefficients. Exact forms keep a rational
/// series; numeric forms (eigenforms with irrational coefficients) keep reals.
class PlusForm {
 public:
  PlusForm(int k, ExactSeries series);
  PlusForm(int k, ExactSeries::Exponent prec, std::vector<Real128> values);

  int k() const { return k_; }
  ExactSeries::Exponent prec() const { return prec_; }
  bool is_exact() const { return exact_; }
  /// Throws DomainError for numeric forms.
  const ExactSeries& series() const;
  mpq_class exact_coeff(ExactSeries::Exponent n) const;
  template <class Scalar>
  Scalar coeff(ExactSeries::Exponent n) const;
  /// c(0) .. c(upto - 1) at scalar precision.
  template <class Scalar>
  std::vector<Scalar> dense(ExactSeries::Exponent upto) const;

  /// max_n |c(n)| / n^(k/2 + 1/4) over stored n >= 1.
  double hecke_witness() const { return witness_; }

  /// Optional coordinates in a plus-space eigenbasis.
  std::optional<std::vector<Real128>> lambda;

  PlusForm scaled(const mpq_class& c) const;

 private:
  void compute_witness();

  int k_;
  ExactSeries::Exponent prec_;
  bool exact_;
  ExactSeries series_;
  std::vector<Real128> values_;
  double witness_ = 0;
};

/// First n with c(n) != 0 and (-1)^k n = 2, 3 mod 4 (or n = 0 with c(0) != 0),
/// or nullopt when the form satisfies the plus-space cusp conditions.
std::optional<ExactSeries::Exponent> plus_condition_violation(const PlusForm& g);

/// Echelon rational basis of S^+_{k+1/2}.
struct PlusSpace {
  int k;
  ExactSeries::Exponent prec;
  ExactSeries::Exponent cutoff;  // constraints imposed for n <= cutoff
  std::vector<ExactSeries> basis;
  std::vector<ExactSeries::Exponent> pivots;
};

/// Solves the plus-space conditions inside the spanning set. The dimension
/// must equal dim S_2k; one retry at a doubled cutoff, then ConstructionError.
PlusSpace plus_space_basis(int k, ExactSeries::Exponent prec);

/// Plus-space Hecke eigenforms g_nu paired with their Shimura lifts f_nu.
struct PlusEigenbasis {
  int k;
  std::vector<PlusForm> forms;
  std::vector<Eigenform> lifts;
};

/// Eigenbasis normalized to first nonzero coefficient 1. `eigenforms` must be
/// the dim S_2k eigenforms of weight 2k with prime tables covering the checks.
PlusEigenbasis plus_eigenbasis(const PlusSpace& space, std::span<const Eigenform> eigenforms);

struct ShimuraReport {
  std::int64_t d;
  std::int64_t n_max;
  std::size_t checked = 0;
  bool exact = false;
  /// Largest |lhs - rhs|, relative to max(1, |lhs|) for numeric checks.
  double max_deviation = 0;
  bool passed = false;
};

/// sum_{d | n} mu(d) chi_D(d) d^(k-1) a(n/d).
template <class Scalar>
Scalar shimura_multiplier(const Eigenform& f, const FundamentalDiscriminant& d, std::int64_t n);
mpz_class exact_shimura_multiplier(const Eigenform& f, const FundamentalDiscriminant& d, std::int64_t n);

/// Checks c(n^2 |D|) = c(|D|) sum_{d|n} mu(d) chi_D(d) d^(k-1) a(n/d) for n <= n_max.
ShimuraReport shimura_check(const PlusForm& g, const Eigenform& f, const FundamentalDiscriminant& d,
                            std::int64_t n_max, double tolerance = 1e-25);

/// Coefficients c(4n).
PlusForm u4(const PlusForm& g);

template <class Scalar>
struct Evaluation {
  std::complex<Scalar> value;
  Scalar tail_bound;
  std::int64_t terms;
};

/// g(z) = sum c(n) e^(2 pi i n z) with a tail bound from twice the Hecke witness.
/// Throws PrecisionError when the tail bound exceeds `tolerance`.
template <class Scalar>
Evaluation<Scalar> evaluate(const PlusForm& g, std::complex<Scalar> z, Scalar tolerance);

extern template double PlusForm::coeff<double>(ExactSeries::Exponent) const;
extern template Real128 PlusForm::coeff<Real128>(ExactSeries::Exponent) const;
extern template std::vector<double> PlusForm::dense<double>(ExactSeries::Exponent) const;
extern template std::vector<Real128> PlusForm::dense<Real128>(ExactSeries::Exponent) const;
extern template double shimura_multiplier<double>(const Eigenform&, const FundamentalDiscriminant&, std::int64_t);
extern template Real128 shimura_multiplier<Real128>(const Eigenform&, const FundamentalDiscriminant&, std::int64_t);
extern template Evaluation<double> evaluate<double>(const PlusForm&, std::complex<double>, double);
extern template Evaluation<Real128> evaluate<Real128>(const PlusForm&, std::complex<Real128>, Real128);

}  // namespace mfres
