#pragma once

// The Dirichlet series D_g(s) = sum alpha(n) n^(-s) built from plus-space
// coefficients, its three evaluations, the gamma factors of its functional
// equation, and the U_4 / W_4 relations.

#include "mfres/arith.hpp"
#include "mfres/halfint.hpp"
#include "mfres/lfun.hpp"
#include "mfres/scalar.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace mfres {

struct AlphaValue {
  mpq_class value;
  /// False when n has no decomposition |D| m^2; value is then 0.
  bool decomposed;
};

/// alpha(n) = c(|D|) mu(m) chi_D(m) m^(k-1) for n = |D| m^2.
AlphaValue alpha(std::int64_t n, const PlusForm& g, Parity k_parity);

template <class Scalar>
struct DgEvaluation {
  Scalar s;
  LValue<Scalar> via_coeffs;
  LValue<Scalar> via_twists;
  LValue<Scalar> via_quotients;
};

/// Pairwise agreement of via_coeffs with the other two, within summed tail bounds.
template <class Scalar>
bool triple_agreement(const DgEvaluation<Scalar>& e) {
  using std::abs;
  return abs(e.via_coeffs.value - e.via_twists.value) <= e.via_coeffs.tail_bound + e.via_twists.tail_bound &&
         abs(e.via_coeffs.value - e.via_quotients.value) <= e.via_coeffs.tail_bound + e.via_quotients.tail_bound;
}

/// Coordinates lambda with g = sum lambda_nu g_nu, by least squares on leading coefficients.
std::vector<Real128> eigen_coordinates(const PlusEigenbasis& basis, const PlusForm& g);

/// sum_{n <= n_terms} alpha(n) n^(-s), tail from the Hecke witness.
template <class Scalar>
LValue<Scalar> dg_via_coeffs(const PlusForm& g, Scalar s, std::int64_t n_terms);

/// sum over admissible |D| <= d_max of c(|D|) |D|^(-s) / L(chi_D, 2s - k + 1).
template <class Scalar>
LValue<Scalar> dg_via_twists(const PlusForm& g, Scalar s, std::int64_t d_max, int bits);

/// sum_nu lambda_nu L(g_nu, s) / L(f_nu, 2s), the denominator by Euler product.
template <class Scalar>
LValue<Scalar> dg_via_quotients(const PlusEigenbasis& basis, std::span<const Real128> lambda, Scalar s);

/// L(f, s) = prod_p (1 - a(p) p^-s + p^(2k-1-2s))^-1 over p <= prec_primes,
/// for s > k + 1/2, with a bound on the relative error of the truncation.
template <class Scalar>
LValue<Scalar> euler_product_lvalue(const Eigenform& f, Scalar s);

template <class Scalar>
struct GammaForms {
  Scalar form_a;
  Scalar form_b;
};

/// The gamma factor of the functional equation in its two closed forms.
template <class Scalar>
GammaForms<Scalar> gamma_factor(Scalar s, int k);

/// R(s) = (-1)^k Gamma(k-s)/Gamma((k+delta)/2 - s) * Gamma(s + (1+delta-k)/2)/Gamma(s + 1/2).
template <class Scalar>
Scalar rational_R(Scalar s, int k);

/// (-1)^(k + (k-delta)/2), the limit of R(s) as s grows.
int rational_R_limit(int k);

struct W4U4Report {
  std::complex<Real128> lhs;  // (g|U_4)(z)
  std::complex<Real128> rhs;  // (2/(2k+1)) 2^k (-2iz)^(-k-1/2) g(-1/(4z))
  double deviation;           // |lhs - rhs| / max(|lhs|, |rhs|)
  double tail_bound;
  bool passed;
};

W4U4Report w4_u4_check(const PlusForm& g, std::complex<Real128> z, double tolerance);

struct CoefficientIdentityRow {
  int label;
  bool exact;
  double deviation;
  bool passed;
};

/// c(|D| p^2) - c(|D|) p a(p) = c(|D|) (a(p) (1 - p) - chi_D(p) p^(k-1)) for each eigenform.
std::vector<CoefficientIdentityRow> coefficient_identity_check(const PlusEigenbasis& basis,
                                                               const FundamentalDiscriminant& d,
                                                               std::int64_t p, double tolerance = 1e-25);

#define MFRES_DSERIES_EXTERN(S)                                                                               \
  extern template LValue<S> dg_via_coeffs<S>(const PlusForm&, S, std::int64_t);                              \
  extern template LValue<S> dg_via_twists<S>(const PlusForm&, S, std::int64_t, int);                         \
  extern template LValue<S> dg_via_quotients<S>(const PlusEigenbasis&, std::span<const Real128>, S);         \
  extern template LValue<S> euler_product_lvalue<S>(const Eigenform&, S);                                    \
  extern template GammaForms<S> gamma_factor<S>(S, int);                                                     \
  extern template S rational_R<S>(S, int);
MFRES_DSERIES_EXTERN(double)
MFRES_DSERIES_EXTERN(Real128)
#undef MFRES_DSERIES_EXTERN

}  // namespace mfres
