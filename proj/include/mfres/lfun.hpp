#pragma once

// L-values: quadratic twists at the centre by an approximate functional
// equation, Dirichlet L(chi_D, s) and half-integral weight Hecke series in
// their regions of absolute convergence, Rankin-Selberg sums, and Gamma.

#include "mfres/arith.hpp"
#include "mfres/halfint.hpp"
#include "mfres/modforms.hpp"
#include "mfres/scalar.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace mfres {

template <class Scalar>
struct LValue {
  Scalar value = 0;
  Scalar tail_bound = 0;
  std::int64_t truncation = 0;
  int bits = 0;
  /// Set when tail_bound could not be pushed below 2^(-bits/2).
  bool degraded = false;
};

/// Q(k, y) = e^(-y) sum_{j<k} y^j / j!.
template <class Scalar>
Scalar regularized_upper_gamma(int k, Scalar y);

/// The approximate functional equation weight W(x) = Q(k, 2 pi x).
class AfeWindow {
 public:
  explicit AfeWindow(int k);
  int k() const { return k_; }
  template <class Scalar>
  Scalar operator()(Scalar x) const;

 private:
  int k_;
};

/// Rigorous bound for 2 sum_{n > t} d(n) n^(-1/2) Q(k, 2 pi n / q).
double central_tail_bound(int k, std::int64_t q, std::int64_t t);

/// Truncation used by central_lvalue: the heuristic start
/// ceil(q (k + 0.7 bits) / (2 pi)), grown until the tail bound is below 2^(-bits/2).
std::int64_t central_truncation(int k, std::int64_t q, int bits);

/// Central twisted values L(f, chi_D, k) for many D against one coefficient table.
template <class Scalar>
class TwistEvaluator {
 public:
  /// Coefficients and character data for n <= limit.
  TwistEvaluator(const Eigenform& f, std::int64_t limit);

  int k() const { return k_; }
  std::int64_t limit() const { return limit_; }
  /// Exact zero when (-1)^k chi_D(-1) = -1. Throws TableExhausted when the
  /// truncation exceeds limit().
  LValue<Scalar> central(const FundamentalDiscriminant& d, int bits) const;
  /// Same value with an explicit truncation (no tail certification beyond it).
  LValue<Scalar> central_at(const FundamentalDiscriminant& d, std::int64_t truncation, int bits) const;

 private:
  int k_;
  std::int64_t limit_;
  std::vector<Scalar> weight_;  // lambda(n) / sqrt(n)
  std::vector<std::uint32_t> spf_;
};

template <class Scalar>
LValue<Scalar> central_lvalue(const Eigenform& f, const FundamentalDiscriminant& d, int bits);

/// L(chi_D, s) for real s > 1.
template <class Scalar>
LValue<Scalar> dirichlet_lvalue(const FundamentalDiscriminant& d, Scalar s, int bits);

/// Polya-Vinogradov truncation: T with 2 sqrt(q) log(4q) T^(-s) < 2^(-bits/2)
/// (infinite for q = 1).
double dirichlet_truncation(std::int64_t q, double s, int bits);

/// sum_{n <= t} chi_D(n) n^(-s) with the Polya-Vinogradov tail, against shared
/// tables reaching t.
template <class Scalar>
LValue<Scalar> dirichlet_partial(const FundamentalDiscriminant& d, std::span<const Scalar> inv_powers,
                                 std::span<const std::uint32_t> spf, std::int64_t t, double s, int bits);

/// L(g, s) = sum c(n) n^(-s) over n <= terms (default: the whole table).
template <class Scalar>
LValue<Scalar> hecke_lvalue_halfint(const PlusForm& g, Scalar s, std::int64_t terms = -1);

/// n^(-s) for 0 <= n <= limit (entry 0 is 0), powers taken on primes only.
template <class Scalar>
std::vector<Scalar> inverse_power_table(std::int64_t limit, Scalar s);

/// sum_{p <= x} a(p) a2(p) log p / p^(2k-1).
template <class Scalar>
Scalar rankin_sum(const Eigenform& f, const Eigenform& f2, std::int64_t x);

/// Gamma(s) by Stirling's series after an upward shift; reflection for s < 1/2.
template <class Scalar>
Scalar real_gamma(Scalar s);

/// log |Gamma(s)|, with the sign of Gamma(s) stored in *sign when given.
template <class Scalar>
Scalar log_abs_gamma(Scalar s, int* sign = nullptr);

/// Gamma(x) / Gamma(y). When x - y is an integer and both lie left of 1/2,
/// the reflection formula cancels the common poles.
template <class Scalar>
Scalar gamma_ratio(Scalar x, Scalar y);

/// B_0 .. B_n, exact.
const std::vector<mpq_class>& bernoulli_numbers(std::size_t n);

#define MFRES_LFUN_EXTERN(S)                                                                              \
  extern template S regularized_upper_gamma<S>(int, S);                                                  \
  extern template S AfeWindow::operator()<S>(S) const;                                                   \
  extern template class TwistEvaluator<S>;                                                               \
  extern template LValue<S> central_lvalue<S>(const Eigenform&, const FundamentalDiscriminant&, int);    \
  extern template LValue<S> dirichlet_lvalue<S>(const FundamentalDiscriminant&, S, int);                 \
  extern template LValue<S> dirichlet_partial<S>(const FundamentalDiscriminant&, std::span<const S>,     \
                                                 std::span<const std::uint32_t>, std::int64_t, double, int); \
  extern template LValue<S> hecke_lvalue_halfint<S>(const PlusForm&, S, std::int64_t);                   \
  extern template std::vector<S> inverse_power_table<S>(std::int64_t, S);                                \
  extern template S rankin_sum<S>(const Eigenform&, const Eigenform&, std::int64_t);                     \
  extern template S real_gamma<S>(S);                                                                    \
  extern template S log_abs_gamma<S>(S, int*);                                                           \
  extern template S gamma_ratio<S>(S, S);
MFRES_LFUN_EXTERN(double)
MFRES_LFUN_EXTERN(Real128)
#undef MFRES_LFUN_EXTERN

}  // namespace mfres
