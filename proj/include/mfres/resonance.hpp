#pragma once

// The resonance method for quadratic twists: resonator polynomials R(D),
// their moments over the discriminant family, L-weighted sums, the
// predicted resonance shift, and the search for large twisted values.

#include "mfres/arith.hpp"
#include "mfres/halfint.hpp"
#include "mfres/lfun.hpp"
#include "mfres/modforms.hpp"
#include "mfres/scalar.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfres {

struct ResonatorOverrides {
  std::optional<std::int64_t> n_max;
  std::optional<double> big_l;
  /// Prime window [lo, hi].
  std::optional<std::pair<std::int64_t, std::int64_t>> window;
  /// Multiplier on the strength rule r(p) = L / (sqrt(p) log p).
  std::optional<double> strength;
};

struct ResonatorTerm {
  std::int64_t n;
  double r;       // r(n)
  double weight;  // r(n) a_1(n) / n^(k-1/2)
  /// Indices into Resonator::primes of the prime factors of n.
  std::vector<std::uint16_t> factors;
};

struct Resonator {
  int k = 0;  // f_1 has weight 2k
  std::int64_t n_max = 1;
  double big_l = 0;
  std::int64_t p_lo = 0, p_hi = -1;
  double strength = 1;
  /// Window primes with r(p) and a_1(p) / p^(k-1/2).
  std::vector<std::int64_t> primes;
  std::vector<double> r_p;
  std::vector<double> a1_normalized;
  /// Ascending in n; support.front() is n = 1 with weight 1.
  std::vector<ResonatorTerm> support;
  bool degenerate = false;
  /// "paper-defaults" or "overrides".
  std::string regime;
  std::vector<std::string> warnings;
};

/// The resonator of size N = X^(1/24) with L = (1/8) sqrt(log N log log N),
/// window [L^2, L^4] and r(p) = L / (sqrt(p) log p), each replaceable by overrides.
/// Overriding only the window sets L = sqrt(window lo); overriding only L sets the window [L^2, L^4].
Resonator build_resonator(double x, const Eigenform& f1, const ResonatorOverrides& overrides = {});

/// R(D) = sum_n r(n) a_1(n) / n^(k-1/2) chi_D(n).
double resonator_value(const Resonator& res, const FundamentalDiscriminant& d);

/// prod_window (1 + r(p)^2 a_1(p)^2 / p^(2k-1)).
double calR(const Resonator& res);

/// exp(sum_window 2 r(p) a_1(p) a_target(p) / p^(2k-1/2)).
double predicted_shift(const Resonator& res, const Eigenform& target);

/// Fundamental D with X < (-1)^k D <= 2X and D = 1 mod 4, ascending in |D|.
std::vector<FundamentalDiscriminant> resonance_family(double x, Parity k_parity);

struct ResonatorStats {
  double calR = 1;
  long double moment2 = 0;
  long double moment6 = 0;
  std::int64_t count = 0;
  /// X/(2 zeta(2)) sum r(n)^2 a_1(n)^2 / n^(2k-1) prod_{p | 2n} p/(p+1).
  double diagonal_main = 0;
  /// moment2^3 <= count^2 moment6.
  bool holder = true;
};

ResonatorStats moments(const Resonator& res, double x, unsigned threads = 0);

struct CharSum {
  std::int64_t u;
  std::int64_t brute;
  double main_term;
};

/// sum chi_D(u) over the resonance family, and X/(2 zeta(2)) prod_{p | 2u} p/(p+1) when u is a square.
CharSum charsum_lemma1(std::int64_t u, double x, Parity k_parity);

/// A C-infinity bump: 0 off the support, 1 on the plateau, built from smoothed steps.
class SmoothWindow {
 public:
  SmoothWindow(double support_lo, double plateau_lo, double plateau_hi, double support_hi);
  /// Support [1, 2], plateau [1.1, 1.9].
  static SmoothWindow narrow();
  /// Support [1/2, 5/2], plateau [1, 2].
  static SmoothWindow wide();

  double operator()(double t) const;
  double support_lo() const { return a_; }
  double support_hi() const { return d_; }
  double plateau_lo() const { return b_; }
  double plateau_hi() const { return c_; }
  /// Integral over the support by adaptive Simpson.
  double integral(double tolerance = 1e-12) const;

 private:
  double a_, b_, c_, d_;
};

/// Adaptive Simpson quadrature of fn over [a, b].
double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tolerance);

struct LSums {
  long double weighted = 0;        // sum L R^2 Phi
  long double weight_total = 0;    // sum R^2 Phi
  long double plain = 0;           // sum L Phi
  long double plain_total = 0;     // sum Phi
  std::int64_t count = 0;
  double max_tail = 0;
  std::int64_t negative = 0;       // L below -(tail bound)

  double observed_shift() const {
    return static_cast<double>((weighted / weight_total) / (plain / plain_total));
  }
};

/// sum over D = 1 mod 4, (-1)^k D > 0 with |D|/X in the window support of
/// L(f, chi_D, k) R(D)^2 Phi(|D|/X), with the companion sums.
template <class Scalar>
LSums weighted_lsum(const Resonator& res, double x, const TwistEvaluator<Scalar>& lvalues, const SmoothWindow& window,
                    int bits, unsigned threads = 0);

/// Table limit needed for central values with |D| <= d_max.
std::int64_t twist_table_limit(int k, std::int64_t d_max, int bits);

struct WaldspurgerSample {
  std::int64_t d;
  Real128 c;
  Real128 lvalue;
  Real128 tail_bound;
  Real128 ratio;  // c^2 / (|D|^(k-1/2) L); 0 when c = 0
};

struct WaldspurgerFit {
  int label = 0;
  Real128 constant = 0;  // mean ratio
  double spread = 0;     // (max - min) / mean
  std::vector<WaldspurgerSample> samples;
  /// D with c = 0 whose L-value is not within its tail bound of 0.
  std::vector<std::int64_t> zero_mismatches;
};

/// c(|D|)^2 / (|D|^(k-1/2) L(f, chi_D, k)) over the given discriminants.
WaldspurgerFit waldspurger_fit(const PlusForm& g, const Eigenform& f, std::span<const FundamentalDiscriminant> ds,
                               int bits);

/// exp((1/40) sqrt(log X / log log X)).
double theorem2_threshold(double x);

struct SearchOptions {
  double a = 1;
  double top_fraction = 0.01;
  /// Overrides top_fraction when nonzero.
  std::size_t top_count = 0;
  /// Discriminants sampled evenly for the global means (0 = all).
  std::size_t sample = 0;
  int bits = 53;
  unsigned threads = 0;
};

struct SearchEntry {
  std::int64_t d;
  double r2;
  std::vector<double> lvalues;
  std::vector<double> tail_bounds;
  bool condition;  // L(f_1) > A sum_{nu >= 2} L(f_nu) + threshold
  std::optional<double> c_lower;
};

struct SearchReport {
  std::vector<SearchEntry> top;
  std::optional<std::size_t> best;  // index into top with the largest L(f_1)
  std::int64_t family_size = 0;
  std::size_t sample_size = 0;
  std::vector<double> top_mean;     // per eigenform
  std::vector<double> global_mean;  // per eigenform, over the sample
  std::size_t condition_count = 0;
  double threshold = 0;
};

/// Ranks the family by R(D)^2 and evaluates every central value on the top slice.
/// With fits, each entry carries the lower bound
/// sqrt(C_1 |D|^(k-1/2) L_1) - sum_{nu >= 2} |lambda_nu| sqrt(C_nu |D|^(k-1/2) L_nu), lambda_1 = 1.
SearchReport search_large(const Resonator& res, double x, std::span<const Eigenform> basis, const SearchOptions& options,
                          std::span<const WaldspurgerFit> fits = {}, std::span<const double> lambda = {});

extern template LSums weighted_lsum<double>(const Resonator&, double, const TwistEvaluator<double>&,
                                            const SmoothWindow&, int, unsigned);
extern template LSums weighted_lsum<Real128>(const Resonator&, double, const TwistEvaluator<Real128>&,
                                             const SmoothWindow&, int, unsigned);

}  // namespace mfres
