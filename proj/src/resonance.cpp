#include "mfres/resonance.hpp"

#include "mfres/errors.hpp"
#include "mfres/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfres {

namespace {

double zeta2() { return M_PI * M_PI / 6; }

// a(p) / p^(k-1/2) in double
double normalized_prime_coeff(const Eigenform& f, std::int64_t p) {
  const Real128 v = f.prime_coeff(p) / pow(Real128(p), Real128(f.k()) - Real128(0.5));
  return static_cast<double>(v);
}

void enumerate_support(const Resonator& res, std::size_t start, std::int64_t n, double r, double w,
                       std::vector<std::uint16_t>& factors, std::vector<ResonatorTerm>& out) {
  for (std::size_t i = start; i < res.primes.size(); ++i) {
    const std::int64_t p = res.primes[i];
    if (n > res.n_max / p) break;
    factors.push_back(static_cast<std::uint16_t>(i));
    const double rp = r * res.r_p[i];
    const double wp = w * res.r_p[i] * res.a1_normalized[i];
    out.push_back({n * p, rp, wp, factors});
    enumerate_support(res, i + 1, n * p, rp, wp, factors, out);
    factors.pop_back();
  }
}

// chi_D(p) for the window primes that can occur in the support
std::vector<int> window_characters(const Resonator& res, std::int64_t d) {
  std::vector<int> chi(res.primes.size(), 0);
  for (std::size_t i = 0; i < res.primes.size() && res.primes[i] <= res.n_max; ++i) chi[i] = kronecker_symbol(d, res.primes[i]);
  return chi;
}

long double resonator_at(const Resonator& res, std::int64_t d) {
  const auto chi = window_characters(res, d);
  long double sum = 0;
  for (const auto& t : res.support) {
    int c = 1;
    for (auto i : t.factors) c *= chi[i];
    if (c != 0) sum += c > 0 ? t.weight : -t.weight;
  }
  return sum;
}

}  // namespace

Resonator build_resonator(double x, const Eigenform& f1, const ResonatorOverrides& ov) {
  if (!(x >= 1)) throw DomainError("build_resonator: X must be at least 1");
  Resonator res;
  res.k = f1.k();
  const bool any = ov.n_max || ov.big_l || ov.window || ov.strength;
  res.regime = any ? "overrides" : "paper-defaults";

  res.n_max = ov.n_max ? *ov.n_max : static_cast<std::int64_t>(std::floor(std::pow(x, 1.0 / 24) + 1e-12));
  if (res.n_max < 1) throw DomainError("build_resonator: N must be positive");

  if (ov.big_l) {
    res.big_l = *ov.big_l;
  } else if (ov.window) {
    res.big_l = std::sqrt(static_cast<double>(ov.window->first));
  } else {
    const double ln = std::log(static_cast<double>(res.n_max));
    res.big_l = ln > 1 ? std::sqrt(ln * std::log(ln)) / 8 : 0;
  }
  if (ov.window) {
    res.p_lo = ov.window->first;
    res.p_hi = ov.window->second;
  } else if (res.big_l >= 1) {
    res.p_lo = static_cast<std::int64_t>(std::ceil(res.big_l * res.big_l - 1e-9));
    res.p_hi = static_cast<std::int64_t>(std::floor(std::pow(res.big_l, 4) + 1e-9));
  }
  res.strength = ov.strength.value_or(1.0);
  if (!(res.strength > 0)) throw DomainError("build_resonator: strength must be positive");

  if (res.p_hi >= res.p_lo && res.p_hi >= 2) {
    if (res.p_hi > f1.prec_primes()) throw TableExhausted("build_resonator: window beyond the coefficient table", res.p_hi);
    for (auto p : f1.primes()) {
      if (p < res.p_lo) continue;
      if (p > res.p_hi) break;
      res.primes.push_back(p);
      const double pd = static_cast<double>(p);
      res.r_p.push_back(res.strength * res.big_l / (std::sqrt(pd) * std::log(pd)));
      res.a1_normalized.push_back(normalized_prime_coeff(f1, p));
    }
  }
  if (res.primes.size() > 65535) throw DomainError("build_resonator: window has too many primes");
  for (std::size_t i = 0; i < res.primes.size(); ++i)
    if (res.r_p[i] > 1) {
      res.warnings.push_back("r(p) > 1 for p = " + std::to_string(res.primes[i]));
      break;
    }

  res.support.push_back({1, 1.0, 1.0, {}});
  std::vector<std::uint16_t> factors;
  enumerate_support(res, 0, 1, 1.0, 1.0, factors, res.support);
  std::sort(res.support.begin(), res.support.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  if (res.support.size() == 1) {
    res.degenerate = true;
    res.warnings.push_back("degenerate resonator: support is {1}, so R(D) = 1");
  }
  return res;
}

double resonator_value(const Resonator& res, const FundamentalDiscriminant& d) {
  return static_cast<double>(resonator_at(res, d.value()));
}

double calR(const Resonator& res) {
  long double prod = 1;
  for (std::size_t i = 0; i < res.primes.size(); ++i) {
    const long double t = res.r_p[i] * res.a1_normalized[i];
    prod *= 1 + t * t;
  }
  return static_cast<double>(prod);
}

double predicted_shift(const Resonator& res, const Eigenform& target) {
  if (target.weight() != 2 * res.k) throw DomainError("predicted_shift: weight differs from the resonator's");
  long double sum = 0;
  for (std::size_t i = 0; i < res.primes.size(); ++i) {
    const std::int64_t p = res.primes[i];
    if (p > target.prec_primes()) throw TableExhausted("predicted_shift", p);
    sum += 2.0L * res.r_p[i] * res.a1_normalized[i] * normalized_prime_coeff(target, p) / std::sqrt(static_cast<long double>(p));
  }
  return static_cast<double>(std::exp(sum));
}

std::vector<FundamentalDiscriminant> resonance_family(double x, Parity k_parity) {
  const auto lo = static_cast<std::int64_t>(std::floor(x));
  const auto hi = static_cast<std::int64_t>(std::floor(2 * x));
  if (hi <= lo) return {};
  return enumerate_discriminants(lo, hi, admissible_sign(k_parity), ResidueFilter::one_mod_four);
}

ResonatorStats moments(const Resonator& res, double x, unsigned threads) {
  const auto family = resonance_family(x, parity_of(res.k));
  const auto values = parallel_map<long double>(family.size(), threads,
                                                [&](std::size_t i) { return resonator_at(res, family[i].value()); });
  ResonatorStats st;
  st.calR = calR(res);
  st.count = static_cast<std::int64_t>(family.size());
  for (long double r : values) {
    const long double r2 = r * r;
    st.moment2 += r2;
    st.moment6 += r2 * r2 * r2;
  }
  long double diag = 0;
  for (const auto& t : res.support) {
    long double local = static_cast<long double>(t.weight) * t.weight;
    bool two = false;
    for (auto i : t.factors) {
      const auto p = static_cast<long double>(res.primes[i]);
      local *= p / (p + 1);
      two = two || res.primes[i] == 2;
    }
    if (!two) local *= 2.0L / 3.0L;
    diag += local;
  }
  st.diagonal_main = static_cast<double>(x / (2 * zeta2()) * diag);
  const long double c = static_cast<long double>(st.count);
  st.holder = st.moment2 * st.moment2 * st.moment2 <= c * c * st.moment6;
  return st;
}

CharSum charsum_lemma1(std::int64_t u, double x, Parity k_parity) {
  if (u < 1 || u % 2 == 0) throw DomainError("charsum_lemma1: u must be odd and positive");
  if (static_cast<double>(u) > x) throw DomainError("charsum_lemma1: u must not exceed X");
  CharSum out{u, 0, 0};
  for (const auto& d : resonance_family(x, k_parity)) out.brute += kronecker_symbol(d.value(), u);
  if (is_perfect_square(u)) {
    double prod = 2.0 / 3.0;
    for (auto p : prime_divisors(u)) prod *= static_cast<double>(p) / static_cast<double>(p + 1);
    out.main_term = x / (2 * zeta2()) * prod;
  }
  return out;
}

SmoothWindow::SmoothWindow(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
  if (!(a < b && b <= c && c < d)) throw DomainError("SmoothWindow: need support_lo < plateau_lo <= plateau_hi < support_hi");
}

SmoothWindow SmoothWindow::narrow() { return SmoothWindow(1.0, 1.1, 1.9, 2.0); }
SmoothWindow SmoothWindow::wide() { return SmoothWindow(0.5, 1.0, 2.0, 2.5); }

namespace {

double psi(double s) { return s > 0 ? std::exp(-1 / s) : 0.0; }
double smooth_step(double s) {
  if (s <= 0) return 0;
  if (s >= 1) return 1;
  const double a = psi(s), b = psi(1 - s);
  return a / (a + b);
}

double simpson_step(const std::function<double(double)>& fn, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(fn, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(fn, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

double SmoothWindow::operator()(double t) const {
  if (t <= a_ || t >= d_) return 0;
  if (t < b_) return smooth_step((t - a_) / (b_ - a_));
  if (t > c_) return smooth_step((d_ - t) / (d_ - c_));
  return 1;
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double tolerance) {
  const double fa = fn(a), fb = fn(b), fm = fn((a + b) / 2);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_step(fn, a, b, fa, fm, fb, whole, tolerance, 50);
}

double SmoothWindow::integral(double tolerance) const {
  const auto fn = [this](double t) { return (*this)(t); };
  // the pieces are smooth, so split at the plateau edges
  return adaptive_simpson(fn, a_, b_, tolerance / 3) + (c_ - b_) + adaptive_simpson(fn, c_, d_, tolerance / 3);
}

std::int64_t twist_table_limit(int k, std::int64_t d_max, int bits) { return central_truncation(k, d_max, bits); }

template <class Scalar>
LSums weighted_lsum(const Resonator& res, double x, const TwistEvaluator<Scalar>& lvalues, const SmoothWindow& window,
                    int bits, unsigned threads) {
  if (lvalues.k() != res.k) throw DomainError("weighted_lsum: evaluator weight differs from the resonator's");
  const auto lo = static_cast<std::int64_t>(std::floor(window.support_lo() * x));
  const auto hi = static_cast<std::int64_t>(std::ceil(window.support_hi() * x));
  const auto ds = enumerate_discriminants(lo, hi, admissible_sign(parity_of(res.k)), ResidueFilter::one_mod_four);
  struct Row {
    long double l = 0, tail = 0, r2 = 0, phi = 0;
  };
  const auto rows = parallel_map<Row>(ds.size(), threads, [&](std::size_t i) {
    Row row;
    row.phi = window(static_cast<double>(ds[i].abs()) / x);
    if (row.phi == 0) return row;
    const auto l = lvalues.central(ds[i], bits);
    row.l = static_cast<long double>(l.value);
    row.tail = static_cast<long double>(l.tail_bound);
    const long double r = resonator_at(res, ds[i].value());
    row.r2 = r * r;
    return row;
  }, 256);
  LSums out;
  for (const Row& row : rows) {
    if (row.phi == 0) continue;
    ++out.count;
    out.weighted += row.l * row.r2 * row.phi;
    out.weight_total += row.r2 * row.phi;
    out.plain += row.l * row.phi;
    out.plain_total += row.phi;
    out.max_tail = std::max(out.max_tail, static_cast<double>(row.tail));
    if (row.l < -row.tail) ++out.negative;
  }
  return out;
}

namespace {

template <class Scalar>
WaldspurgerFit fit_with(const PlusForm& g, const Eigenform& f, std::span<const FundamentalDiscriminant> ds, int bits) {
  WaldspurgerFit fit;
  fit.label = f.label();
  if (ds.empty()) return fit;
  std::int64_t d_max = 0;
  for (const auto& d : ds) d_max = std::max(d_max, d.abs());
  if (d_max >= g.prec()) throw TableExhausted("waldspurger_fit: c(|D|) beyond the stored series", d_max);
  const TwistEvaluator<Scalar> ev(f, twist_table_limit(f.k(), d_max, bits));
  Real128 lo = 0, hi = 0, sum = 0;
  std::size_t used = 0;
  const Real128 expo = Real128(f.k()) - Real128(0.5);
  for (const auto& d : ds) {
    WaldspurgerSample s;
    s.d = d.value();
    s.c = g.coeff<Real128>(d.abs());
    const auto l = ev.central(d, bits);
    s.lvalue = scalar_cast<Real128>(l.value);
    s.tail_bound = scalar_cast<Real128>(l.tail_bound);
    if (s.c == 0) {
      s.ratio = 0;
      if (abs(s.lvalue) > s.tail_bound) fit.zero_mismatches.push_back(s.d);
    } else {
      s.ratio = s.c * s.c / (pow(Real128(d.abs()), expo) * s.lvalue);
      if (used == 0) lo = hi = s.ratio;
      lo = std::min(lo, s.ratio);
      hi = std::max(hi, s.ratio);
      sum += s.ratio;
      ++used;
    }
    fit.samples.push_back(s);
  }
  if (used > 0) {
    fit.constant = sum / Real128(used);
    fit.spread = static_cast<double>((hi - lo) / abs(fit.constant));
  }
  return fit;
}

template <class Scalar>
SearchReport search_with(const Resonator& res, double x, std::span<const Eigenform> basis, const SearchOptions& opt,
                         std::span<const WaldspurgerFit> fits, std::span<const double> lambda) {
  SearchReport rep;
  rep.threshold = theorem2_threshold(x);
  const auto family = resonance_family(x, parity_of(res.k));
  rep.family_size = static_cast<std::int64_t>(family.size());
  if (family.empty() || basis.empty()) return rep;

  const auto r2 = parallel_map<double>(family.size(), opt.threads, [&](std::size_t i) {
    const double r = static_cast<double>(resonator_at(res, family[i].value()));
    return r * r;
  });
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r2[a] > r2[b]; });
  std::size_t top = opt.top_count != 0
                        ? opt.top_count
                        : static_cast<std::size_t>(std::ceil(opt.top_fraction * static_cast<double>(family.size())));
  top = std::clamp<std::size_t>(top, 1, family.size());

  const std::int64_t limit = twist_table_limit(res.k, family.back().abs(), opt.bits);
  std::vector<TwistEvaluator<Scalar>> evs;
  for (const auto& f : basis) {
    if (f.weight() != 2 * res.k) throw DomainError("search_large: eigenform weight differs from the resonator's");
    evs.emplace_back(f, limit);
  }
  const std::size_t r = basis.size();
  auto values_at = [&](const FundamentalDiscriminant& d) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& ev : evs) {
      const auto l = ev.central(d, opt.bits);
      out.first.push_back(static_cast<double>(l.value));
      out.second.push_back(static_cast<double>(l.tail_bound));
    }
    return out;
  };

  const auto top_values = parallel_map<std::pair<std::vector<double>, std::vector<double>>>(
      top, opt.threads, [&](std::size_t i) { return values_at(family[order[i]]); }, 16);
  rep.top_mean.assign(r, 0.0);
  const bool lower = fits.size() == r;
  const double expo = res.k - 0.5;
  for (std::size_t i = 0; i < top; ++i) {
    const auto& d = family[order[i]];
    SearchEntry e{d.value(), r2[order[i]], top_values[i].first, top_values[i].second, false, std::nullopt};
    double others = 0;
    for (std::size_t nu = 1; nu < r; ++nu) others += e.lvalues[nu];
    e.condition = e.lvalues[0] > opt.a * others + rep.threshold;
    if (lower) {
      const double scale = std::pow(static_cast<double>(d.abs()), expo);
      double bound = std::sqrt(std::max(0.0, static_cast<double>(fits[0].constant) * scale * e.lvalues[0]));
      for (std::size_t nu = 1; nu < r; ++nu) {
        const double lam = nu < lambda.size() ? std::abs(lambda[nu]) : 1.0;
        bound -= lam * std::sqrt(std::max(0.0, static_cast<double>(fits[nu].constant) * scale * e.lvalues[nu]));
      }
      e.c_lower = bound;
    }
    for (std::size_t nu = 0; nu < r; ++nu) rep.top_mean[nu] += e.lvalues[nu] / static_cast<double>(top);
    if (e.condition) ++rep.condition_count;
    if (!rep.best || e.lvalues[0] > rep.top[*rep.best].lvalues[0]) rep.best = rep.top.size();
    rep.top.push_back(std::move(e));
  }

  std::vector<std::size_t> sample;
  if (opt.sample == 0 || opt.sample >= family.size()) {
    sample.resize(family.size());
    std::iota(sample.begin(), sample.end(), std::size_t(0));
  } else {
    for (std::size_t i = 0; i < opt.sample; ++i) sample.push_back(i * family.size() / opt.sample);
  }
  rep.sample_size = sample.size();
  const auto sample_values = parallel_map<std::pair<std::vector<double>, std::vector<double>>>(
      sample.size(), opt.threads, [&](std::size_t i) { return values_at(family[sample[i]]); }, 16);
  rep.global_mean.assign(r, 0.0);
  for (const auto& v : sample_values)
    for (std::size_t nu = 0; nu < r; ++nu) rep.global_mean[nu] += v.first[nu] / static_cast<double>(sample.size());
  return rep;
}

}  // namespace

WaldspurgerFit waldspurger_fit(const PlusForm& g, const Eigenform& f, std::span<const FundamentalDiscriminant> ds,
                               int bits) {
  if (g.k() != f.k()) throw DomainError("waldspurger_fit: weights do not match");
  if (bits <= 53) return fit_with<double>(g, f, ds, bits);
  if (bits <= 128) return fit_with<Real128>(g, f, ds, bits);
  throw DomainError("waldspurger_fit: at most 128 bits are supported");
}

double theorem2_threshold(double x) {
  const double l = std::log(x);
  return std::exp(std::sqrt(l / std::log(l)) / 40);
}

SearchReport search_large(const Resonator& res, double x, std::span<const Eigenform> basis, const SearchOptions& options,
                          std::span<const WaldspurgerFit> fits, std::span<const double> lambda) {
  if (options.bits <= 53) return search_with<double>(res, x, basis, options, fits, lambda);
  if (options.bits <= 128) return search_with<Real128>(res, x, basis, options, fits, lambda);
  throw DomainError("search_large: at most 128 bits are supported");
}

template LSums weighted_lsum<double>(const Resonator&, double, const TwistEvaluator<double>&, const SmoothWindow&, int,
                                     unsigned);
template LSums weighted_lsum<Real128>(const Resonator&, double, const TwistEvaluator<Real128>&, const SmoothWindow&, int,
                                      unsigned);

}  // namespace mfres
