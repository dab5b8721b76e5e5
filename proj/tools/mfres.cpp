// mfres: build coefficient caches, evaluate L-values and Dirichlet series,
// run resonance experiments and verification suites. Reports are JSON.

#include "mfres/arith.hpp"
#include "mfres/cache.hpp"
#include "mfres/dseries.hpp"
#include "mfres/errors.hpp"
#include "mfres/halfint.hpp"
#include "mfres/lfun.hpp"
#include "mfres/modforms.hpp"
#include "mfres/parallel.hpp"
#include "mfres/resonance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace mfres;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kEnvironment = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckFailed : public std::runtime_error {
 public:
  CheckFailed(const std::string& what, ordered_json report) : std::runtime_error(what), report(std::move(report)) {}
  ordered_json report;
};

struct Common {
  int bits = 128;
  std::string out;
  std::string cache;
  unsigned threads = 0;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw CacheError("cannot write " + c.out);
  f << text;
}

void emit(const Common& c, const ordered_json& j) { emit(c, j.dump(2) + "\n"); }

void require_bits(int bits) {
  if (bits < 8 || bits > 128) throw UsageError("--bits must lie in [8, 128] (53 or less runs in double precision)");
}

void require_k(int k) {
  if (k < 6) throw UsageError("--k must be at least 6 (the plus space is zero for smaller k)");
}

CacheManifest open_cache(const Common& c) {
  return CacheManifest(resolve_cache_root(c.cache.empty() ? std::nullopt : std::optional<std::string>(c.cache)));
}

template <class S>
ordered_json lvalue_json(const LValue<S>& l) {
  return {{"value", to_decimal(l.value)},
          {"tail_bound", to_decimal(l.tail_bound)},
          {"truncation", l.truncation},
          {"bits", l.bits},
          {"degraded", l.degraded}};
}

std::pair<std::int64_t, std::int64_t> parse_window(const std::string& w) {
  const auto colon = w.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects lo:hi");
  try {
    return {std::stoll(w.substr(0, colon)), std::stoll(w.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--window expects integers lo:hi");
  }
}

// eigenforms whose prime tables reach the central-value truncation at |D| <= d_max
std::vector<Eigenform> forms_for_twists(CacheManifest& cache, int k, std::int64_t d_max, int bits) {
  const std::int64_t need = std::max<std::int64_t>(twist_table_limit(k, d_max, bits), 1000);
  return cached_eigenforms(cache, 2 * k, need);
}

// ---------------------------------------------------------------- forms / plus

ordered_json forms_build(const Common& c, int weight, std::int64_t prec) {
  if (weight < 12 || weight % 2 != 0) throw UsageError("--weight must be even and at least 12");
  if (prec < 2) throw UsageError("--prec must be at least 2");
  auto cache = open_cache(c);
  bool computed = false;
  const auto forms = cached_eigenforms(cache, weight, prec, &computed);
  ordered_json j{{"command", "forms build"}, {"weight", weight}, {"prec_primes", prec}, {"computed", computed},
                 {"cache", cache.root().string()}};
  j["forms"] = ordered_json::array();
  for (const auto& f : forms)
    j["forms"].push_back({{"label", f.label()},
                          {"exact", f.is_exact()},
                          {"a2", f.is_exact() ? f.exact_prime_coeff(2).get_str() : to_decimal(f.prime_coeff(2))}});
  return j;
}

PlusEigenbasis load_eigenbasis(CacheManifest& cache, int k, std::int64_t prec) {
  const PlusSpace space = cached_plus_space(cache, k, prec);
  const auto forms = cached_eigenforms(cache, 2 * k, std::max<std::int64_t>(prec, 2000));
  return plus_eigenbasis(space, forms);
}

ordered_json plus_build(const Common& c, int k, std::int64_t prec) {
  require_k(k);
  if (prec < 16) throw UsageError("--prec must be at least 16");
  auto cache = open_cache(c);
  bool computed = false;
  const PlusSpace space = cached_plus_space(cache, k, prec, &computed);
  ordered_json j{{"command", "plus build"}, {"k", k}, {"prec", prec}, {"computed", computed},
                 {"dimension", space.basis.size()}, {"expected_dimension", cusp_form_dimension(2 * k)}};
  j["pivots"] = space.pivots;
  return j;
}

// ---------------------------------------------------------------- lvalue

template <class S>
LValue<S> central_with(const TwistEvaluator<S>& ev, const FundamentalDiscriminant& d, int bits) {
  return ev.central(d, bits);
}

ordered_json lvalue_single(const Common& c, int k, std::int64_t dv, int label) {
  require_k(k);
  require_bits(c.bits);
  FundamentalDiscriminant d(dv);
  auto cache = open_cache(c);
  const auto forms = forms_for_twists(cache, k, d.abs(), c.bits);
  if (label < 1 || label > static_cast<int>(forms.size())) throw UsageError("--form outside 1.." + std::to_string(forms.size()));
  const auto& f = forms[static_cast<std::size_t>(label - 1)];
  ordered_json j{{"command", "lvalue"}, {"k", k}, {"D", dv}, {"form", label}, {"bits", c.bits}};
  if (c.bits <= 53) {
    const auto l = central_lvalue<double>(f, d, c.bits);
    j["L"] = to_decimal(l.value);
    j["tail_bound"] = to_decimal(l.tail_bound);
    j["T"] = l.truncation;
  } else {
    const auto l = central_lvalue<Real128>(f, d, c.bits);
    j["L"] = to_decimal(l.value);
    j["tail_bound"] = to_decimal(l.tail_bound);
    j["T"] = l.truncation;
  }
  return j;
}

template <class S>
std::string lvalue_batch_csv(const Eigenform& f, std::int64_t lo, std::int64_t hi, int bits, unsigned threads) {
  const int k = f.k();
  std::vector<FundamentalDiscriminant> ds;
  for (auto sign : {DiscriminantSign::negative, DiscriminantSign::positive})
    for (const auto& d : enumerate_discriminants(lo, hi, sign, ResidueFilter::all)) ds.push_back(d);
  std::sort(ds.begin(), ds.end(), [](const auto& a, const auto& b) {
    return a.abs() != b.abs() ? a.abs() < b.abs() : a.value() < b.value();
  });
  const TwistEvaluator<S> ev(f, twist_table_limit(k, hi, bits));
  const auto rows = parallel_map<std::string>(ds.size(), threads, [&](std::size_t i) {
    const auto& d = ds[i];
    const int parity = (k % 2 == 0 ? 1 : -1) * d.chi(-1);
    const auto l = ev.central(d, bits);
    return std::to_string(d.value()) + "," + std::to_string(parity) + "," + to_decimal(l.value) + "," +
           to_decimal(l.tail_bound) + "," + std::to_string(l.truncation) + "\n";
  }, 64);
  std::string out = "D,parity,L,tail_bound,T\n";
  for (const auto& r : rows) out += r;
  return out;
}

std::string lvalue_batch(const Common& c, int k, std::int64_t lo, std::int64_t hi, int label) {
  require_k(k);
  require_bits(c.bits);
  if (lo < 0 || hi <= lo) throw UsageError("need 0 <= --dmin < --dmax");
  auto cache = open_cache(c);
  const auto forms = forms_for_twists(cache, k, hi, c.bits);
  if (label < 1 || label > static_cast<int>(forms.size())) throw UsageError("--form outside 1.." + std::to_string(forms.size()));
  const auto& f = forms[static_cast<std::size_t>(label - 1)];
  return c.bits <= 53 ? lvalue_batch_csv<double>(f, lo, hi, c.bits, c.threads)
                      : lvalue_batch_csv<Real128>(f, lo, hi, c.bits, c.threads);
}

// ---------------------------------------------------------------- charsum

ordered_json charsum_json(std::int64_t u, double x, int k) {
  const auto cs = charsum_lemma1(u, x, parity_of(k));
  ordered_json j{{"u", u}, {"X", x}, {"brute", cs.brute}, {"main", cs.main_term}};
  if (is_perfect_square(u)) {
    const double rel = std::abs(static_cast<double>(cs.brute) - cs.main_term) / cs.main_term;
    j["relative_error"] = rel;
    j["criterion"] = "relative error < 0.02";
    j["passed"] = rel < 0.02;
  } else {
    j["bound"] = std::pow(x, 0.7);
    j["criterion"] = "|brute| < X^0.7";
    j["passed"] = std::abs(static_cast<double>(cs.brute)) < std::pow(x, 0.7);
  }
  return j;
}

// ---------------------------------------------------------------- dseries

template <class S>
ordered_json dseries_run(CacheManifest& cache, int k, double s, std::int64_t n_terms, std::int64_t d_max, int bits) {
  const std::int64_t prec = std::max(n_terms, d_max) + 1;
  const PlusEigenbasis basis = load_eigenbasis(cache, k, prec);
  // g = sum of the eigenforms
  PlusForm g = basis.forms.front();
  if (basis.forms.size() > 1) {
    std::vector<Real128> v(static_cast<std::size_t>(prec), Real128(0));
    for (const auto& f : basis.forms) {
      const auto dense = f.dense<Real128>(prec);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += dense[i];
    }
    g = PlusForm(k, prec, std::move(v));
  }
  const auto lambda = eigen_coordinates(basis, g);
  DgEvaluation<S> e{S(s), dg_via_coeffs<S>(g, S(s), n_terms), dg_via_twists<S>(g, S(s), d_max, bits),
                    dg_via_quotients<S>(basis, lambda, S(s))};
  ordered_json j{{"command", "dseries"}, {"k", k}, {"s", s}, {"n_terms", n_terms}, {"d_max", d_max}, {"bits", bits},
                 {"dimension", basis.forms.size()}};
  j["via_coeffs"] = lvalue_json(e.via_coeffs);
  j["via_twists"] = lvalue_json(e.via_twists);
  j["via_quotients"] = lvalue_json(e.via_quotients);
  using std::abs;
  j["diff_coeffs_twists"] = to_decimal(S(abs(e.via_coeffs.value - e.via_twists.value)));
  j["diff_coeffs_quotients"] = to_decimal(S(abs(e.via_coeffs.value - e.via_quotients.value)));
  j["passed"] = triple_agreement(e);
  return j;
}

ordered_json dseries_json(const Common& c, int k, double s, std::int64_t n_terms, std::int64_t d_max) {
  require_k(k);
  require_bits(c.bits);
  auto cache = open_cache(c);
  return c.bits <= 53 ? dseries_run<double>(cache, k, s, n_terms, d_max, c.bits)
                      : dseries_run<Real128>(cache, k, s, n_terms, d_max, c.bits);
}

// ---------------------------------------------------------------- resonate

struct ResonateArgs {
  int k = 6;
  double x = 1e6;
  std::string window;
  std::int64_t nmax = 0;
  double big_l = 0;
  double strength = 0;
  std::size_t top = 0;
  double top_fraction = 0.01;
  std::size_t sample = 200;
  bool lvalues = false;
  bool observe = false;
  bool waldspurger = false;
  bool csv = false;
  int f1 = 1;
  double a = 1;
  std::vector<std::int64_t> lemma1;
};

ordered_json resonate_json(const Common& c, const ResonateArgs& a) {
  require_k(a.k);
  require_bits(c.bits);
  if (!(a.x >= 16)) throw UsageError("--x must be at least 16");
  auto cache = open_cache(c);
  ResonatorOverrides ov;
  if (!a.window.empty()) ov.window = parse_window(a.window);
  if (a.nmax > 0) ov.n_max = a.nmax;
  if (a.big_l > 0) ov.big_l = a.big_l;
  if (a.strength > 0) ov.strength = a.strength;

  const bool need_l = a.lvalues || a.observe;
  const std::int64_t window_hi = ov.window ? ov.window->second : 1000;
  std::int64_t prec = std::max<std::int64_t>(window_hi, 1000);
  if (need_l) prec = std::max(prec, twist_table_limit(a.k, static_cast<std::int64_t>(std::ceil(2.5 * a.x)), c.bits));
  auto forms = cached_eigenforms(cache, 2 * a.k, prec);
  if (a.f1 < 1 || a.f1 > static_cast<int>(forms.size())) throw UsageError("--f1 outside 1.." + std::to_string(forms.size()));
  // the designated f_1 goes first
  std::rotate(forms.begin(), forms.begin() + (a.f1 - 1), forms.begin() + a.f1);
  const Resonator res = build_resonator(a.x, forms.front(), ov);
  const auto st = moments(res, a.x, c.threads);

  ordered_json j;
  j["params"] = {{"X", a.x},
                 {"k", a.k},
                 {"N", res.n_max},
                 {"L", res.big_l},
                 {"window", {res.p_lo, res.p_hi}},
                 {"strength", res.strength},
                 {"regime", res.regime},
                 {"support", res.support.size()},
                 {"f1", a.f1},
                 {"bits", c.bits}};
  j["warnings"] = res.warnings;
  j["calR"] = st.calR;
  j["moment2"] = static_cast<double>(st.moment2);
  j["moment6"] = static_cast<double>(st.moment6);
  j["count"] = st.count;
  j["diagonal_main"] = st.diagonal_main;
  j["holder"] = st.holder;
  ordered_json predicted = ordered_json::array(), observed = ordered_json::array();
  for (const auto& f : forms) predicted.push_back(predicted_shift(res, f));
  if (a.observe) {
    const auto window = SmoothWindow::narrow();
    const std::int64_t limit = twist_table_limit(a.k, static_cast<std::int64_t>(std::ceil(2 * a.x)), c.bits);
    for (const auto& f : forms) {
      if (c.bits <= 53) {
        const TwistEvaluator<double> ev(f, limit);
        observed.push_back(weighted_lsum<double>(res, a.x, ev, window, c.bits, c.threads).observed_shift());
      } else {
        const TwistEvaluator<Real128> ev(f, limit);
        observed.push_back(weighted_lsum<Real128>(res, a.x, ev, window, c.bits, c.threads).observed_shift());
      }
    }
  }
  j["shift"] = {{"predicted", predicted}, {"observed", a.observe ? observed : ordered_json(nullptr)}};

  j["top"] = ordered_json::array();
  if (a.lvalues) {
    SearchOptions opt;
    opt.a = a.a;
    opt.top_fraction = a.top_fraction;
    opt.top_count = a.top;
    opt.sample = a.sample;
    opt.bits = c.bits;
    opt.threads = c.threads;
    std::vector<WaldspurgerFit> fits;
    std::vector<double> lambda;
    if (a.waldspurger) {
      const PlusEigenbasis basis = load_eigenbasis(cache, a.k, 4000);
      std::vector<PlusForm> gs;
      for (const auto& f : forms)
        for (std::size_t nu = 0; nu < basis.lifts.size(); ++nu)
          if (basis.lifts[nu].label() == f.label()) gs.push_back(basis.forms[nu]);
      for (std::size_t nu = 0; nu < forms.size(); ++nu) {
        std::vector<FundamentalDiscriminant> ds;
        for (const auto& d : first_admissible_discriminants(parity_of(a.k), 400))
          if (gs[nu].coeff<Real128>(d.abs()) != 0 && ds.size() < 20) ds.push_back(d);
        std::int64_t d_max = 0;
        for (const auto& d : ds) d_max = std::max(d_max, d.abs());
        const auto wide = forms_for_twists(cache, a.k, d_max, c.bits);
        fits.push_back(waldspurger_fit(gs[nu], wide[static_cast<std::size_t>(forms[nu].label() - 1)], ds, c.bits));
      }
      lambda.assign(forms.size(), 1.0);
    }
    const auto rep = search_large(res, a.x, forms, opt, fits, lambda);
    for (const auto& e : rep.top)
      j["top"].push_back({{"D", e.d}, {"R2", e.r2}, {"L", e.lvalues}, {"tail_bound", e.tail_bounds},
                          {"condition", e.condition},
                          {"waldspurger_c_lower", e.c_lower ? ordered_json(*e.c_lower) : ordered_json()}});
    j["search"] = {{"family_size", rep.family_size}, {"sample_size", rep.sample_size}, {"top_mean", rep.top_mean},
                   {"global_mean", rep.global_mean}, {"condition_count", rep.condition_count},
                   {"threshold", rep.threshold}, {"best_D", rep.best ? ordered_json(rep.top[*rep.best].d) : ordered_json()}};
  } else {
    // rank by R(D)^2 only
    const auto family = resonance_family(a.x, parity_of(a.k));
    std::vector<std::pair<double, std::int64_t>> ranked;
    for (const auto& d : family) {
      const double r = resonator_value(res, d);
      ranked.emplace_back(r * r, d.value());
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    std::size_t top = a.top != 0 ? a.top : static_cast<std::size_t>(std::ceil(a.top_fraction * static_cast<double>(ranked.size())));
    top = std::min(top, ranked.size());
    for (std::size_t i = 0; i < top; ++i)
      j["top"].push_back({{"D", ranked[i].second}, {"R2", ranked[i].first}, {"L", nullptr}, {"waldspurger_c_lower", nullptr}});
  }
  j["lemma1"] = ordered_json::array();
  for (auto u : a.lemma1) j["lemma1"].push_back(charsum_json(u, a.x, a.k));
  return j;
}

std::string resonate_csv(const ordered_json& j) {
  std::ostringstream out;
  out << "D,R2,L,waldspurger_c_lower\n";
  for (const auto& row : j["top"]) {
    out << row["D"].dump() << "," << row["R2"].dump() << ",";
    if (row["L"].is_array()) {
      std::string sep;
      for (const auto& l : row["L"]) out << sep << l.dump(), sep = ";";
    }
    out << "," << (row["waldspurger_c_lower"].is_null() ? "" : row["waldspurger_c_lower"].dump()) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------- verify

struct Verifier {
  ordered_json checks = ordered_json::array();
  std::string first_failure;

  void record(const std::string& name, bool passed, ordered_json detail) {
    detail["name"] = name;
    detail["passed"] = passed;
    if (!passed && first_failure.empty()) first_failure = name;
    checks.push_back(std::move(detail));
  }
};

std::vector<FundamentalDiscriminant> admissible_with_4(int k, std::size_t count) {
  std::vector<FundamentalDiscriminant> out;
  for (const auto& d : first_admissible_discriminants(parity_of(k), 200))
    if (d.abs() % 4 == 0 && out.size() < count) out.push_back(d);
  return out;
}

void verify_plus(Verifier& v, CacheManifest& cache, int k) {
  const std::int64_t prec = 2000;
  const PlusEigenbasis basis = load_eigenbasis(cache, k, prec);
  const int dim = cusp_form_dimension(2 * k);
  v.record("plus.dimension", static_cast<int>(basis.forms.size()) == dim,
           {{"dimension", basis.forms.size()}, {"expected", dim}});
  for (std::size_t nu = 0; nu < basis.forms.size(); ++nu) {
    const auto ds = first_admissible_discriminants(parity_of(k), 5);
    for (const auto& d : ds) {
      std::int64_t n_max = 1;
      while ((n_max + 1) * (n_max + 1) * d.abs() < prec) ++n_max;
      const auto rep = shimura_check(basis.forms[nu], basis.lifts[nu], d, n_max);
      v.record("plus.shimura", rep.passed,
               {{"form", nu + 1}, {"D", d.value()}, {"n_max", n_max}, {"exact", rep.exact}, {"max_deviation", rep.max_deviation}});
    }
  }
}

void verify_waldspurger(Verifier& v, CacheManifest& cache, int k, int bits) {
  const PlusEigenbasis basis = load_eigenbasis(cache, k, 4000);
  for (std::size_t nu = 0; nu < basis.forms.size(); ++nu) {
    std::vector<FundamentalDiscriminant> ds;
    for (const auto& d : first_admissible_discriminants(parity_of(k), 400))
      if (basis.forms[nu].coeff<Real128>(d.abs()) != 0 && ds.size() < 20) ds.push_back(d);
    std::int64_t d_max = 0;
    for (const auto& d : ds) d_max = std::max(d_max, d.abs());
    const auto forms = forms_for_twists(cache, k, d_max, bits);
    const auto fit = waldspurger_fit(basis.forms[nu], forms[nu], ds, bits);
    v.record("waldspurger.spread", fit.spread < 1e-6,
             {{"form", nu + 1}, {"constant", to_decimal(fit.constant)}, {"spread", fit.spread}, {"samples", fit.samples.size()}});
  }
}

void verify_dseries(Verifier& v, CacheManifest& cache, int k, int bits) {
  const double s = k / 2.0 + 3;
  auto triple = bits <= 53 ? dseries_run<double>(cache, k, s, 100000, 10000, bits)
                           : dseries_run<Real128>(cache, k, s, 100000, 10000, bits);
  v.record("dseries.triple_agreement", triple["passed"].get<bool>(), triple);

  std::mt19937_64 rng(20240601u + static_cast<unsigned>(k));
  std::uniform_real_distribution<double> dist(-k + 0.5, 2.0 * k);
  double worst = 0;
  for (int i = 0; i < 100;) {
    const Real128 x(dist(rng));
    try {
      const auto g = gamma_factor<Real128>(x, k);
      worst = std::max(worst, static_cast<double>(abs((g.form_a - g.form_b) / g.form_b)));
      ++i;
    } catch (const DomainError&) {
    }
  }
  v.record("dseries.gamma_identity", worst < 1e-20, {{"k", k}, {"max_relative_difference", worst}});

  const double limit_gap = std::abs(rational_R<double>(1e4, k) - rational_R_limit(k));
  v.record("dseries.R_limit", limit_gap < 1e-3, {{"k", k}, {"gap_at_1e4", limit_gap}});

  const PlusEigenbasis basis = load_eigenbasis(cache, k, 4000);
  for (const auto& g : basis.forms)
    for (auto z : {std::complex<Real128>(0, 0.5), std::complex<Real128>(0.1, 0.6)}) {
      const auto w = w4_u4_check(g, z, 1e-10);
      v.record("dseries.u4w4", w.passed, {{"z", {static_cast<double>(z.real()), static_cast<double>(z.imag())}},
                                          {"deviation", w.deviation}});
    }
  for (const auto& d : admissible_with_4(k, 2))
    for (std::int64_t p : {3, 5, 7}) {
      if (d.abs() * p * p >= 4000) continue;
      for (const auto& row : coefficient_identity_check(basis, d, p))
        v.record("dseries.coefficient_identity", row.passed,
                 {{"D", d.value()}, {"p", p}, {"form", row.label}, {"exact", row.exact}, {"deviation", row.deviation}});
    }
}

void verify_resonance(Verifier& v, CacheManifest& cache, int k, double x) {
  const auto forms = cached_eigenforms(cache, 2 * k, 1000);
  ResonatorOverrides ov;
  ov.window = std::make_pair(std::int64_t(11), std::int64_t(53));
  ov.n_max = 1000;
  const Resonator res = build_resonator(x, forms.front(), ov);
  const auto st = moments(res, x);
  const double ratio = static_cast<double>(st.moment2) / st.diagonal_main;
  v.record("resonance.diagonal", std::abs(ratio - 1) < 0.1,
           {{"X", x}, {"moment2", static_cast<double>(st.moment2)}, {"diagonal_main", st.diagonal_main}, {"ratio", ratio}});
  v.record("resonance.holder", st.holder,
           {{"moment2", static_cast<double>(st.moment2)}, {"moment6", static_cast<double>(st.moment6)}, {"count", st.count}});
}

void verify_charsum(Verifier& v, const std::vector<std::int64_t>& us, double x, int k) {
  for (auto u : us) {
    auto j = charsum_json(u, x, k);
    const bool passed = j["passed"].get<bool>();
    v.record("charsum.lemma1", passed, j);
  }
}

ordered_json verify_json(const Common& c, const std::string& suite, int k, std::int64_t u, double x) {
  require_bits(c.bits);
  require_k(k);
  auto cache = open_cache(c);
  Verifier v;
  const bool all = suite == "all";
  if (all || suite == "plus") verify_plus(v, cache, k);
  if (all || suite == "waldspurger") verify_waldspurger(v, cache, k, c.bits);
  if (all || suite == "dseries") verify_dseries(v, cache, k, c.bits);
  if (all || suite == "resonance") verify_resonance(v, cache, k, x);
  if (all || suite == "charsum") verify_charsum(v, u > 0 ? std::vector<std::int64_t>{u} : std::vector<std::int64_t>{1, 9, 3}, x, k);
  ordered_json j{{"command", "verify"}, {"suite", suite}, {"k", k}, {"bits", c.bits}, {"checks", v.checks}};
  j["passed"] = v.first_failure.empty();
  if (!v.first_failure.empty()) {
    j["first_failure"] = v.first_failure;
    throw CheckFailed("check failed: " + v.first_failure, j);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular forms, twisted L-values and resonance experiments"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--bits", common.bits, "working precision in bits (53 or less: double)")->capture_default_str();
    sub->add_option("--out", common.out, "write the report here instead of stdout");
    sub->add_option("--cache", common.cache, "cache directory (default $MFRES_CACHE or ./cache)");
    sub->add_option("--threads", common.threads, "worker threads, 0 = auto")->capture_default_str();
  };

  std::function<ordered_json()> run_json;
  std::function<std::string()> run_text;

  auto* forms = app.add_subcommand("forms", "integral weight eigenforms");
  forms->require_subcommand(1);
  auto* forms_build_cmd = forms->add_subcommand("build", "compute and cache Hecke eigenforms");
  int weight = 12;
  std::int64_t prec = 100000;
  forms_build_cmd->add_option("--weight", weight, "even weight >= 12")->required();
  forms_build_cmd->add_option("--prec", prec, "largest prime with a stored coefficient")->capture_default_str();
  add_common(forms_build_cmd);
  forms_build_cmd->callback([&] { run_json = [&] { return forms_build(common, weight, prec); }; });

  auto* plus = app.add_subcommand("plus", "Kohnen plus space");
  plus->require_subcommand(1);
  auto* plus_build_cmd = plus->add_subcommand("build", "compute and cache a plus-space basis");
  int k = 6;
  std::int64_t plus_prec = 2000;
  plus_build_cmd->add_option("--k", k, "weight k + 1/2")->required();
  plus_build_cmd->add_option("--prec", plus_prec, "series precision")->capture_default_str();
  add_common(plus_build_cmd);
  plus_build_cmd->callback([&] { run_json = [&] { return plus_build(common, k, plus_prec); }; });

  auto* lvalue = app.add_subcommand("lvalue", "central values L(f, chi_D, k)");
  std::int64_t d = 0;
  int label = 1;
  lvalue->add_option("--k", k, "f has weight 2k")->required();
  lvalue->add_option("--D", d, "fundamental discriminant");
  lvalue->add_option("--form", label, "eigenform label (a(2) ascending)")->capture_default_str();
  add_common(lvalue);
  auto* batch = lvalue->add_subcommand("batch", "CSV over all fundamental D with dmin < |D| <= dmax");
  std::int64_t dmin = 0, dmax = 1000;
  batch->add_option("--dmin", dmin)->capture_default_str();
  batch->add_option("--dmax", dmax)->capture_default_str();
  add_common(batch);
  batch->callback([&] { run_text = [&] { return lvalue_batch(common, k, dmin, dmax, label); }; });
  lvalue->callback([&] {
    if (!batch->parsed()) {
      if (d == 0) throw CLI::ValidationError("--D", "required unless using 'lvalue batch'");
      run_json = [&] { return lvalue_single(common, k, d, label); };
    }
  });

  auto* resonate = app.add_subcommand("resonate", "resonator moments, shifts and large values");
  ResonateArgs ra;
  resonate->add_option("--k", ra.k, "f_1 has weight 2k")->required();
  resonate->add_option("--x", ra.x, "discriminant range X < |D| <= 2X")->required();
  resonate->add_option("--window", ra.window, "prime window lo:hi");
  resonate->add_option("--nmax", ra.nmax, "resonator length N");
  resonate->add_option("--L", ra.big_l, "the parameter L");
  resonate->add_option("--strength", ra.strength, "multiplier on r(p)");
  resonate->add_option("--top", ra.top, "number of top discriminants");
  resonate->add_option("--top-fraction", ra.top_fraction)->capture_default_str();
  resonate->add_option("--sample", ra.sample, "discriminants sampled for global means (0 = all)")->capture_default_str();
  resonate->add_option("--A", ra.a, "constant A in L(f_1) > A sum L(f_nu) + threshold")->capture_default_str();
  resonate->add_flag("--lvalues", ra.lvalues, "evaluate central values on the top slice");
  resonate->add_flag("--observe", ra.observe, "measure the weighted/unweighted mean ratios");
  resonate->add_flag("--waldspurger", ra.waldspurger, "lower bounds for |c(|D|)| on the top slice (implies --lvalues)");
  resonate->add_flag("--csv", ra.csv, "one CSV row per top discriminant instead of JSON");
  resonate->add_option("--f1", ra.f1, "label of the eigenform that plays f_1")->capture_default_str();
  resonate->add_option("--lemma1", ra.lemma1, "odd u for character sums")->delimiter(',');
  add_common(resonate);
  resonate->callback([&] {
    if (ra.waldspurger) ra.lvalues = true;
    if (ra.csv) run_text = [&] { return resonate_csv(resonate_json(common, ra)); };
    else run_json = [&] { return resonate_json(common, ra); };
  });

  auto* charsum = app.add_subcommand("charsum", "sum of chi_D(u) over the resonance family");
  std::int64_t u = 1;
  double x = 1e6;
  charsum->add_option("--u", u, "odd u")->required();
  charsum->add_option("--x", x)->capture_default_str();
  charsum->add_option("--k", k, "sign (-1)^k D > 0")->capture_default_str();
  add_common(charsum);
  charsum->callback([&] {
    run_json = [&] {
      if (u < 1 || u % 2 == 0) throw UsageError("--u must be odd and positive");
      auto j = charsum_json(u, x, k);
      j["command"] = "charsum";
      return j;
    };
  });

  auto* dseries = app.add_subcommand("dseries", "three evaluations of D_g(s)");
  double s = 6;
  std::int64_t n_terms = 100000, d_max = 10000;
  dseries->add_option("--k", k)->required();
  dseries->add_option("--s", s)->required();
  dseries->add_option("--nterms", n_terms)->capture_default_str();
  dseries->add_option("--dmax", d_max)->capture_default_str();
  add_common(dseries);
  dseries->callback([&] { run_json = [&] { return dseries_json(common, k, s, n_terms, d_max); }; });

  auto* verify = app.add_subcommand("verify", "run verification suites");
  std::string suite = "all";
  std::int64_t vu = 0;
  double vx = 1e6;
  verify->add_option("--suite", suite)->check(CLI::IsMember({"all", "plus", "waldspurger", "dseries", "resonance", "charsum"}))
      ->capture_default_str();
  verify->add_option("--k", k)->capture_default_str();
  verify->add_option("--u", vu, "odd u for the charsum suite");
  verify->add_option("--x", vx)->capture_default_str();
  add_common(verify);
  verify->callback([&] { run_json = [&] { return verify_json(common, suite, k, vu, vx); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (run_text) emit(common, run_text());
    else if (run_json) emit(common, run_json());
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const CheckFailed& e) {
    emit(common, e.report);
    std::cerr << e.what() << "\n";
    return kCheckFailed;
  } catch (const CacheError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kEnvironment;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
}
