#include "ovc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>

#include "ovc/cohomology.hpp"
#include "ovc/factor.hpp"
#include "ovc/groebner.hpp"
#include "ovc/oracle.hpp"
#include "ovc/run.hpp"
#include "ovc/unipotent.hpp"

namespace ovc::acceptance {

namespace {

const int M = 20;

// Collects failed sub-checks; the first few go into the detail line.
struct Tally {
  size_t checks = 0;
  size_t failures = 0;
  std::vector<std::string> first;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (first.size() < 3) first.push_back(what);
  }
  bool pass() const { return failures == 0 && checks > 0; }
  std::string summary(const std::string& extra = "") const {
    std::string s = std::to_string(checks - failures) + "/" + std::to_string(checks) + " checks";
    if (!extra.empty()) s += "; " + extra;
    for (const auto& f : first) s += "; failed: " + f;
    return s;
  }
};

std::string dims_str(const std::vector<size_t>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

bool zero_at(const RobbaElement& x, long level) {
  for (const auto& [e, c] : x.terms())
    if (!c.is_zero() && c.valuation() < level) return false;
  return true;
}

bool same_matrix(const SeriesMatrix& A, const SeriesMatrix& B, long level) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) return false;
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j)
      if (!zero_at(A(i, j) - B(i, j), level)) return false;
  return true;
}

RobbaElement mono(const RingDescriptor& d, const Exponent& e, const Rational& c) {
  return RobbaElement::monomial(d, e, d.scalar(c));
}

RingDescriptor affine(size_t n, long p, long w = 12) {
  return dagger_ring(n == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"}, w, 1, p, M);
}

DaggerModule rank_one(const RingDescriptor& d, std::vector<RobbaElement> gammas, std::vector<Gauge> gauges) {
  std::vector<SeriesMatrix> G;
  for (auto& g : gammas) G.push_back(SeriesMatrix(1, 1, g.bound() ? g : RobbaElement(d)));
  return DaggerModule{d, G, gauges};
}

// Kummer module x^a in the first variable, trivial in the second.
DaggerModule kummer(const RingDescriptor& d, const Rational& a) {
  std::vector<RobbaElement> g{mono(d, Exponent(d.arity(), 0), a)};
  std::vector<Gauge> gauges{Gauge::Dlog};
  if (d.arity() == 2) {
    g.push_back(RobbaElement(d));
    gauges.push_back(Gauge::Dx);
  }
  return rank_one(d, g, gauges);
}

template <class F>
Criterion timed(int id, const std::string& name, F&& body) {
  Criterion c{id, name, false, "", 0};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("raised ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

// ---- 1 ---------------------------------------------------------------------

Criterion trivial_cohomology() {
  return timed(1, "MW cohomology of A^1 and A^2 with trivial coefficients", [](Criterion& c) {
    const long W = 200;
    auto o1 = oracle::polynomial_de_rham({{oracle::Poly{0}}}, false, W);
    const std::vector<size_t> line{o1.first, o1.second};
    const std::vector<size_t> plane = oracle::kunneth(line, line);
    Tally t;
    t.expect(line == std::vector<size_t>{1, 0}, "oracle A^1");
    double engine = 0;
    for (long p : {3L, 5L})
      for (size_t n : {1u, 2u}) {
        const auto start = std::chrono::steady_clock::now();
        auto h = mw_cohomology(trivial_dagger_module(affine(n, p, W), 1), {W, true});
        engine += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        t.expect(h.dims == (n == 1 ? line : plane), "A^" + std::to_string(n) + " p=" + std::to_string(p));
        t.expect(h.all_reliable(), "reliability A^" + std::to_string(n));
      }
    const bool fast = engine < 5.0;
    c.pass = t.pass() && fast;
    c.detail = t.summary("dims A^1 " + dims_str(line) + ", A^2 " + dims_str(plane) + " at window 200; time budget " +
                         (fast ? "met" : "exceeded"));
  });
}

// ---- 2 ---------------------------------------------------------------------

Criterion compact_supports() {
  return timed(2, "compact supports of A^1 and A^2 are spanned by the class of the dlog volume form", [](Criterion& c) {
    Tally t;
    for (long p : {3L, 5L})
      for (size_t n : {1u, 2u}) {
        auto d = affine(n, p, 16);
        auto m = trivial_dagger_module(d, 1);
        auto h = compact_support_cohomology(m, {n == 1 ? 16L : 8L});
        std::vector<size_t> expect(2 * n + 1, 0);
        expect[2 * n] = 1;
        const std::string tag = "A^" + std::to_string(n) + " p=" + std::to_string(p);
        t.expect(h.dims == expect, tag + " dims " + dims_str(h.dims));
        t.expect(h.all_reliable(), tag + " reliability");
        if (h.generators[2 * n].size() != 1) continue;
        // generator against ∧ dt_i/t_i: a single unit multiple of t^0
        std::vector<size_t> all(n);
        for (size_t i = 0; i < n; ++i) all[i] = i;
        auto dl = to_dlog_basis(m, h.generators[2 * n][0].value);
        bool single = dl.size() == 1 && dl.count(all) && dl.at(all)[0].terms().size() == 1;
        if (single) {
          const auto& [e, coef] = *dl.at(all)[0].terms().begin();
          single = e == Exponent(n, 0) && !coef.is_zero() && coef.valuation() == 0;
        }
        t.expect(single, tag + " generator shape");
        // the volume class pairs to a unit with the constant section of the dual
        FormElement vol{{all, {RobbaElement::monomial(compact_ring(m, -4, 4), Exponent(n, 0), d.scalar(1))}}};
        FormElement one{{{}, {RobbaElement::monomial(d, Exponent(n, 0), d.scalar(1))}}};
        auto pv = residue_pairing(m, from_dlog_basis(m, vol), one);
        auto pg = residue_pairing(m, h.generators[2 * n][0].value, one);
        t.expect(!pv.is_zero() && pv.valuation() == 0, tag + " volume pairing");
        t.expect(!pg.is_zero() && pg.valuation() == 0, tag + " generator pairing");
      }
    c.pass = t.pass();
    c.detail = t.summary();
  });
}

// ---- 3 ---------------------------------------------------------------------

Criterion kummer_robba() {
  return timed(3, "Kummer family over the Robba ring", [](Criterion& c) {
    Tally t;
    const long W = 20;
    struct Case {
      long p;
      Rational a;
      std::vector<size_t> expect;
    };
    for (const Case& k : {Case{3, 0, {1, 1}}, Case{5, 0, {1, 1}}, Case{3, Rational(1, 2), {0, 0}},
                          Case{5, Rational(1, 2), {0, 0}}, Case{5, Rational(-3), {1, 1}}}) {
      auto d = robba_ring("t", -W - 4, W + 4, 1, k.p, M);
      RobbaModule m{d, SeriesMatrix(1, 1, mono(d, {0}, k.a)), std::nullopt};
      auto h = robba_cohomology(m, {W, true});
      auto o = oracle::kummer_laurent(k.a, W);
      const std::string tag = "a=" + k.a.get_str() + " p=" + std::to_string(k.p);
      t.expect(h.dims == std::vector<size_t>{o.first, o.second}, tag + " against the oracle");
      t.expect(h.dims == k.expect, tag + " dims " + dims_str(h.dims));
    }
    c.pass = t.pass();
    c.detail = t.summary("a=0 gives (1,1), a=1/2 gives (0,0)");
  });
}

// ---- 4 ---------------------------------------------------------------------

Criterion adjointness() {
  return timed(4, "residue adjointness on 1000 random windowed pairs", [](Criterion& c) {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<long> co(-9, 9), ex(1, 5), xe(0, 5), gd(0, 2);
    Tally t;
    for (size_t n = 1; n <= 2; ++n)
      for (int batch = 0; batch < 10; ++batch) {
        auto d = affine(n, batch % 2 ? 3 : 5);
        // Γ_v = f_v(x_v)·C: commuting, each in its own variable, hence integrable
        const size_t r = 1 + batch % 2;
        Matrix<Rational> C(r, r, Rational(0));
        for (size_t i = 0; i < r; ++i)
          for (size_t j = 0; j < r; ++j) C(i, j) = co(rng);
        DaggerModule m{d, {}, std::vector<Gauge>(n, Gauge::Dx)};
        for (size_t v = 0; v < n; ++v) {
          RobbaElement f(d);
          Exponent e(n, 0);
          for (int k = 0; k < 2; ++k) {
            e[v] = gd(rng);
            f.add_term(e, d.scalar(co(rng)));
          }
          SeriesMatrix G(r, r);
          for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j) G(i, j) = f.scaled(d.scalar(C(i, j)));
          m.Gamma.push_back(G);
        }
        auto md = dual(m);
        auto tr = compact_ring(m, -20, 20);
        for (int trial = 0; trial < 50; ++trial) {
          const size_t i = rng() % n;
          auto rand_set = [&](size_t k) {
            std::vector<size_t> all(n);
            for (size_t j = 0; j < n; ++j) all[j] = j;
            std::shuffle(all.begin(), all.end(), rng);
            all.resize(k);
            std::sort(all.begin(), all.end());
            return all;
          };
          FormElement v, w;
          for (int k = 0; k < 3; ++k) {
            Exponent a(n), b(n);
            for (size_t j = 0; j < n; ++j) {
              a[j] = ex(rng);
              b[j] = xe(rng);
            }
            const size_t comp = rng() % r;
            v.try_emplace(rand_set(i), ModuleVector(r, RobbaElement(tr))).first->second[comp].add_term(a, tr.scalar(co(rng)));
            w.try_emplace(rand_set(n - i - 1), ModuleVector(r, RobbaElement(d))).first->second[rng() % r].add_term(
                b, d.scalar(co(rng)));
          }
          auto lhs = residue_pairing(m, v, mw_differential(md, w)) + residue_pairing(m, compact_differential(m, v), w);
          t.expect(lhs.is_zero(), "n=" + std::to_string(n) + " batch " + std::to_string(batch));
        }
      }
    c.pass = t.pass();
    c.detail = t.summary("[v, dw] + [dv, w] vanished at precision");
  });
}

// ---- 5 ---------------------------------------------------------------------

Criterion nondegeneracy() {
  return timed(5, "pairing nondegeneracy for the trivial and Kummer modules", [](Criterion& c) {
    Tally t;
    size_t classes = 0;
    for (size_t n : {1u, 2u}) {
      auto d = affine(n, 3);
      const long w = n == 1 ? 12 : 6;
      std::vector<std::pair<std::string, DaggerModule>> mods = {
          {"trivial", trivial_dagger_module(d, 1)},
          {"trivial rank 2", trivial_dagger_module(d, 2)},
          {"kummer 1/2", kummer(d, Rational(1, 2))},
          {"kummer 1/3", kummer(d, Rational(1, 3))}};
      for (const auto& [name, m] : mods)
        for (long i = 0; i <= static_cast<long>(n); ++i) {
          auto r = pairing_nondegeneracy_check(m, i, {w, true});
          classes += r.rank;
          t.expect(r.full_rank() && r.reliable,
                   name + " n=" + std::to_string(n) + " i=" + std::to_string(i));
          t.expect(r.matrix.rows() == r.matrix.cols(), name + " square");
        }
    }
    c.pass = t.pass();
    c.detail = t.summary(std::to_string(classes) + " paired classes");
  });
}

// ---- 6 ---------------------------------------------------------------------

Criterion denominators() {
  return timed(6, "bounddenom exhaustive check", [](Criterion& c) {
    const auto start = std::chrono::steady_clock::now();
    Tally t;
    size_t tight = 0;
    for (long p : {2L, 3L, 5L})
      for (long m = -20; m <= 20; ++m)
        for (long l = 1; l <= 30; ++l)
          for (long e = 1; e <= 4; ++e) {
            auto r = bounddenom(p, m, l, e);
            const long exact = oracle::least_denominator(p, m, l, e);
            const std::string tag = "p=" + std::to_string(p) + " m=" + std::to_string(m) + " l=" + std::to_string(l) +
                                    " e=" + std::to_string(e);
            t.expect(r.exact == exact, tag + " exact");
            t.expect(exact <= r.bound, tag + " bound");
            if (exact == r.bound) ++tight;
          }
    const bool fast = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0;
    c.pass = t.pass() && fast;
    c.detail = t.summary(std::to_string(tight) + " cases meet the bound; time budget " + (fast ? "met" : "exceeded"));
  });
}

// ---- 7 ---------------------------------------------------------------------

RobbaElement random_laurent(std::mt19937_64& rng, const RingDescriptor& d, long span, int count = 2) {
  std::uniform_int_distribution<long> ex(-span, span), co(-9, 9);
  RobbaElement x(d);
  for (int k = 0; k < count; ++k) x.add_term({ex(rng)}, d.scalar(co(rng)));
  return x;
}

RobbaModule strict_upper(std::mt19937_64& rng, const RingDescriptor& d, size_t n) {
  RobbaModule m{d, zero_matrix(d, n, n), std::nullopt};
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) m.N(i, j) = random_laurent(rng, d, 2);
  return m;
}

Criterion horizontal() {
  return timed(7, "horizontal iteration converges", [](Criterion& c) {
    Tally t;
    const long P = 5, W = 24;
    auto d = robba_ring("t", -W, W, 1, P, M);
    RobbaModule m{d, zero_matrix(d, 2, 2), std::nullopt};
    m.N(0, 1) = mono(d, {0}, 1);
    auto u = strongly_unipotent_basis(m, identity_matrix(d, 2));
    std::mt19937_64 rng(707);
    std::uniform_int_distribution<long> co(1, 40);
    auto decaying = [&](size_t n) {
      // v(a_k) + k r >= |k|/2 with r = 1
      ModuleVector w(n, RobbaElement(d));
      for (size_t i = 0; i < n; ++i)
        for (long k = -W / 2; k <= W / 2; ++k) {
          long v = (std::labs(k) + 1) / 2 + (k < 0 ? -k : 0);
          w[i].add_term({k}, PadicApprox::from_parts(co(rng) * P + 1, v, M, P));
        }
      return w;
    };
    auto ex = horizontal_iterate(u, decaying(2), W, true);
    t.expect(ex.nabla.pass, "rank-2 nilpotent example");
    // ∇ f = 0 recomputed from the module matrix
    t.expect(vector_is_zero(apply_D(m, ex.f)), "D f recomputed from N vanishes");
    size_t slopes = 0;
    for (int k = 0; k < 12; ++k) {
      const size_t n = 1 + k % 3;
      auto um = strongly_unipotent_basis(strict_upper(rng, d, n), identity_matrix(d, n));
      auto r = horizontal_iterate(um, decaying(n), W, true);
      t.expect(r.nabla.pass, "instance " + std::to_string(k) + " nabla");
      t.expect(r.slope && *r.slope > 0, "instance " + std::to_string(k) + " slope");
      if (r.slope && *r.slope > 0) ++slopes;
    }
    c.pass = t.pass();
    c.detail = t.summary(std::to_string(slopes) + "/12 positive slopes");
  });
}

// ---- 8 ---------------------------------------------------------------------

Criterion strongly_unipotent() {
  return timed(8, "strongly unipotent bases", [](Criterion& c) {
    Tally t;
    const long P = 5;
    auto d = robba_ring("t", -30, 30, 1, P, M);
    auto gauge_holds = [&](const RobbaModule& m, const UnipotentData& u) {
      // X = U^{-1} N U + U^{-1} t dU/dt, recomputed here
      SeriesMatrix lhs = u.U_inverse * (m.N * u.U + euler_derivative(u.U));
      SeriesMatrix X(u.X.rows(), u.X.cols());
      for (size_t i = 0; i < X.rows(); ++i)
        for (size_t j = 0; j < X.cols(); ++j) X(i, j) = RobbaElement::constant(d, u.X(i, j));
      return same_matrix(lhs, X, M - 4);
    };
    auto nilpotent = [](const ScalarMatrix& X) {
      ScalarMatrix P = X;
      for (size_t k = 0; k < X.rows(); ++k) P = P * X;
      for (size_t i = 0; i < P.rows(); ++i)
        for (size_t j = 0; j < P.cols(); ++j)
          if (!P(i, j).is_zero()) return false;
      return true;
    };
    RobbaModule ex{d, zero_matrix(d, 2, 2), std::nullopt};
    ex.N(0, 1) = mono(d, {1}, 1);
    auto ue = strongly_unipotent_basis(ex, identity_matrix(d, 2));
    bool zero = true;
    for (size_t i = 0; i < 2; ++i)
      for (size_t j = 0; j < 2; ++j) zero = zero && ue.X(i, j).is_zero();
    t.expect(zero, "worked example X = 0");
    t.expect(gauge_holds(ex, ue), "worked example gauge identity");

    std::mt19937_64 rng(808);
    for (int k = 0; k < 30; ++k) {
      const size_t n = 2 + k % 2;
      auto m = strict_upper(rng, d, n);
      auto u = strongly_unipotent_basis(m, identity_matrix(d, n));
      const std::string tag = "instance " + std::to_string(k);
      t.expect(gauge_holds(m, u), tag + " gauge identity");
      t.expect(nilpotent(u.X), tag + " nilpotent");
      auto T = identity_matrix(d, n);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) T(i, j) = random_laurent(rng, d, 2);
      auto u2 = strongly_unipotent_basis(m, T);
      t.expect(transition_is_constant(u.U, u2.U).pass, tag + " constant transition");
    }
    c.pass = t.pass();
    c.detail = t.summary();
  });
}

// ---- 9 ---------------------------------------------------------------------

RobbaElement random_poly(std::mt19937_64& rng, const RingDescriptor& d, long lo, long hi, int count) {
  std::uniform_int_distribution<long> ex(lo, hi), co(-4, 4);
  RobbaElement x(d);
  for (int k = 0; k < count; ++k) x.add_term({ex(rng)}, d.scalar(co(rng)));
  return x;
}

Criterion factorization() {
  return timed(9, "factorization into integral-invertible times plus part", [](Criterion& c) {
    Tally t;
    const long P = 3;
    auto d = robba_ring("t", -20, 20, 1, P, M);
    std::mt19937_64 rng(909);
    auto integral = [](const SeriesMatrix& A) {
      for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j)
          for (const auto& [e, x] : A(i, j).terms())
            if (!x.is_zero() && x.valuation() < 0) return false;
      return true;
    };
    auto plus = [](const SeriesMatrix& A) {
      for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j)
          for (const auto& [e, x] : A(i, j).terms())
            if (!x.is_zero() && e[0] < 0) return false;
      return true;
    };
    for (int k = 0; k < 50; ++k) {
      const size_t n = 2 + k % 2;
      const long v = k % 4;
      SeriesMatrix V0 = identity_matrix(d, n);
      for (int s = 0; s < 3; ++s) {
        size_t i = rng() % n, j = rng() % n;
        if (i != j) V0 = apply_elementary(V0, {ElementaryKind::AddMultiple, i, j, random_poly(rng, d, -2, 2, 2)});
      }
      if (rng() % 2) V0 = apply_elementary(V0, {ElementaryKind::Swap, 0, n - 1, {}});
      SeriesMatrix W0 = identity_matrix(d, n);
      for (long s = 0; s < v; ++s) {
        size_t r = rng() % n;
        for (size_t j = 0; j < n; ++j) W0(r, j) = W0(r, j).scaled(d.scalar(P));
        size_t i = rng() % n, j = rng() % n;
        if (i != j) W0 = apply_elementary(W0, {ElementaryKind::AddMultiple, i, j, random_poly(rng, d, 0, 2, 2)});
      }
      SeriesMatrix U = V0 * W0;
      const std::string tag = "instance " + std::to_string(k);
      auto f = factor_plus(U);
      const auto& fd = f.V(0, 0).descriptor();
      const long hi = fd.window[0].second - f.shift;
      SeriesMatrix Uw = U.map([&](const RobbaElement& x) { return x.rewindowed(fd); });
      t.expect(same_matrix(clip_above(f.V * f.W, hi), Uw, M - 4), tag + " V W = U");
      t.expect(integral(f.V) && det_valuation(f.V) == std::optional<Rational>(0), tag + " V integral-invertible");
      t.expect(plus(f.W) && plus(f.W_inverse), tag + " plus parts");
      t.expect(same_matrix(f.W * f.W_inverse, identity_matrix(f.W(0, 0).descriptor(), n), M - 4), tag + " W inverse");
      t.expect(f.steps.size() == static_cast<size_t>(v), tag + " step count");
      for (const auto& s : f.steps) t.expect(s.det_before && s.det_after && *s.det_before - *s.det_after == 1, tag + " step");
    }
    c.pass = t.pass();
    c.detail = t.summary();
  });
}

// ---- 10 --------------------------------------------------------------------

Criterion groebner() {
  return timed(10, "Groebner division postconditions and the Hadamard bound", [](Criterion& c) {
    Tally t;
    const long P = 5;
    auto d = dagger_ring({"x", "y"}, 40, 1, P, M);
    std::mt19937_64 rng(1010);
    std::uniform_int_distribution<long> ex(0, 3), co(-60, 60), vv(0, 3), den(1, 6);
    auto poly = [&](std::initializer_list<std::pair<Exponent, long>> terms) {
      DaggerSeries x(d);
      for (auto& [e, k] : terms) x.add_term(e, d.scalar(k));
      return x;
    };
    std::vector<std::vector<DaggerSeries>> ideals = {
        {poly({{{1, 0}, 1}, {{0, 0}, -P}}), poly({{{0, 2}, 1}, {{1, 1}, P * P}})},
        {poly({{{1, 1}, 1}, {{0, 0}, P}}), poly({{{2, 0}, 1}, {{0, 1}, -1}})},
    };
    size_t equalities = 0;
    for (int k = 0; k < 100; ++k) {
      const auto& gens = ideals[k % 2];
      auto basis = complete_leading_basis(gens);
      DaggerSeries y(d), z(d);
      std::vector<DaggerSeries> mult(gens.size(), DaggerSeries(d));
      for (int s = 0; s < 3; ++s) {
        long pw = 1;
        for (long q = vv(rng); q > 0; --q) pw *= P;
        y.add_term({ex(rng), ex(rng)}, d.scalar((co(rng) | 1) * pw));
        for (auto& m : mult) m.add_term({ex(rng), ex(rng)}, d.scalar(co(rng) | 1));
      }
      z = y;
      for (size_t g = 0; g < gens.size(); ++g) z = z + mult[g] * gens[g];
      auto r = reduce_element(y, z, basis.elements, Rational(basis.decay));
      const std::string tag = "instance " + std::to_string(k);
      t.expect(r.gauss_ok, tag + " |u| <= |y|");
      t.expect(r.rho_ok, tag + " |u|_rho <= |z|_rho");
      t.expect(zero_at(divide(r.u - z, basis.elements).remainder, M - 6), tag + " membership");

      Rational eps(den(rng), 6);
      eps.canonicalize();
      Rational DB = den(rng);
      auto h = hadamard_check(z, std::nullopt, DB, eps);
      t.expect(h.pass, tag + " hadamard");
      auto monomial = DaggerSeries::monomial(d, {ex(rng), ex(rng)}, d.scalar(P * (co(rng) | 1)));
      auto hm = hadamard_check(monomial, std::nullopt, DB, eps);
      t.expect(hm.pass && hm.value_C && hm.bound && *hm.value_C == *hm.bound, tag + " hadamard equality on a monomial");
      if (hm.value_C && hm.bound && *hm.value_C == *hm.bound) ++equalities;
    }
    c.pass = t.pass();
    c.detail = t.summary(std::to_string(equalities) + " monomial equalities");
  });
}

// ---- 11 --------------------------------------------------------------------

Criterion snake() {
  return timed(11, "snake exactness of the pushforward sequence", [](Criterion& c) {
    Tally t;
    std::vector<std::pair<std::string, DaggerModule>> mods = {
        {"trivial A^1", trivial_dagger_module(affine(1, 5), 1)},
        {"trivial A^2", trivial_dagger_module(affine(2, 5), 1)},
        {"kummer 0", kummer(affine(1, 3), 0)},
        {"kummer 1/2", kummer(affine(1, 3), Rational(1, 2))},
        {"kummer -1/2", kummer(affine(1, 5), Rational(-1, 2))},
    };
    std::string dims;
    for (const auto& [name, m] : mods) {
      auto b = pushforward_complex(m, {m.arity() == 1 ? 12L : 8L});
      auto v = snake_check(b);
      t.expect(v.pass, name + " exact");
      t.expect(b.reliable, name + " reliable");
      if (name == "trivial A^1") {
        dims = dims_str({b.r0f.dims[0], b.r1f.dims[0], b.r0loc.dims[0], b.r1loc.dims[0], b.r1shriek.dims[0],
                         b.r2shriek.dims[0]});
        t.expect(dims == "(1,0,1,1,0,1)", "trivial dims " + dims);
        auto bad = b;
        bad.r1f.dims[0] += 1;
        t.expect(!snake_check(bad).pass, "perturbed bundle rejected");
      }
    }
    c.pass = t.pass();
    c.detail = t.summary("trivial bundle " + dims + "; negative control rejected");
  });
}

// ---- 12 --------------------------------------------------------------------

Criterion trace_projector_identity() {
  return timed(12, "trace projector inverts pullback", [](Criterion& c) {
    Tally t;
    const long P = 5;
    auto d = robba_ring("t", -60, 60, 1, P, M);
    std::mt19937_64 rng(1212);
    for (long e : {2L, 3L}) {
      for (int k = 0; k < 50; ++k) {
        auto g = random_laurent(rng, d, 15, 3);
        t.expect(zero_at(trace_projector(kummer_substitute(g, e), e) - g, M - 2), "function e=" + std::to_string(e));
        t.expect(zero_at(form_projector(pullback_form(g, e), e) - g, M - 2), "form e=" + std::to_string(e));
      }
      for (int k = 0; k < 10; ++k) {
        const size_t n = 2 + k % 2;
        auto m = strict_upper(rng, robba_ring("t", -40, 40, 1, P, M), n);
        auto h = h0_h1_unipotent(strongly_unipotent_basis(m, identity_matrix(m.ring, n)));
        for (size_t deg = 0; deg < 2; ++deg)
          for (const auto& gen : h.generators[deg])
            for (const auto& [J, v] : gen.value) {
              auto back = project_vector(kummer_pullback(v, e, deg == 1), e, deg == 1);
              bool ok = true;
              for (size_t i = 0; i < n; ++i) ok = ok && zero_at(back[i] - v[i], M - 2);
              t.expect(ok, "H" + std::to_string(deg) + " representative e=" + std::to_string(e));
            }
      }
    }
    c.pass = t.pass();
    c.detail = t.summary("e in {2,3}, p = 5");
  });
}

// ---- 13 --------------------------------------------------------------------

Criterion leray() {
  return timed(13, "Leray consistency on A^2", [](Criterion& c) {
    Tally t;
    auto d = affine(2, 3);
    auto split = trivial_dagger_module(d, 2);
    split.Gamma[0](0, 1) = mono(d, {1, 0}, 1);  // ∂_x + nilpotent in x
    std::vector<std::pair<std::string, DaggerModule>> mods = {
        {"trivial", trivial_dagger_module(d, 1)},
        {"kummer 1/2 x trivial", kummer(d, Rational(1, 2))},
        {"kummer 0 x trivial", kummer(d, 0)},
        {"nilpotent fiber", split},
    };
    std::string out;
    for (const auto& [name, m] : mods) {
      auto r = leray_assemble(m, {8, true});
      t.expect(r.exact, name + " exact");
      t.expect(r.euler_ok && r.euler_M == r.euler_P - r.euler_Q, name + " Euler characteristic");
      t.expect(r.matches_direct, name + " leray dims");
      auto direct = mw_cohomology(m, {8, false});
      t.expect(r.leray_dims == direct.dims, name + " against mw_cohomology");
      out += (out.empty() ? "" : ", ") + name + " " + dims_str(direct.dims);
    }
    c.pass = t.pass();
    c.detail = t.summary(out);
  });
}

// ---- 14 --------------------------------------------------------------------

const char* kDeterminismProblems[] = {
    R"(ovc-problem 1
prime 3
precision 20
window 30
ring A dagger-fringe x,y
module M dagger A trivial=1
command cohomology module=M window=30
)",
    R"(ovc-problem 1
prime 5
precision 20
window 14
ring A dagger-fringe x
matrix G A [[0, [[1,"1"]]], [0, 0]]
module M dagger A gamma=G
command pushforward module=M
)",
    R"(ovc-problem 1
prime 3
precision 20
ring R robba t lo=-20 hi=20
matrix U R [[[[0,"3"],[1,"1"]], [[-1,"1"]]], [[[2,"1"]], [[0,"1"]]]]
command factor matrix=U
)",
};

Criterion determinism() {
  return timed(14, "byte-identical reports across runs and thread counts", [](Criterion& c) {
    Tally t;
    const char* saved = std::getenv("OVC_THREADS");
    const std::string restore = saved ? saved : "";
    size_t bytes = 0;
    for (size_t k = 0; k < std::size(kDeterminismProblems); ++k) {
      auto pf = parse_problem(kDeterminismProblems[k]);
      std::vector<std::string> outs;
      for (const char* threads : {"1", "4", "1", "4"}) {
        ::setenv("OVC_THREADS", threads, 1);
        auto r = run_command(pf, pf.command->name);
        outs.push_back(emit_report(r, ReportFormat::Structured) + emit_report(r, ReportFormat::Text));
      }
      bytes += outs[0].size();
      for (size_t i = 1; i < outs.size(); ++i) t.expect(outs[i] == outs[0], "problem " + std::to_string(k));
    }
    if (saved)
      ::setenv("OVC_THREADS", restore.c_str(), 1);
    else
      ::unsetenv("OVC_THREADS");
    c.pass = t.pass();
    c.detail = t.summary(std::to_string(std::size(kDeterminismProblems)) + " problems, " + std::to_string(bytes) +
                         " report bytes compared per run, OVC_THREADS in {1,4}");
  });
}

}  // namespace

Criterion run_criterion(int id) {
  static const std::vector<std::function<Criterion()>> all = {
      trivial_cohomology, compact_supports, kummer_robba, adjointness, nondegeneracy,
      denominators,       horizontal,       strongly_unipotent, factorization, groebner,
      snake,              trace_projector_identity, leray, determinism};
  if (id < 1 || id > kCriteria) throw Error("acceptance.bad_id", "criteria are numbered 1.." + std::to_string(kCriteria));
  return all[id - 1]();
}

std::vector<Criterion> run_all() {
  std::vector<Criterion> out;
  for (int id = 1; id <= kCriteria; ++id) out.push_back(run_criterion(id));
  return out;
}

}  // namespace ovc::acceptance
