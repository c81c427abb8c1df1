#include <complex>
#include <random>

#include "doctest.h"
#include "ovc/connection.hpp"

using namespace ovc;

namespace {

const long P = 5;
const int M = 20;

RingDescriptor robba() { return robba_ring("t", -30, 30, 1, P, M); }

RobbaElement laurent(const RingDescriptor& d, std::initializer_list<std::pair<long, Rational>> terms) {
  RobbaElement x(d);
  for (auto& [e, c] : terms) x.add_term({e}, d.scalar(c));
  return x;
}

bool zero_at(const RobbaElement& x, long level) {
  for (const auto& [e, c] : x.terms())
    if (!c.is_zero() && c.valuation() < level) return false;
  return true;
}

bool same(const RobbaElement& a, const RobbaElement& b, long level = M - 2) { return zero_at(a - b, level); }

SeriesMatrix mat(const RingDescriptor& d, std::vector<std::vector<RobbaElement>> rows) {
  SeriesMatrix A(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) A(i, j) = rows[i][j].bound() ? rows[i][j] : RobbaElement(d);
  return A;
}

RobbaElement random_laurent(std::mt19937_64& rng, const RingDescriptor& d, long span) {
  std::uniform_int_distribution<long> ex(-span, span), co(-50, 50);
  RobbaElement x(d);
  for (int k = 0; k < 3; ++k) x.add_term({ex(rng)}, d.scalar(co(rng)));
  return x;
}

}  // namespace

TEST_CASE("apply_D examples") {
  auto d = robba();
  auto m = trivial_robba_module(d, 1);
  auto Dt = apply_D(m, {laurent(d, {{1, 1}})});
  CHECK(same(Dt[0], laurent(d, {{1, 1}})));
  CHECK(apply_D(m, {laurent(d, {{0, 7}})})[0].is_zero());

  RobbaModule n2{d, mat(d, {{laurent(d, {}), laurent(d, {{0, 1}})}, {laurent(d, {}), laurent(d, {})}}), std::nullopt};
  auto r = apply_D(n2, {laurent(d, {}), laurent(d, {{0, 1}})});
  CHECK(same(r[0], laurent(d, {{0, 1}})));
  CHECK(r[1].is_zero());

  auto dag = dagger_ring({"x"}, 20, 1, P, M);
  CHECK_THROWS_AS(apply_D(RobbaModule{dag, zero_matrix(dag, 1, 1), std::nullopt}, {RobbaElement(dag)}), Error);
}

TEST_CASE("apply_D satisfies the Leibniz rule") {
  std::mt19937_64 rng(17);
  auto d = robba();
  for (int t = 0; t < 100; ++t) {
    RobbaModule m{d, mat(d, {{random_laurent(rng, d, 3), random_laurent(rng, d, 3)},
                             {random_laurent(rng, d, 3), random_laurent(rng, d, 3)}}),
                  std::nullopt};
    ModuleVector v{random_laurent(rng, d, 5), random_laurent(rng, d, 5)};
    auto c = random_laurent(rng, d, 4);
    auto lhs = apply_D(m, {c * v[0], c * v[1]});
    auto Dv = apply_D(m, v);
    auto tc = euler_derivative(c, 0);
    for (size_t i = 0; i < 2; ++i) CHECK(same(lhs[i], tc * v[i] + c * Dv[i]));
  }
}

TEST_CASE("apply_nabla_v examples") {
  auto d = dagger_ring({"x"}, 20, 1, P, M);
  auto triv = trivial_dagger_module(d, 1);
  auto x2 = laurent(d, {{2, 1}});
  CHECK(same(apply_nabla_v(triv, {x2})[0], laurent(d, {{1, 2}})));
  CHECK(apply_nabla_v(triv, {laurent(d, {{0, 3}})})[0].is_zero());
  DaggerModule twist{d, {mat(d, {{laurent(d, {{0, 7}})}})}, {Gauge::Dx}};
  CHECK(same(apply_nabla_v(twist, {laurent(d, {{0, 1}})})[0], laurent(d, {{0, 7}})));
  // dlog gauge: x d/dx
  DaggerModule dl{d, {zero_matrix(d, 1, 1)}, {Gauge::Dlog}};
  CHECK(same(apply_nabla_v(dl, {x2})[0], laurent(d, {{2, 2}})));
}

TEST_CASE("check_frobenius_compat examples") {
  auto d = robba();
  CHECK(check_frobenius_compat(trivial_robba_module(d, 2)).pass);

  for (long m : {1L, 2L, 3L}) {
    // Φ = t^{-m} pairs with a = -m/(q-1); Φ = t^{m} with a = m/(q-1).
    Rational a = Rational(-m, P - 1);
    a.canonicalize();
    RobbaModule mod{d, mat(d, {{laurent(d, {{0, a}})}}), mat(d, {{laurent(d, {{-m, 1}})}})};
    CHECK(check_frobenius_compat(mod).pass);
    RobbaModule wrong{d, mat(d, {{laurent(d, {{0, -a}})}}), mat(d, {{laurent(d, {{-m, 1}})}})};
    CHECK_FALSE(check_frobenius_compat(wrong).pass);
  }

  RobbaModule bad{d, zero_matrix(d, 1, 1), mat(d, {{laurent(d, {{1, 1}})}})};
  auto r = check_frobenius_compat(bad);
  CHECK_FALSE(r.pass);
  REQUIRE(r.defect_index.has_value());
  CHECK(*r.defect_index == Exponent{1});
}

TEST_CASE("check_integrability examples") {
  auto d = dagger_ring({"x", "y"}, 20, 1, P, M);
  CHECK(check_integrability(trivial_dagger_module(d, 2)).pass);
  RobbaElement x(d), y(d);
  x.add_term({1, 0}, d.scalar(1));
  y.add_term({0, 1}, d.scalar(1));
  DaggerModule bad{d, {mat(d, {{y}}), zero_matrix(d, 1, 1)}, {Gauge::Dx, Gauge::Dx}};
  CHECK_FALSE(check_integrability(bad).pass);
  DaggerModule good{d, {mat(d, {{y}}), mat(d, {{x}})}, {Gauge::Dx, Gauge::Dx}};
  CHECK(check_integrability(good).pass);
}

TEST_CASE("pullback_module examples and compatibility preservation") {
  auto d = robba();
  RobbaModule a{d, mat(d, {{laurent(d, {{0, Rational(1, 3)}})}}), std::nullopt};
  auto same1 = pullback_module(a, {PullbackKind::Kummer, 1});
  CHECK(same(same1.N(0, 0), a.N(0, 0)));
  auto two = pullback_module(a, {PullbackKind::Kummer, 2});
  CHECK(same(two.N(0, 0), laurent(d, {{0, Rational(2, 3)}})));
  auto z = pullback_module(trivial_robba_module(d, 2), {PullbackKind::Frobenius, P});
  CHECK(z.N(0, 1).is_zero());

  for (long m : {1L, 2L}) {
    Rational c(m, P - 1);
    c.canonicalize();
    RobbaModule mod{d, mat(d, {{laurent(d, {{0, c}})}}), mat(d, {{laurent(d, {{m, 1}})}})};
    REQUIRE(check_frobenius_compat(mod).pass);
    for (long e : {2L, 3L}) CHECK(check_frobenius_compat(pullback_module(mod, {PullbackKind::Kummer, e})).pass);
    CHECK(check_frobenius_compat(pullback_module(mod, {PullbackKind::Frobenius, P})).pass);
  }
  RobbaModule wide{d, mat(d, {{laurent(d, {{20, 1}})}}), std::nullopt};
  CHECK_THROWS_AS(pullback_module(wide, {PullbackKind::Kummer, 2}), Error);
}

TEST_CASE("trace_map examples") {
  auto d = robba();
  CHECK(same(trace_map(laurent(d, {{2, 1}, {3, 1}}), 2), laurent(d, {{1, 2}})));
  CHECK(same(trace_map(laurent(d, {{0, 1}}), 3), laurent(d, {{0, 3}})));
  auto a = laurent(d, {{-2, 4}, {1, 3}, {5, -1}});
  CHECK(same(trace_map(kummer_substitute(a, 3), 3), a.scaled(d.scalar(3))));
  CHECK_THROWS_AS(trace_map(a, P), Error);
}

TEST_CASE("trace agrees with summing over roots of unity") {
  // Oracle: Σ_ζ f(ζ t) evaluated symbolically over C on integer coefficients.
  std::mt19937_64 rng(8);
  auto d = robba();
  std::uniform_int_distribution<long> ex(-9, 9), co(-20, 20);
  for (long e : {2L, 3L, 4L}) {
    for (int t = 0; t < 30; ++t) {
      std::map<long, long> f;
      for (int k = 0; k < 4; ++k) f[ex(rng)] += co(rng);
      std::map<long, double> oracle;
      for (auto [i, c] : f) {
        std::complex<double> s = 0;
        for (long k = 0; k < e; ++k) s += std::polar(1.0, 2 * M_PI * k * i / e);
        if (std::abs(s) > 1e-9) oracle[i] += c * s.real();
      }
      RobbaElement w(d);
      for (auto [i, c] : f) w.add_term({i}, d.scalar(c));
      auto tr = trace_map(w, e);
      RobbaElement expect(d);
      for (auto [i, c] : oracle) expect.add_term({i / e}, d.scalar(static_cast<long>(std::lround(c))));
      CHECK(same(tr, expect));
    }
  }
}

TEST_CASE("projector identities on functions and forms") {
  std::mt19937_64 rng(31);
  auto d = robba_ring("t", -60, 60, 1, P, M);
  for (long e : {2L, 3L}) {
    for (int t = 0; t < 50; ++t) {
      auto g = random_laurent(rng, d, 15);
      CHECK(same(trace_projector(kummer_substitute(g, e), e), g));
      CHECK(same(form_projector(pullback_form(g, e), e), g));
      CHECK(same(trace_form(pullback_form(g, e), e), g.scaled(d.scalar(e))));
    }
  }
}

TEST_CASE("dual module") {
  auto d = robba();
  RobbaModule m{d, mat(d, {{laurent(d, {{1, 1}}), laurent(d, {{0, 2}})}, {laurent(d, {}), laurent(d, {{-1, 3}})}}),
                std::nullopt};
  auto dm = dual(m);
  CHECK(same(dm.N(1, 0), laurent(d, {{0, -2}})));
  CHECK(dm.N(0, 1).is_zero());
}
