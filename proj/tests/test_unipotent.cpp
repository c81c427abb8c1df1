#include <random>

#include "doctest.h"
#include "ovc/unipotent.hpp"

using namespace ovc;

namespace {

const long P = 5;
const int M = 20;

RingDescriptor robba(long w = 30) { return robba_ring("t", -w, w, 1, P, M); }

RobbaElement laurent(const RingDescriptor& d, std::initializer_list<std::pair<long, Rational>> terms) {
  RobbaElement x(d);
  for (auto& [e, c] : terms) x.add_term({e}, d.scalar(c));
  return x;
}

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

bool zero_at(const RobbaElement& x, long level) {
  for (const auto& [e, c] : x.terms())
    if (!c.is_zero() && c.valuation() < level) return false;
  return true;
}

// Least a with p^a·Π(m+x+i)/i integral mod x^e, by expanding Π(m+i+x) over Z
// and dividing by l! (Legendre's formula for vp(l!)).
long oracle_denominator(long p, long m, long l, long e) {
  std::vector<Integer> poly{1};
  for (long i = 1; i <= l; ++i) {
    std::vector<Integer> next(poly.size() + 1, 0);
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k] * (m + i);
      next[k + 1] += poly[k];
    }
    poly = next;
  }
  long vfact = 0;
  for (long pk = p; pk <= l; pk *= p) vfact += l / pk;
  long worst = 0;
  for (long k = 0; k < e && k < static_cast<long>(poly.size()); ++k)
    if (poly[k] != 0) worst = std::max(worst, vfact - vp_integer(poly[k], p));
  return worst;
}

}  // namespace

TEST_CASE("bounddenom examples") {
  CHECK(bounddenom(P, 7, 5, 1).bound == 0);
  CHECK(bounddenom(P, 7, 5, 1).exact == 0);
  for (long p : {2L, 3L, 5L, 7L}) {
    auto r = bounddenom(p, 0, p, 2);
    CHECK(r.exact == 1);
    CHECK(r.bound == 1);
  }
  auto r = bounddenom(P, 0, 1, 3);
  CHECK(r.exact == 0);
  CHECK(r.exact <= r.bound);
  CHECK_THROWS_AS(bounddenom(P, 0, 0, 2), Error);
}

TEST_CASE("bounddenom exact value matches integer expansion and stays under the bound") {
  for (long p : {2L, 3L, 5L})
    for (long m = -20; m <= 20; ++m)
      for (long l = 1; l <= 30; ++l)
        for (long e = 1; e <= 4; ++e) {
          auto r = bounddenom(p, m, l, e);
          REQUIRE(r.exact == oracle_denominator(p, m, l, e));
          CHECK(r.exact <= r.bound);
        }
}

TEST_CASE("strongly_unipotent_basis examples") {
  auto d = robba();
  // D w2 = t w1
  RobbaModule m{d, zero_matrix(d, 2, 2), std::nullopt};
  m.N(0, 1) = laurent(d, {{1, 1}});
  auto u = strongly_unipotent_basis(m, identity_matrix(d, 2));
  CHECK(u.X(0, 1).is_zero());
  CHECK(u.e == 1);
  CHECK(zero_at(u.U(0, 1) - laurent(d, {{1, -1}}), M));
  CHECK(zero_at(u.U(1, 1) - laurent(d, {{0, 1}}), M));
  CHECK(verify_unipotent(u).pass);
  CHECK(vector_is_zero(apply_D(m, {u.U(0, 1), u.U(1, 1)})));

  RobbaModule c{d, zero_matrix(d, 2, 2), std::nullopt};
  c.N(0, 1) = laurent(d, {{0, 3}});
  auto uc = strongly_unipotent_basis(c, identity_matrix(d, 2));
  CHECK(uc.X(0, 1) == d.scalar(3));
  CHECK(uc.e == 2);
  CHECK(transition_is_constant(identity_matrix(d, 2), uc.U).pass);

  auto triv = strongly_unipotent_basis(trivial_robba_module(d, 1), identity_matrix(d, 1));
  CHECK(triv.X(0, 0).is_zero());

  RobbaModule bad{d, zero_matrix(d, 2, 2), std::nullopt};
  bad.N(1, 0) = laurent(d, {{1, 1}});
  CHECK_THROWS_AS(strongly_unipotent_basis(bad, identity_matrix(d, 2)), Error);
}

TEST_CASE("random unipotent modules: X constant nilpotent and the gauge identity holds") {
  std::mt19937_64 rng(5);
  auto d = robba();
  for (int t = 0; t < 40; ++t) {
    size_t n = 2 + t % 2;
    auto m = strict_upper(rng, d, n);
    auto u = strongly_unipotent_basis(m, identity_matrix(d, n));
    auto chk = verify_unipotent(u);
    CHECK_MESSAGE(chk.pass, chk.detail);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j <= i; ++j) CHECK(u.X(i, j).is_zero());
    // e from repeated multiplication over Q
    ScalarMatrix P = u.X;
    size_t e = 1;
    auto nz = [](const ScalarMatrix& A) {
      for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.cols(); ++j)
          if (!A(i, j).is_zero()) return true;
      return false;
    };
    while (nz(P)) {
      P = P * u.X;
      ++e;
    }
    CHECK(u.e == e);
  }
}

TEST_CASE("two filtrations give strongly unipotent bases with constant transition") {
  std::mt19937_64 rng(9);
  auto d = robba();
  for (int t = 0; t < 30; ++t) {
    size_t n = 2 + t % 2;
    auto m = strict_upper(rng, d, n);
    auto T = identity_matrix(d, n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) T(i, j) = random_laurent(rng, d, 2);
    auto u1 = strongly_unipotent_basis(m, identity_matrix(d, n));
    auto u2 = strongly_unipotent_basis(m, T);
    auto r = transition_is_constant(u1.U, u2.U);
    CHECK_MESSAGE(r.pass, r.detail);
  }
}

TEST_CASE("horizontal_iterate examples") {
  auto d = robba();
  RobbaModule m{d, zero_matrix(d, 2, 2), std::nullopt};
  m.N(0, 1) = laurent(d, {{0, 1}});
  auto u = strongly_unipotent_basis(m, identity_matrix(d, 2));
  REQUIRE(u.e == 2);

  auto r = horizontal_iterate(u, {RobbaElement(d), laurent(d, {{0, 1}})}, 30, true);
  CHECK(zero_at(r.f_v[0] - laurent(d, {{0, 1}}), M));
  CHECK(r.f_v[1].is_zero());
  CHECK(r.nabla.pass);
  for (auto& v : r.log) CHECK_FALSE(v.has_value());

  auto z = horizontal_iterate(u, {laurent(d, {{1, 1}}), RobbaElement(d)}, 3, true);
  CHECK(z.f_v[0].is_zero());
  CHECK(z.f_v[1].is_zero());

  auto zero = horizontal_iterate(u, {RobbaElement(d), RobbaElement(d)}, 5);
  CHECK(vector_is_zero(zero.f));
}

TEST_CASE("horizontal_iterate converges with positive slope on decaying inputs") {
  std::mt19937_64 rng(21);
  const long W = 24;
  auto d = robba(W);
  std::uniform_int_distribution<long> co(1, 40);
  for (int t = 0; t < 12; ++t) {
    size_t n = 1 + t % 3;
    auto m = strict_upper(rng, d, n);
    auto u = strongly_unipotent_basis(m, identity_matrix(d, n));
    // v(a_m) + m r >= |m|/2 with r = 1
    ModuleVector w(n, RobbaElement(d));
    for (size_t i = 0; i < n; ++i)
      for (long k = -W / 2; k <= W / 2; ++k) {
        long v = (std::labs(k) + 1) / 2 + (k < 0 ? -k : 0);
        w[i].add_term({k}, PadicApprox::from_parts(co(rng) * 5 + 1, v, M, P));
      }
    auto r = horizontal_iterate(u, w, W, true);
    CHECK(r.nabla.pass);
    REQUIRE(r.slope.has_value());
    CHECK(*r.slope > 0);
    CHECK(r.nominal_loss >= 0);
  }
}

TEST_CASE("h0_h1_unipotent examples") {
  auto d = robba();
  auto one = strongly_unipotent_basis(trivial_robba_module(d, 1), identity_matrix(d, 1));
  auto r1 = h0_h1_unipotent(one);
  CHECK(r1.dims == std::vector<size_t>{1, 1});

  RobbaModule m{d, zero_matrix(d, 2, 2), std::nullopt};
  m.N(0, 1) = laurent(d, {{0, 1}});
  auto r2 = h0_h1_unipotent(strongly_unipotent_basis(m, identity_matrix(d, 2)));
  CHECK(r2.dims == std::vector<size_t>{1, 1});
  // H^0 spanned by v1, H^1 by v2 dt/t
  const auto& h0 = r2.generators[0][0].value.at({});
  CHECK(zero_at(h0[1], M));
  CHECK_FALSE(h0[0].is_zero());
  const auto& h1 = r2.generators[1][0].value.at({0});
  CHECK_FALSE(h1[1].is_zero());

  auto r3 = h0_h1_unipotent(strongly_unipotent_basis(trivial_robba_module(d, 3), identity_matrix(d, 3)));
  CHECK(r3.dims == std::vector<size_t>{3, 3});
}

TEST_CASE("h0_h1 dims survive Kummer pullback and representatives survive the projector") {
  std::mt19937_64 rng(77);
  auto d = robba(40);
  for (long e : {2L, 3L})
    for (int t = 0; t < 10; ++t) {
      size_t n = 2 + t % 2;
      RobbaModule m{d, zero_matrix(d, n, n), std::nullopt};
      for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) m.N(i, j) = random_laurent(rng, d, 2);
      auto u = strongly_unipotent_basis(m, identity_matrix(d, n));
      auto pb = pullback_module(m, {PullbackKind::Kummer, e});
      auto upb = strongly_unipotent_basis(pb, identity_matrix(d, n));
      auto a = h0_h1_unipotent(u), b = h0_h1_unipotent(upb);
      CHECK(a.dims == b.dims);
      for (const auto& g : a.generators[0]) {
        const auto& v = g.value.at({});
        auto back = project_vector(kummer_pullback(v, e), e);
        for (size_t i = 0; i < n; ++i) CHECK(zero_at(back[i] - v[i], M - 2));
        CHECK(vector_is_zero(apply_D(pb, kummer_pullback(v, e))));
      }
    }
}

TEST_CASE("pluscohom_check and preimages") {
  auto d = robba(10);
  auto one = strongly_unipotent_basis(trivial_robba_module(d, 1), identity_matrix(d, 1));
  auto r = pluscohom_check(one);
  CHECK(r.pass);
  CHECK(r.dim == 10);

  auto Dv = apply_D(one.module, {laurent(d, {{-1, 1}})});
  CHECK(zero_at(Dv[0] - laurent(d, {{-1, -1}}), M));

  auto pre = pluscohom_preimage(one, {laurent(d, {{-1, 1}})});
  CHECK(zero_at(pre[0] - laurent(d, {{-1, -1}}), M));
  auto none = pluscohom_preimage(one, {laurent(d, {{0, 1}})});
  CHECK(none[0].is_zero());

  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    size_t n = 2 + t % 2;
    auto m = strict_upper(rng, robba(), n);
    auto u = strongly_unipotent_basis(m, identity_matrix(robba(), n));
    CHECK(pluscohom_check(u).pass);
    ModuleVector om(n);
    for (auto& x : om) x = random_laurent(rng, robba(), 8, 3);
    auto v = pluscohom_preimage(u, om);
    auto back = apply_D(u.constant_module(), v);
    for (size_t i = 0; i < n; ++i) {
      const RobbaElement diff = back[i] - om[i];
      for (const auto& [ex, c] : diff.terms())
        if (ex[0] < 0) CHECK(c.is_zero());
    }
  }
}
