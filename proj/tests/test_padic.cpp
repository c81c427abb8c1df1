#include <random>

#include "doctest.h"
#include "ovc/padic.hpp"

using namespace ovc;

namespace {

// Independent modular inverse by the extended Euclidean algorithm.
long euclid_inverse(long a, long m) {
  long old_r = a, r = m, old_s = 1, s = 0;
  while (r != 0) {
    long q = old_r / r;
    long t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  return ((old_s % m) + m) % m;
}

}  // namespace

TEST_CASE("make_scalar examples") {
  auto a = make_scalar(12, 3, 5);
  CHECK(a.valuation() == 1);
  CHECK(a.unit() == 4);
  CHECK(a.precision() == 5);

  auto z = make_scalar(0, 5, 4);
  CHECK(z.is_exact_zero());
  CHECK(vp(z) == kInfinity);

  auto m = make_scalar(-1, 5, 3);
  CHECK(m.valuation() == 0);
  CHECK(m.unit() == 124);

  CHECK_THROWS_AS(make_scalar(7, 6, 3), Error);
  try {
    make_scalar(7, 9, 3);
  } catch (const Error& e) {
    CHECK(e.code() == "padic.non_prime");
  }
}

TEST_CASE("vp examples") {
  const long p = 7;
  CHECK(vp(make_scalar(49 * 3, p, 6)) == 2);
  CHECK(vp(make_scalar(0, p, 6)) == kInfinity);
  CHECK(vp(make_scalar(1 + p, p, 6)) == 0);
}

TEST_CASE("arith examples") {
  const long p = 5;
  auto x = make_scalar(p, p, 4);
  auto s = arith(ArithOp::Add, x, arith(ArithOp::Neg, x));
  CHECK(s.is_limited_zero());
  CHECK(s.abs_precision() == 5);

  auto prod = arith(ArithOp::Mul, make_scalar(3, 3, 6), make_scalar(9, 3, 6));
  CHECK(prod.valuation() == 3);
  CHECK(prod.unit() == 1);

  auto sum = make_scalar(1, p, 4) + make_scalar(p, p, 4);
  CHECK(sum.valuation() == 0);
  CHECK(sum.unit() == 1 + p);
  CHECK(sum.precision() == 4);
}

TEST_CASE("addition precision is the common absolute precision") {
  // 1 + O(5^4) plus 5^3*(1 + O(5^1)) is known modulo 5^4.
  auto a = PadicApprox::from_parts(1, 0, 4, 5);
  auto b = PadicApprox::from_parts(1, 3, 1, 5);
  auto s = a + b;
  CHECK(s.abs_precision() == 4);
  CHECK(s.unit() == 126);
  // Cancellation down to the known digits gives a flagged zero, never an exact zero.
  auto c = PadicApprox::from_parts(1, 0, 2, 5);
  auto d = PadicApprox::from_parts(-1, 0, 6, 5);
  CHECK((c + d).is_limited_zero());
  CHECK((c + d).abs_precision() == 2);
}

TEST_CASE("invert_scalar examples") {
  auto ip = invert_scalar(make_scalar(3, 3, 5));
  CHECK(ip.valuation() == -1);
  CHECK(ip.unit() == 1);

  auto i2 = invert_scalar(make_scalar(2, 5, 3));
  CHECK(i2.unit() == euclid_inverse(2, 125));
  CHECK(i2.unit() == 63);

  CHECK_THROWS_AS(invert_scalar(make_scalar(0, 5, 3)), Error);
  try {
    invert_scalar(PadicApprox::exact_zero(5));
  } catch (const Error& e) {
    CHECK(e.code() == "padic.non_unit");
  }
}

TEST_CASE("mixed primes are rejected") {
  CHECK_THROWS_AS(make_scalar(1, 3, 4) + make_scalar(1, 5, 4), Error);
  CHECK_THROWS_AS(make_scalar(1, 3, 4) * make_scalar(1, 5, 4), Error);
}

TEST_CASE("serialization round trip") {
  auto x = make_scalar(-45, 3, 6);
  auto y = PadicApprox::parse(x.to_string(), 3, 6);
  CHECK(x == y);
  CHECK(PadicApprox::parse("0", 3, 6).is_exact_zero());
  CHECK(PadicApprox::parse("0@7", 3, 6).abs_precision() == 7);
  auto h = PadicApprox::parse("1/2", 3, 6);
  CHECK((h * make_scalar(2, 3, 6)).congruent(make_scalar(1, 3, 6), 6));
  CHECK_THROWS_AS(PadicApprox::parse("4*5^1@3", 3, 6), Error);
  CHECK_THROWS_AS(PadicApprox::parse("garbage", 3, 6), Error);
}

TEST_CASE("valuation laws on random pairs") {
  std::mt19937_64 rng(1234);
  for (long p : {2L, 3L, 5L, 7L}) {
    std::uniform_int_distribution<long> dist(-100000, 100000);
    for (int trial = 0; trial < 300; ++trial) {
      long a = dist(rng), b = dist(rng);
      if (a == 0 || b == 0) continue;
      auto x = make_scalar(a, p, 12), y = make_scalar(b, p, 12);
      CHECK(vp(x * y) == vp(x) + vp(y));
      CHECK(norm(x * y) == norm(x) * norm(y));
      auto s = x + y;
      if (vp(x) != vp(y)) {
        CHECK(vp(s) == std::min(vp(x), vp(y)));
      } else if (!s.is_zero()) {
        CHECK(vp(s) >= std::min(vp(x), vp(y)));
        CHECK(norm(s) <= std::max(norm(x), norm(y)));
      }
      // Sum agrees with the exact integer sum to its stated precision.
      CHECK(s.congruent(make_scalar(a + b, p, 40), s.abs_precision()));
      auto back = invert_scalar(invert_scalar(x));
      CHECK(back.congruent(x, vp(x) + x.precision()));
      CHECK((x * invert_scalar(x)).congruent(make_scalar(1, p, 12), 12));
    }
  }
}
