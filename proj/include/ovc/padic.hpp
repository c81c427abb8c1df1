#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "ovc/error.hpp"

namespace ovc {

using Integer = mpz_class;
using Rational = mpq_class;

inline constexpr long kInfinity = std::numeric_limits<long>::max();

bool is_prime(long n);

/// p^k as a big integer; k >= 0.
Integer pow_p(long p, long k);

/// p-adic valuation of a nonzero integer / rational.
long vp_integer(const Integer& n, long p);
long vp_rational(const Rational& q, long p);

/**
 * A scalar of Q_p known to finitely many digits.
 *
 * A nonzero value is p^valuation * unit with the unit known modulo p^precision
 * (relative precision). Zero comes in two flavours: the exact zero, and the
 * precision-limited zero, which only says the value is divisible by p^floor.
 * Values are immutable; every arithmetic operation returns the guaranteed
 * precision of its result.
 */
class PadicApprox {
 public:
  /// Exact zero with no prime attached; adapts to the prime of the other
  /// operand in arithmetic.
  PadicApprox() = default;

  static PadicApprox exact_zero(long p);
  static PadicApprox limited_zero(long p, long floor);
  static PadicApprox from_integer(const Integer& n, long p, int precision);
  static PadicApprox from_rational(const Rational& q, long p, int precision);
  /// p^valuation * unit, unit reduced modulo p^precision; unit must be a p-adic unit.
  static PadicApprox from_parts(const Integer& unit, long valuation, int precision, long p);

  long prime() const noexcept { return p_; }
  long valuation() const noexcept { return val_; }
  const Integer& unit() const noexcept { return unit_; }
  int precision() const noexcept { return prec_; }

  bool is_zero() const noexcept { return val_ == kInfinity; }
  bool is_exact_zero() const noexcept { return is_zero() && !limited_; }
  bool is_limited_zero() const noexcept { return is_zero() && limited_; }

  /// Absolute precision: the value is known modulo p^abs_precision().
  long abs_precision() const noexcept;

  PadicApprox operator-() const;
  PadicApprox inverse() const;

  /// Integer representative n with value ≡ n mod p^level (requires level >= valuation
  /// and the value to be p-integral up to that level); used by reductions mod p.
  Integer residue_mod(long level) const;

  /// True when the two values agree modulo p^level and both are known to that level.
  bool congruent(const PadicApprox& other, long level) const;

  /// "u*p^v@M", "0" for the exact zero, "0@F" for a precision-limited zero.
  std::string to_string() const;
  static PadicApprox parse(const std::string& text, long p, int default_precision);

  friend PadicApprox operator+(const PadicApprox& x, const PadicApprox& y);
  friend PadicApprox operator*(const PadicApprox& x, const PadicApprox& y);
  friend PadicApprox operator-(const PadicApprox& x, const PadicApprox& y) { return x + (-y); }

  friend bool operator==(const PadicApprox& x, const PadicApprox& y) {
    return x.p_ == y.p_ && x.val_ == y.val_ && x.prec_ == y.prec_ && x.limited_ == y.limited_ &&
           x.floor_ == y.floor_ && x.unit_ == y.unit_;
  }

 private:
  Integer unit_ = 0;
  long val_ = kInfinity;
  int prec_ = 0;
  long p_ = 0;
  bool limited_ = false;
  long floor_ = kInfinity;
};

/// n as a p-adic scalar with M digits of unit precision. Rejects non-prime p.
PadicApprox make_scalar(const Integer& n, long p, int precision);

/// Valuation of x; kInfinity for zero.
inline long vp(const PadicApprox& x) { return x.valuation(); }

/// |x| = p^{-vp(x)} as an exact rational; zero for x = 0.
Rational norm(const PadicApprox& x);

enum class ArithOp { Add, Mul, Neg };
PadicApprox arith(ArithOp op, const PadicApprox& x, const PadicApprox& y = {});

PadicApprox invert_scalar(const PadicApprox& x);

/// Coefficient protocol shared with series coefficients.
inline std::optional<Rational> coefficient_value(const PadicApprox& c) {
  if (c.is_zero()) return std::nullopt;
  return Rational(c.valuation());
}
inline bool coefficient_is_zero(const PadicApprox& c) { return c.is_zero(); }
inline bool coefficient_is_limited(const PadicApprox& c) { return c.is_limited_zero(); }

}  // namespace ovc
