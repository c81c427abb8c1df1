#include "ovc/padic.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>

namespace ovc {

bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

Integer pow_p(long p, long k) {
  // Small cache: the same few powers are requested over and over by the
  // elimination kernels.
  thread_local std::map<long, std::vector<Integer>> cache;
  auto& row = cache[p];
  if (k < 512) {
    if (row.empty()) row.push_back(1);
    while (static_cast<long>(row.size()) <= k) row.push_back(row.back() * p);
    return row[static_cast<size_t>(k)];
  }
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  return r;
}

long vp_integer(const Integer& n, long p) {
  if (n == 0) return kInfinity;
  Integer m = abs(n);
  long k = 0;
  Integer q, r;
  for (;;) {
    mpz_fdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(p));
    if (r != 0) break;
    m = q;
    ++k;
  }
  return k;
}

long vp_rational(const Rational& q, long p) {
  if (q == 0) return kInfinity;
  return vp_integer(q.get_num(), p) - vp_integer(q.get_den(), p);
}

namespace {

Integer mod_positive(const Integer& a, const Integer& m) {
  Integer r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

void require_prime(long p) {
  if (!is_prime(p)) throw Error("padic.non_prime", std::to_string(p) + " is not prime");
}

}  // namespace

PadicApprox PadicApprox::exact_zero(long p) {
  PadicApprox z;
  z.p_ = p;
  return z;
}

PadicApprox PadicApprox::limited_zero(long p, long floor) {
  if (floor == kInfinity) return exact_zero(p);
  PadicApprox z;
  z.p_ = p;
  z.limited_ = true;
  z.floor_ = floor;
  return z;
}

PadicApprox PadicApprox::from_parts(const Integer& unit, long valuation, int precision, long p) {
  if (precision < 1) throw Error("padic.precision", "precision must be at least 1");
  PadicApprox x;
  x.p_ = p;
  x.val_ = valuation;
  x.prec_ = precision;
  x.unit_ = mod_positive(unit, pow_p(p, precision));
  if (x.unit_ % p == 0) throw Error("padic.internal", "unit part divisible by p");
  return x;
}

PadicApprox PadicApprox::from_integer(const Integer& n, long p, int precision) {
  if (precision < 1) throw Error("padic.precision", "precision must be at least 1");
  if (n == 0) return exact_zero(p);
  long v = vp_integer(n, p);
  Integer u = n / pow_p(p, v);
  return from_parts(u, v, precision, p);
}

PadicApprox PadicApprox::from_rational(const Rational& q, long p, int precision) {
  if (q == 0) return exact_zero(p);
  PadicApprox num = from_integer(q.get_num(), p, precision);
  PadicApprox den = from_integer(q.get_den(), p, precision);
  return num * den.inverse();
}

long PadicApprox::abs_precision() const noexcept {
  if (is_exact_zero()) return kInfinity;
  if (limited_) return floor_;
  return val_ + prec_;
}

PadicApprox PadicApprox::operator-() const {
  if (is_zero()) return *this;
  PadicApprox r = *this;
  r.unit_ = pow_p(p_, prec_) - unit_;
  return r;
}

PadicApprox PadicApprox::inverse() const {
  if (is_zero()) throw Error("padic.non_unit", "cannot invert a zero scalar");
  PadicApprox r = *this;
  Integer mod = pow_p(p_, prec_);
  mpz_invert(r.unit_.get_mpz_t(), unit_.get_mpz_t(), mod.get_mpz_t());
  r.val_ = -val_;
  return r;
}

Integer PadicApprox::residue_mod(long level) const {
  if (is_exact_zero()) return 0;
  if (abs_precision() < level)
    throw Error("padic.precision", "value not known modulo p^" + std::to_string(level));
  if (is_zero() || val_ >= level) return 0;
  if (val_ < 0) throw Error("padic.non_integral", "value has negative valuation");
  return mod_positive(unit_ * pow_p(p_, val_), pow_p(p_, level));
}

bool PadicApprox::congruent(const PadicApprox& other, long level) const {
  PadicApprox d = *this - other;
  if (d.abs_precision() < level) return false;
  return d.is_zero() || d.valuation() >= level;
}

std::string PadicApprox::to_string() const {
  if (is_exact_zero()) return "0";
  if (limited_) return "0@" + std::to_string(floor_);
  std::ostringstream os;
  os << unit_.get_str() << '*' << p_ << '^' << val_ << '@' << prec_;
  return os.str();
}

PadicApprox PadicApprox::parse(const std::string& text, long p, int default_precision) {
  auto bad = [&]() { return Error("padic.parse", "malformed scalar '" + text + "'"); };
  if (text.empty()) throw bad();
  try {
    auto at = text.find('@');
    auto star = text.find('*');
    if (star != std::string::npos) {
      if (at == std::string::npos) throw bad();
      auto caret = text.find('^', star);
      if (caret == std::string::npos || caret > at) throw bad();
      Integer u(text.substr(0, star));
      long base = std::stol(text.substr(star + 1, caret - star - 1));
      long v = std::stol(text.substr(caret + 1, at - caret - 1));
      int m = std::stoi(text.substr(at + 1));
      if (base != p) throw Error("padic.mixed_primes", "scalar '" + text + "' uses another prime");
      if (u == 0) return exact_zero(p);
      long extra = vp_integer(u, p);
      return from_parts(u / pow_p(p, extra), v + extra, m, p);
    }
    if (at != std::string::npos) {
      if (text.substr(0, at) != "0") throw bad();
      return limited_zero(p, std::stol(text.substr(at + 1)));
    }
    Rational q(text);
    q.canonicalize();
    return from_rational(q, p, default_precision);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

PadicApprox operator+(const PadicApprox& x, const PadicApprox& y) {
  if (x.is_exact_zero()) return y.p_ == 0 && x.p_ != 0 ? PadicApprox::exact_zero(x.p_) : y;
  if (y.is_exact_zero()) return x;
  if (x.p_ != y.p_) throw Error("padic.mixed_primes", "operands use different primes");
  const long p = x.p_;
  const long a = std::min(x.abs_precision(), y.abs_precision());
  long v = std::min(x.val_, y.val_);
  if (v == kInfinity || v >= a) return PadicApprox::limited_zero(p, a);
  const Integer mod = pow_p(p, a - v);
  Integer s = 0;
  for (const PadicApprox* t : {&x, &y}) {
    if (t->is_zero() || t->val_ - v >= a - v) continue;
    s += t->unit_ * pow_p(p, t->val_ - v);
  }
  s = mod_positive(s, mod);
  if (s == 0) return PadicApprox::limited_zero(p, a);
  long k = vp_integer(s, p);
  return PadicApprox::from_parts(s / pow_p(p, k), v + k, static_cast<int>(a - v - k), p);
}

PadicApprox operator*(const PadicApprox& x, const PadicApprox& y) {
  const long p = x.p_ != 0 ? x.p_ : y.p_;
  if (x.p_ != 0 && y.p_ != 0 && x.p_ != y.p_)
    throw Error("padic.mixed_primes", "operands use different primes");
  if (x.is_exact_zero() || y.is_exact_zero()) return PadicApprox::exact_zero(p);
  if (x.is_zero() || y.is_zero()) {
    long fx = x.is_zero() ? x.floor_ : x.val_;
    long fy = y.is_zero() ? y.floor_ : y.val_;
    return PadicApprox::limited_zero(p, fx + fy);
  }
  const int m = std::min(x.prec_, y.prec_);
  return PadicApprox::from_parts(x.unit_ * y.unit_, x.val_ + y.val_, m, p);
}

PadicApprox make_scalar(const Integer& n, long p, int precision) {
  require_prime(p);
  return PadicApprox::from_integer(n, p, precision);
}

Rational norm(const PadicApprox& x) {
  if (x.is_zero()) return 0;
  Rational r(pow_p(x.prime(), std::labs(x.valuation())));
  if (x.valuation() > 0) r = 1 / r;
  return r;
}

PadicApprox arith(ArithOp op, const PadicApprox& x, const PadicApprox& y) {
  switch (op) {
    case ArithOp::Add:
      return x + y;
    case ArithOp::Mul:
      return x * y;
    case ArithOp::Neg:
      return -x;
  }
  throw Error("padic.internal", "unknown op");
}

PadicApprox invert_scalar(const PadicApprox& x) { return x.inverse(); }

}  // namespace ovc
