#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ovc/padic.hpp"

namespace ovc {

/// Exponent vector; entries may be negative for Robba variables.
using Exponent = std::vector<long>;

enum class RingKind { Tate, DaggerFringe, Robba, RobbaPlus, MultiRobba };

std::string to_string(RingKind kind);
RingKind parse_ring_kind(const std::string& text);

/**
 * Finite model of one of the series rings: Tate algebra T_n, a fringe of the
 * dagger algebra W_n (decay parameter D, radius p^{1/D}), a Robba ring with
 * slope r, its plus part, or the multidimensional Robba ring. Every element
 * lives on the exponent window stored here.
 */
struct RingDescriptor {
  RingKind kind = RingKind::Tate;
  std::vector<std::string> variables;
  std::vector<std::pair<long, long>> window;  // per variable [lo, hi]
  long decay_D = 1;
  Rational slope_r = 1;
  int precision = 20;
  long p = 3;
  long q = 3;
  bool integral = false;  // integral subring R^int

  size_t arity() const noexcept { return variables.size(); }
  bool is_robba() const noexcept {
    return kind == RingKind::Robba || kind == RingKind::RobbaPlus || kind == RingKind::MultiRobba;
  }
  bool in_window(const Exponent& e) const;
  /// Checks the descriptor invariants; throws series.bad_descriptor.
  void validate() const;

  PadicApprox scalar(const Rational& value) const { return PadicApprox::from_rational(value, p, precision); }

  friend bool operator==(const RingDescriptor&, const RingDescriptor&) = default;
};

/// Convenience constructors for the common descriptors.
RingDescriptor tate_ring(std::vector<std::string> vars, long hi, long p, int precision);
RingDescriptor dagger_ring(std::vector<std::string> vars, long hi, long decay_D, long p, int precision);
RingDescriptor robba_ring(const std::string& var, long lo, long hi, Rational slope, long p, int precision);
RingDescriptor multi_robba_ring(std::vector<std::string> vars, long lo, long hi, Rational slope, long p,
                                int precision);

template <class C>
class Series;

// ---- coefficient protocol for scalar coefficients -------------------------

inline PadicApprox coefficient_one_like(const PadicApprox& c, const RingDescriptor& d) {
  (void)c;
  return d.scalar(1);
}
inline PadicApprox coefficient_scale(const PadicApprox& c, const Rational& factor, const RingDescriptor& d) {
  return c * d.scalar(factor);
}
inline PadicApprox coefficient_inverse(const PadicApprox& c) { return c.inverse(); }
inline PadicApprox coefficient_frobenius(const PadicApprox& c, long q) {
  (void)q;
  return c;
}
inline std::string coefficient_string(const PadicApprox& c) { return '"' + c.to_string() + '"'; }

/**
 * Finite-support series on a descriptor window. Terms that escape the window
 * are dropped and their best value (Gauss value for Tate/dagger kinds, w at
 * slope r for Robba kinds) is kept as the truncation-loss indicator.
 *
 * A default-constructed Series is an unbound zero that adopts the descriptor
 * of whatever it is combined with.
 */
template <class C>
class Series {
 public:
  using Coefficient = C;

  Series() = default;
  explicit Series(RingDescriptor d) : desc_(std::move(d)), bound_(true) {}

  static Series monomial(const RingDescriptor& d, const Exponent& e, const C& c) {
    Series s(d);
    s.add_term(e, c);
    return s;
  }
  static Series constant(const RingDescriptor& d, const C& c) { return monomial(d, Exponent(d.arity(), 0), c); }

  const RingDescriptor& descriptor() const noexcept { return desc_; }
  bool bound() const noexcept { return bound_; }
  const std::map<Exponent, C>& terms() const noexcept { return terms_; }
  const std::optional<Rational>& truncation_loss() const noexcept { return loss_; }

  /// Value of a single term: coefficient value plus r·(exponent sum) on Robba kinds.
  std::optional<Rational> term_value(const Exponent& e, const C& c) const {
    auto v = coefficient_value(c);
    if (!v) return std::nullopt;
    if (desc_.is_robba())
      for (long x : e) *v += desc_.slope_r * x;
    return v;
  }

  void record_loss(const std::optional<Rational>& v) {
    if (!v) return;
    if (!loss_ || *v < *loss_) loss_ = v;
  }

  void add_term(const Exponent& e, const C& c) {
    if (!desc_.in_window(e)) {
      record_loss(term_value(e, c));
      return;
    }
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (!coefficient_is_zero(c) || coefficient_is_limited(c)) terms_.emplace(e, c);
      return;
    }
    C sum = it->second + c;
    if (coefficient_is_zero(sum) && !coefficient_is_limited(sum))
      terms_.erase(it);
    else
      it->second = std::move(sum);
  }

  /// Coefficient at e, or the unbound zero when absent.
  C coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? C{} : it->second;
  }

  /// True when every stored coefficient is zero (exactly or at precision).
  bool is_zero() const {
    for (const auto& [e, c] : terms_)
      if (!coefficient_is_zero(c)) return false;
    return true;
  }

  /// Lowest absolute precision over precision-limited zero coefficients.
  std::optional<Rational> limited_floor() const {
    std::optional<Rational> best;
    for (const auto& [e, c] : terms_)
      if (coefficient_is_limited(c)) {
        auto f = coefficient_floor(c);
        if (f && (!best || *f < *best)) best = f;
      }
    return best;
  }

  /// Drop precision-limited zero coefficients.
  Series pruned() const {
    Series out = *this;
    for (auto it = out.terms_.begin(); it != out.terms_.end();)
      it = coefficient_is_zero(it->second) ? out.terms_.erase(it) : std::next(it);
    return out;
  }

  Series operator-() const {
    Series out = *this;
    for (auto& [e, c] : out.terms_) c = -c;
    return out;
  }

  friend Series operator+(const Series& a, const Series& b) {
    if (!a.bound_) return b;
    if (!b.bound_) return a;
    check_compatible(a, b);
    Series out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, c);
    out.record_loss(b.loss_);
    return out;
  }
  friend Series operator-(const Series& a, const Series& b) { return a + (-b); }

  friend Series operator*(const Series& a, const Series& b) {
    if (!a.bound_ || !b.bound_) return Series{};
    check_compatible(a, b);
    Series out(a.desc_);
    Exponent e(a.desc_.arity());
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
        out.add_term(e, ca * cb);
      }
    // Dropped mass of a factor propagates through the product.
    auto wa = out.value_of(a), wb = out.value_of(b);
    if (a.loss_ && wb) out.record_loss(*a.loss_ + *wb);
    if (b.loss_ && wa) out.record_loss(*b.loss_ + *wa);
    return out;
  }

  /// Multiply every coefficient by a coefficient-ring element.
  Series scaled(const C& c) const {
    Series out(desc_);
    for (const auto& [e, x] : terms_) out.add_term(e, x * c);
    out.loss_ = loss_;
    if (loss_) {
      auto v = coefficient_value(c);
      if (v) out.loss_ = *loss_ + *v;
    }
    return out;
  }

  /// Multiply by the monomial t^shift.
  Series shifted(const Exponent& shift) const {
    Series out(desc_);
    Exponent f(shift.size());
    for (const auto& [e, x] : terms_) {
      for (size_t k = 0; k < f.size(); ++k) f[k] = e[k] + shift[k];
      out.add_term(f, x);
    }
    out.loss_ = loss_;
    return out;
  }

  /// Same terms on another descriptor (window change); escaping terms become loss.
  Series rewindowed(const RingDescriptor& d) const {
    Series out(d);
    for (const auto& [e, x] : terms_) out.add_term(e, x);
    out.record_loss(loss_);
    return out;
  }

  /// Minimal term value on the stored support (the valuation this descriptor uses).
  std::optional<Rational> value_of(const Series& s) const {
    std::optional<Rational> best;
    for (const auto& [e, c] : s.terms_) {
      auto v = term_value(e, c);
      if (v && (!best || *v < *best)) best = v;
    }
    return best;
  }

 private:
  static void check_compatible(const Series& a, const Series& b) {
    if (!(a.desc_ == b.desc_)) throw Error("series.descriptor_mismatch", "operands live on different rings");
  }

  RingDescriptor desc_;
  bool bound_ = false;
  std::map<Exponent, C> terms_;
  std::optional<Rational> loss_;
};

using DaggerSeries = Series<PadicApprox>;
using RobbaElement = Series<PadicApprox>;
using RelativeRobbaElement = Series<DaggerSeries>;

inline std::optional<Rational> coefficient_floor(const PadicApprox& c) {
  if (!c.is_limited_zero()) return std::nullopt;
  return Rational(c.abs_precision());
}

// ---- series-valued coefficients (relative Robba rings R_A) ----------------

struct NormValue {
  std::optional<Rational> value;  // nullopt: +infinity
  bool limited_may_dominate = false;
};

/// Gauss value min_I vp(a_I); the Gauss norm is p^{-value}.
NormValue gauss_value(const DaggerSeries& a);

/// min_I vp(a_I) - |I|/D, the valuation of the norm at radius p^{1/D};
/// nullopt decay means D = infinity (Gauss norm).
std::optional<Rational> rho_value(const DaggerSeries& a, const std::optional<Rational>& decay);

/// Smallest c with vp(a_I) >= |I|/D - c on the support: the fringe-membership witness.
Rational fringe_constant(const DaggerSeries& a, long decay_D);

template <class C>
std::optional<Rational> coefficient_value(const Series<C>& c) {
  std::optional<Rational> best;
  for (const auto& [e, x] : c.terms()) {
    auto v = coefficient_value(x);
    if (v && (!best || *v < *best)) best = v;
  }
  return best;
}
template <class C>
bool coefficient_is_zero(const Series<C>& c) {
  return c.is_zero();
}
template <class C>
bool coefficient_is_limited(const Series<C>& c) {
  return c.is_zero() && !c.terms().empty();
}
template <class C>
std::optional<Rational> coefficient_floor(const Series<C>& c) {
  return c.limited_floor();
}
template <class C>
Series<C> coefficient_one_like(const Series<C>& c, const RingDescriptor&) {
  const auto& d = c.descriptor();
  C proto = c.terms().empty() ? C{} : c.terms().begin()->second;
  return Series<C>::constant(d, coefficient_one_like(proto, d));
}
template <class C>
Series<C> coefficient_scale(const Series<C>& c, const Rational& factor, const RingDescriptor&) {
  Series<C> out(c.descriptor());
  for (const auto& [e, x] : c.terms()) out.add_term(e, coefficient_scale(x, factor, c.descriptor()));
  return out;
}
template <class C>
Series<C> invert_series(const Series<C>& u);
template <class C>
Series<C> coefficient_inverse(const Series<C>& c) {
  return invert_series(c);
}
template <class C>
Series<C> frobenius_substitute(const Series<C>& x, long q);
template <class C>
Series<C> coefficient_frobenius(const Series<C>& c, long q) {
  return frobenius_substitute(c, q);
}
std::string coefficient_string(const DaggerSeries& c);

// ---- valuations -----------------------------------------------------------

struct SlopeValue {
  std::optional<Rational> value;  // nullopt: +infinity
  bool window_limited = false;
};

/// w_s(x) = min_i v(x_i) + s·i (componentwise slopes for several Robba variables).
template <class C>
SlopeValue w_slope(const Series<C>& x, const std::vector<Rational>& s) {
  const auto& d = x.descriptor();
  if (s.size() != d.arity()) throw Error("series.slope_out_of_range", "slope vector has wrong length");
  for (const auto& sj : s)
    if (sj <= 0 || sj > d.slope_r) throw Error("series.slope_out_of_range", "slope must lie in (0, r]");
  SlopeValue out;
  Exponent arg;
  for (const auto& [e, c] : x.terms()) {
    auto v = coefficient_value(c);
    if (!v) continue;
    for (size_t j = 0; j < e.size(); ++j) *v += s[j] * e[j];
    if (!out.value || *v < *out.value) {
      out.value = v;
      arg = e;
    }
  }
  if (out.value) {
    for (size_t j = 0; j < arg.size(); ++j) {
      bool lo_open = d.kind != RingKind::RobbaPlus;
      if ((lo_open && arg[j] == d.window[j].first) || arg[j] == d.window[j].second) out.window_limited = true;
    }
  }
  return out;
}

template <class C>
SlopeValue w_slope(const Series<C>& x, const Rational& s) {
  return w_slope(x, std::vector<Rational>(x.descriptor().arity(), s));
}

// ---- unit recognition -----------------------------------------------------

namespace detail {

template <class C>
bool is_contraction(const Series<C>& a) {
  const auto& d = a.descriptor();
  if (a.is_zero()) return true;
  if (!d.is_robba()) {
    auto v = coefficient_value(a);
    return v && *v > 0;
  }
  auto w = w_slope(a, d.slope_r);
  if (!w.value || *w.value <= 0) return false;
  // Concavity of s -> w_s(a): positivity at s = r and as s -> 0+ covers (0, r].
  for (const auto& [e, c] : a.terms()) {
    auto v = coefficient_value(c);
    if (!v) continue;
    if (*v < 0) return false;
    if (*v == 0) {
      long dir = 0;
      for (long x : e) dir += x;
      if (dir <= 0) return false;
    }
  }
  return true;
}

}  // namespace detail

/**
 * Inverse of u = c·t^k·(1 - a) with c an invertible coefficient and a
 * topologically nilpotent on the window, computed as c^{-1} t^{-k} Σ a^n.
 * Throws series.not_a_recognized_unit when no such decomposition is found;
 * that is a representability limit, not a proof that u is not a unit.
 */
template <class C>
Series<C> invert_series(const Series<C>& u) {
  const auto& d = u.descriptor();
  if (!u.bound()) throw Error("series.not_a_recognized_unit", "zero has no inverse");
  std::optional<Rational> best;
  for (const auto& [e, c] : u.terms()) {
    auto v = u.term_value(e, c);
    if (v && (!best || *v < *best)) best = v;
  }
  if (!best) throw Error("series.not_a_recognized_unit", "zero has no inverse");
  for (const auto& [e0, c0] : u.terms()) {
    auto v = u.term_value(e0, c0);
    if (!v || *v != *best) continue;
    bool monomial_shift = false;
    for (long x : e0) monomial_shift |= (x != 0);
    if (monomial_shift && !d.is_robba()) continue;
    if (monomial_shift && d.kind == RingKind::RobbaPlus) continue;
    C cinv;
    try {
      cinv = coefficient_inverse(c0);
    } catch (const Error&) {
      continue;
    }
    Exponent neg(e0.size());
    for (size_t k = 0; k < e0.size(); ++k) neg[k] = -e0[k];
    const Series<C> normalized = u.scaled(cinv).shifted(neg);
    if (normalized.truncation_loss() && !u.truncation_loss()) continue;
    const Series<C> one = Series<C>::constant(d, coefficient_one_like(c0, d));
    const Series<C> a = one - normalized;
    if (!detail::is_contraction(a)) continue;

    long span = 0;
    for (const auto& [lo, hi] : d.window) span += hi - lo;
    const long cap = d.precision + span + 2;
    Series<C> sum = one, power = one;
    bool converged = false;
    for (long n = 1; n <= cap; ++n) {
      power = (power * a).pruned();
      sum.record_loss(power.truncation_loss());
      auto pv = coefficient_value(power);
      if (power.is_zero() || (pv && *pv >= d.precision)) {
        if (pv) sum.record_loss(pv);
        converged = true;
        break;
      }
      sum = sum + power;
    }
    if (!converged) throw Error("series.no_convergence", "geometric series did not settle on the window");
    return sum.scaled(cinv).shifted(neg);
  }
  throw Error("series.not_a_recognized_unit", "no monomial-shift plus geometric-series certificate");
}

// ---- derivations, residues, substitutions ----------------------------------

/// ∂/∂t_var, termwise i·x_i t^{i-1}.
template <class C>
Series<C> d_dt(const Series<C>& x, size_t var) {
  Series<C> out(x.descriptor());
  for (const auto& [e, c] : x.terms()) {
    if (e[var] == 0) continue;
    Exponent f = e;
    f[var] -= 1;
    out.add_term(f, coefficient_scale(c, Rational(e[var]), x.descriptor()));
  }
  out.record_loss(x.truncation_loss());
  return out;
}

/// t_var ∂/∂t_var, termwise i·x_i t^i.
template <class C>
Series<C> euler_derivative(const Series<C>& x, size_t var) {
  Series<C> out(x.descriptor());
  for (const auto& [e, c] : x.terms()) {
    if (e[var] == 0) continue;
    out.add_term(e, coefficient_scale(c, Rational(e[var]), x.descriptor()));
  }
  out.record_loss(x.truncation_loss());
  return out;
}

/// y with ∂y/∂t_var = x and no t_var-constant part. Needs the t_var^{-1}
/// coefficients to be provably zero.
template <class C>
Series<C> antiderivative(const Series<C>& x, size_t var) {
  for (const auto& [e, c] : x.terms()) {
    if (e[var] != -1) continue;
    if (!coefficient_is_zero(c)) throw Error("series.residue_obstruction", "t^-1 coefficient is nonzero");
    throw Error("series.ambiguous_residue", "t^-1 coefficient is zero only at working precision");
  }
  Series<C> out(x.descriptor());
  for (const auto& [e, c] : x.terms()) {
    Exponent f = e;
    f[var] += 1;
    out.add_term(f, coefficient_scale(c, Rational(1) / f[var], x.descriptor()));
  }
  out.record_loss(x.truncation_loss());
  return out;
}

/// Coefficient of t_1^{-1}···t_n^{-1}.
template <class C>
C residue(const Series<C>& x) {
  return x.coefficient(Exponent(x.descriptor().arity(), -1));
}

/// Standard Frobenius lift: t^I ↦ t^{qI}, applied recursively to series coefficients.
template <class C>
Series<C> frobenius_substitute(const Series<C>& x, long q) {
  Series<C> out(x.descriptor());
  for (const auto& [e, c] : x.terms()) {
    Exponent f = e;
    for (long& v : f) v *= q;
    out.add_term(f, coefficient_frobenius(c, q));
  }
  out.record_loss(x.truncation_loss());
  return out;
}

/// t ↦ t^e on the Robba variables (degree-e Kummer cover).
template <class C>
Series<C> kummer_substitute(const Series<C>& x, long e) {
  if (e < 1) throw Error("series.bad_degree", "Kummer degree must be positive");
  Series<C> out(x.descriptor());
  for (const auto& [ex, c] : x.terms()) {
    Exponent f = ex;
    for (long& v : f) v *= e;
    out.add_term(f, c);
  }
  out.record_loss(x.truncation_loss());
  return out;
}

/// Series records "[[e1,...,\"u*p^v@M\"], ...]".
template <class C>
std::string to_records(const Series<C>& x) {
  std::string out = "[";
  bool first = true;
  for (const auto& [e, c] : x.terms()) {
    if (!first) out += ',';
    first = false;
    out += '[';
    for (long v : e) out += std::to_string(v) + ',';
    out += coefficient_string(c) + ']';
  }
  return out + "]";
}

}  // namespace ovc
