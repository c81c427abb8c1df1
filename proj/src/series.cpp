#include "ovc/series.hpp"

namespace ovc {

std::string to_string(RingKind kind) {
  switch (kind) {
    case RingKind::Tate:
      return "tate";
    case RingKind::DaggerFringe:
      return "dagger-fringe";
    case RingKind::Robba:
      return "robba";
    case RingKind::RobbaPlus:
      return "robba-plus";
    case RingKind::MultiRobba:
      return "multi-robba";
  }
  return "?";
}

RingKind parse_ring_kind(const std::string& text) {
  for (RingKind k : {RingKind::Tate, RingKind::DaggerFringe, RingKind::Robba, RingKind::RobbaPlus,
                     RingKind::MultiRobba})
    if (to_string(k) == text) return k;
  throw Error("series.bad_descriptor", "unknown ring kind '" + text + "'");
}

bool RingDescriptor::in_window(const Exponent& e) const {
  for (size_t j = 0; j < e.size(); ++j)
    if (e[j] < window[j].first || e[j] > window[j].second) return false;
  return true;
}

void RingDescriptor::validate() const {
  auto bad = [](const std::string& why) { return Error("series.bad_descriptor", why); };
  if (!is_prime(p)) throw Error("padic.non_prime", std::to_string(p) + " is not prime");
  if (precision < 1) throw bad("precision must be positive");
  if (window.size() != variables.size()) throw bad("one window per variable required");
  for (const auto& [lo, hi] : window) {
    if (lo > hi) throw bad("window has lo > hi");
    if ((kind == RingKind::Tate || kind == RingKind::DaggerFringe || kind == RingKind::RobbaPlus) && lo != 0)
      throw bad("power-series kinds need lo = 0");
  }
  if (decay_D < 1) throw bad("decay D must be at least 1");
  if (slope_r <= 0) throw bad("slope r must be positive");
  long qq = q;
  while (qq % p == 0 && qq > 1) qq /= p;
  if (qq != 1 || q < p) throw bad("q must be a positive power of p");
  if (kind == RingKind::Robba && arity() != 1) throw bad("robba kind has one variable");
}

namespace {

RingDescriptor make(RingKind kind, std::vector<std::string> vars, long lo, long hi, long p, int precision) {
  RingDescriptor d;
  d.kind = kind;
  d.window.assign(vars.size(), {lo, hi});
  d.variables = std::move(vars);
  d.p = p;
  d.q = p;
  d.precision = precision;
  return d;
}

}  // namespace

RingDescriptor tate_ring(std::vector<std::string> vars, long hi, long p, int precision) {
  auto d = make(RingKind::Tate, std::move(vars), 0, hi, p, precision);
  d.validate();
  return d;
}

RingDescriptor dagger_ring(std::vector<std::string> vars, long hi, long decay_D, long p, int precision) {
  auto d = make(RingKind::DaggerFringe, std::move(vars), 0, hi, p, precision);
  d.decay_D = decay_D;
  d.validate();
  return d;
}

RingDescriptor robba_ring(const std::string& var, long lo, long hi, Rational slope, long p, int precision) {
  auto d = make(RingKind::Robba, {var}, lo, hi, p, precision);
  d.slope_r = slope;
  d.validate();
  return d;
}

RingDescriptor multi_robba_ring(std::vector<std::string> vars, long lo, long hi, Rational slope, long p,
                                int precision) {
  auto d = make(RingKind::MultiRobba, std::move(vars), lo, hi, p, precision);
  d.slope_r = slope;
  d.validate();
  return d;
}

NormValue gauss_value(const DaggerSeries& a) {
  NormValue out;
  std::optional<long> floor;
  for (const auto& [e, c] : a.terms()) {
    if (c.is_limited_zero()) {
      if (!floor || c.abs_precision() < *floor) floor = c.abs_precision();
      continue;
    }
    if (c.is_zero()) continue;
    if (!out.value || c.valuation() < *out.value) out.value = Rational(c.valuation());
  }
  if (floor && (!out.value || Rational(*floor) <= *out.value)) out.limited_may_dominate = true;
  return out;
}

std::optional<Rational> rho_value(const DaggerSeries& a, const std::optional<Rational>& decay) {
  std::optional<Rational> best;
  for (const auto& [e, c] : a.terms()) {
    if (c.is_zero()) continue;
    Rational v = c.valuation();
    if (decay) {
      long deg = 0;
      for (long x : e) deg += x;
      v -= Rational(deg) / *decay;
    }
    if (!best || v < *best) best = v;
  }
  return best;
}

Rational fringe_constant(const DaggerSeries& a, long decay_D) {
  Rational c = 0;
  for (const auto& [e, x] : a.terms()) {
    if (x.is_zero()) continue;
    long deg = 0;
    for (long v : e) deg += v;
    Rational need = Rational(deg) / decay_D - x.valuation();
    if (need > c) c = need;
  }
  return c;
}

std::string coefficient_string(const DaggerSeries& c) { return to_records(c); }

}  // namespace ovc
