#include "ovc/groebner.hpp"

#include <algorithm>

namespace ovc {

namespace {

long total_degree(const Exponent& e) {
  long s = 0;
  for (long x : e) s += x;
  return s;
}

const long kStepCap = 200000;

// 1-leading term among the nonzero coefficients, or nullptr if none.
const std::pair<const Exponent, PadicApprox>* one_leading(const DaggerSeries& a) {
  const std::pair<const Exponent, PadicApprox>* best = nullptr;
  for (const auto& kv : a.terms()) {
    if (kv.second.is_zero()) continue;
    if (!best || kv.second.valuation() < best->second.valuation() ||
        (kv.second.valuation() == best->second.valuation() && deglex_less(best->first, kv.first)))
      best = &kv;
  }
  return best;
}

mpz_class floor_div(const Rational& q) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

Exponent minus(const Exponent& a, const Exponent& b) {
  Exponent out(a.size());
  for (size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

DaggerSeries times_term(const DaggerSeries& g, const Exponent& shift, const PadicApprox& c) {
  return g.scaled(c).shifted(shift);
}

const LeadingDatum* find_divisor(const Exponent& I, const std::vector<LeadingDatum>& basis) {
  for (const auto& b : basis)
    if (divides(b.leading_index, I)) return &b;
  return nullptr;
}

}  // namespace

Ordering deglex_compare(const Exponent& a, const Exponent& b) {
  if (a.size() != b.size()) throw Error("groebner.arity", "multi-indices of different length");
  long da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db ? Ordering::Less : Ordering::Greater;
  for (size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return a[k] < b[k] ? Ordering::Greater : Ordering::Less;
  return Ordering::Equal;
}

bool divides(const Exponent& a, const Exponent& b) {
  for (size_t k = 0; k < a.size(); ++k)
    if (a[k] > b[k]) return false;
  return true;
}

LeadingDatum rho_leading_term(const DaggerSeries& a, const Decay& decay) {
  const std::pair<const Exponent, PadicApprox>* best = nullptr;
  Rational best_v;
  for (const auto& kv : a.terms()) {
    if (kv.second.is_zero()) continue;
    Rational v = kv.second.valuation();
    if (decay) v -= Rational(total_degree(kv.first)) / *decay;
    if (!best || v < best_v || (v == best_v && deglex_less(best->first, kv.first))) {
      best = &kv;
      best_v = v;
    }
  }
  if (!best) throw Error("groebner.zero_input", "zero has no leading term");
  return {a, decay, best->first, best->second};
}

long stable_decay(const DaggerSeries& a) {
  auto lead = rho_leading_term(a, std::nullopt);
  long vI = lead.leading_coeff.valuation(), dI = total_degree(lead.leading_index);
  Rational need = 0;
  for (const auto& [e, c] : a.terms()) {
    if (c.is_zero() || e == lead.leading_index) continue;
    long dJ = total_degree(e), vJ = c.valuation();
    // Only strictly smaller terms of higher degree can overtake as ρ grows.
    if (dJ > dI && vJ > vI) need = std::max(need, Rational(Rational(dJ - dI) / (vJ - vI)));
  }
  mpz_class fl = need.get_num() / need.get_den();
  return fl.get_si() + 1;
}

DivisionResult divide(const DaggerSeries& f, const std::vector<LeadingDatum>& basis) {
  DivisionResult out;
  const auto& d = f.descriptor();
  out.remainder = DaggerSeries(d);
  out.quotients.assign(basis.size(), DaggerSeries(d));
  DaggerSeries rest = f.pruned();
  // Terms M digits below the input's Gauss value count as zero at working precision.
  auto g0 = gauss_value(f).value;
  const std::optional<long> cap = g0 ? std::optional<long>(mpz_class(floor_div(*g0)).get_si() + d.precision)
                                     : std::nullopt;
  while (true) {
    auto lead = one_leading(rest);
    if (!lead) break;
    if (cap && lead->second.valuation() >= *cap) {
      out.precision_floor = *cap;
      break;
    }
    if (++out.steps > kStepCap) throw Error("groebner.precision_exhausted", "division did not terminate");
    Exponent I = lead->first;
    PadicApprox c = lead->second;
    const LeadingDatum* g = find_divisor(I, basis);
    if (!g) {
      out.remainder.add_term(I, c);
      DaggerSeries drop(d);
      drop.add_term(I, -c);
      rest = (rest + drop).pruned();
      continue;
    }
    PadicApprox q = c * g->leading_coeff.inverse();
    Exponent shift = minus(I, g->leading_index);
    size_t k = static_cast<size_t>(g - basis.data());
    out.quotients[k].add_term(shift, q);
    rest = (rest - times_term(g->element, shift, q)).pruned();
    if (rest.truncation_loss()) out.window_truncated = true;
  }
  if (f.truncation_loss()) out.window_truncated = true;
  return out;
}

LeadingBasis complete_leading_basis(const std::vector<DaggerSeries>& gens) {
  LeadingBasis out;
  std::vector<LeadingDatum> G;
  for (const auto& g : gens) {
    auto p = g.pruned();
    if (p.is_zero()) throw Error("groebner.zero_input", "generator is zero at working precision");
    G.push_back(rho_leading_term(p, std::nullopt));
  }
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t j = 1; j < G.size(); ++j)
    for (size_t i = 0; i < j; ++i) pairs.emplace_back(i, j);
  while (!pairs.empty()) {
    auto [i, j] = pairs.front();
    pairs.erase(pairs.begin());
    if (++out.spairs > kStepCap) throw Error("groebner.precision_exhausted", "completion did not terminate");
    const auto& a = G[i];
    const auto& b = G[j];
    Exponent L(a.leading_index.size());
    for (size_t k = 0; k < L.size(); ++k) L[k] = std::max(a.leading_index[k], b.leading_index[k]);
    // Coprime leading monomials give an S-pair that reduces to zero.
    if (minus(L, a.leading_index) == b.leading_index) continue;
    DaggerSeries s = times_term(a.element, minus(L, a.leading_index), a.leading_coeff.inverse()) -
                     times_term(b.element, minus(L, b.leading_index), b.leading_coeff.inverse());
    auto r = divide(s, G);
    out.window_truncated |= r.window_truncated;
    auto rem = r.remainder.pruned();
    if (rem.is_zero()) continue;
    G.push_back(rho_leading_term(rem, std::nullopt));
    for (size_t k = 0; k + 1 < G.size(); ++k) pairs.emplace_back(k, G.size() - 1);
  }
  // Minimalize: keep one element per minimal leading index.
  std::vector<bool> keep(G.size(), true);
  for (size_t i = 0; i < G.size(); ++i)
    for (size_t j = 0; j < G.size() && keep[i]; ++j) {
      if (i == j || !keep[j]) continue;
      if (divides(G[j].leading_index, G[i].leading_index) &&
          (G[j].leading_index != G[i].leading_index || j < i))
        keep[i] = false;
    }
  for (size_t i = 0; i < G.size(); ++i)
    if (keep[i]) out.elements.push_back(G[i]);
  std::sort(out.elements.begin(), out.elements.end(),
            [](const LeadingDatum& x, const LeadingDatum& y) { return deglex_less(x.leading_index, y.leading_index); });
  for (const auto& e : out.elements) out.decay = std::max(out.decay, stable_decay(e.element));
  return out;
}

ReductionResult reduce_element(const DaggerSeries& y, const DaggerSeries& z, const std::vector<LeadingDatum>& basis,
                               const Decay& decay) {
  ReductionResult out;
  auto cert = divide(y - z, basis);
  if (!cert.remainder.pruned().is_zero())
    throw Error("groebner.membership_failed", "y - z does not reduce to zero against the basis");
  out.membership_at_precision = true;
  auto gv = [](const DaggerSeries& a) { return gauss_value(a).value; };
  // "value >= bound" with nullopt as +infinity.
  auto ge = [](const std::optional<Rational>& v, const std::optional<Rational>& b) { return !v || (b && *v >= *b); };
  out.gauss_y = gv(y);
  DaggerSeries zj = z.pruned();
  while (!ge(gv(zj), out.gauss_y)) {
    if (++out.steps > kStepCap) throw Error("groebner.precision_exhausted", "reduction loop did not terminate");
    const DaggerSeries diff = zj - y;
    auto lead = one_leading(diff);
    if (!lead) break;
    const LeadingDatum* g = find_divisor(lead->first, basis);
    if (!g) throw Error("groebner.membership_failed", "leading term of z_j - y not divisible by any basis leading term");
    Exponent shift = minus(lead->first, g->leading_index);
    PadicApprox q = lead->second * g->leading_coeff.inverse();
    zj = (zj - times_term(g->element, shift, q)).pruned();
  }
  out.u = zj;
  out.gauss_u = gv(zj);
  out.rho_u = rho_value(zj, decay);
  out.rho_z = rho_value(z, decay);
  out.gauss_ok = ge(out.gauss_u, out.gauss_y);
  out.rho_ok = ge(out.rho_u, out.rho_z);
  return out;
}

HadamardResult hadamard_check(const DaggerSeries& x, const Decay& D_A, const Rational& D_B, const Rational& eps) {
  if (eps <= 0 || eps > 1) throw Error("groebner.bad_epsilon", "epsilon must lie in (0, 1]");
  if (D_B <= 0) throw Error("groebner.bad_decay", "decay must be positive");
  HadamardResult out;
  Rational invA = D_A ? Rational(1) / *D_A : Rational(0);
  out.inv_decay_C = (1 - eps) * invA + eps / D_B;
  Decay DC;
  if (out.inv_decay_C != 0) DC = 1 / out.inv_decay_C;
  out.value_C = rho_value(x, DC);
  auto vA = rho_value(x, D_A), vB = rho_value(x, D_B);
  if (vA && vB) out.bound = (1 - eps) * *vA + eps * *vB;
  out.pass = !out.value_C || (out.bound && *out.value_C >= *out.bound);
  return out;
}

}  // namespace ovc
