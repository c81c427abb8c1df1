#include "ovc/cohomology.hpp"

#include <algorithm>

#include "complex.hpp"

namespace ovc {

using detail::Chain;
using detail::ComplexSpec;
using detail::DegreeData;
using detail::Key;
using detail::Term;

namespace {

PadicApprox int_scalar(long v, long p, int prec) { return PadicApprox::from_integer(v, p, prec); }

// Largest exponent component over all connection entries; -1 when all vanish.
long max_degree(const std::vector<SeriesMatrix>& G) {
  long best = -1;
  for (const auto& A : G)
    for (size_t i = 0; i < A.rows(); ++i)
      for (size_t j = 0; j < A.cols(); ++j)
        for (const auto& [e, c] : A(i, j).terms())
          if (!c.is_exact_zero())
            for (long x : e) best = std::max(best, x < 0 ? -x : x);
  return best;
}

void require_integrable(const DaggerModule& m) {
  m.validate();
  if (m.rank() == 0 || m.arity() < 2) return;
  auto r = check_integrability(m);
  if (!r.pass) throw Error("cohomology.not_integrable", "connection has curvature: " + r.detail);
}

// x side: basis x^e e_k ω_J with ω_i = dx_i or dx_i/x_i.
ComplexSpec mw_spec(const DaggerModule& m) {
  ComplexSpec s;
  s.vars = s.box_vars = m.arity();
  s.rank = m.rank();
  s.p = m.ring.p;
  s.precision = m.ring.precision;
  s.box = [n = s.vars](long w) { return detail::Box(n, {0, w}); };
  // nilpotent parts of Γ chain through up to rank shifts before a preimage closes
  s.spill = std::max(1L, static_cast<long>(s.rank) * (max_degree(m.Gamma) + 1));
  s.d = [G = m.Gamma, gauge = m.gauge, p = s.p, prec = s.precision, n = s.vars, r = s.rank](const Key& k,
                                                                                         std::vector<Term>& out) {
    for (size_t i = 0; i < n; ++i) {
      if (k.J >> i & 1u) continue;
      unsigned J2 = k.J | (1u << i);
      int sg = detail::wedge_sign(k.J, i);
      if (k.e[i] != 0) {
        Exponent e = k.e;
        if (gauge[i] == Gauge::Dx) e[i] -= 1;
        out.push_back({{J2, k.comp, e}, int_scalar(sg * k.e[i], p, prec)});
      }
      for (size_t row = 0; row < r; ++row)
        for (const auto& [f, c] : G[i](row, k.comp).terms()) {
          Exponent e = k.e;
          for (size_t v = 0; v < n; ++v) e[v] += f[v];
          out.push_back({{J2, row, e}, sg < 0 ? -c : c});
        }
    }
  };
  return s;
}

// t side, t_i = 1/x_i, same form basis: ∂/∂x = -t^2 ∂/∂t, x ∂/∂x = -t ∂/∂t, Γ(x) = Γ(1/t).
ComplexSpec t_spec(const DaggerModule& m) {
  ComplexSpec s;
  s.vars = s.box_vars = m.arity();
  s.rank = m.rank();
  s.p = m.ring.p;
  s.precision = m.ring.precision;
  s.spill = static_cast<long>(s.rank) * (max_degree(m.Gamma) + 1) + 1;
  s.d = [G = m.Gamma, gauge = m.gauge, p = s.p, prec = s.precision, n = s.vars, r = s.rank](const Key& k,
                                                                                         std::vector<Term>& out) {
    for (size_t i = 0; i < n; ++i) {
      if (k.J >> i & 1u) continue;
      unsigned J2 = k.J | (1u << i);
      int sg = detail::wedge_sign(k.J, i);
      if (k.e[i] != 0) {
        Exponent e = k.e;
        if (gauge[i] == Gauge::Dx) e[i] += 1;
        out.push_back({{J2, k.comp, e}, int_scalar(-sg * k.e[i], p, prec)});
      }
      for (size_t row = 0; row < r; ++row)
        for (const auto& [f, c] : G[i](row, k.comp).terms()) {
          Exponent e = k.e;
          for (size_t v = 0; v < n; ++v) e[v] -= f[v];
          out.push_back({{J2, row, e}, sg < 0 ? -c : c});
        }
    }
  };
  return s;
}

bool all_positive(const Exponent& e) {
  for (long x : e)
    if (x < 1) return false;
  return true;
}

// Variables in which ∇ is visibly regular at infinity: every term of Γ_i that
// becomes polar in t_i = 1/x_i sits strictly above the diagonal, or every one
// strictly below, so a shearing gauge removes the poles. Anything else may be
// irregular there, where the finite windows undercount coboundaries on the t side.
std::vector<size_t> possibly_irregular(const DaggerModule& m) {
  std::vector<size_t> out;
  for (size_t i = 0; i < m.arity(); ++i) {
    const long first_polar = m.gauge[i] == Gauge::Dx ? 0 : 1;
    bool upper = true, lower = true;
    const SeriesMatrix& G = m.Gamma[i];
    for (size_t a = 0; a < G.rows(); ++a)
      for (size_t b = 0; b < G.cols(); ++b) {
        const auto& terms = G(a, b).terms();
        for (const auto& [e, c] : terms) {
          if (c.is_exact_zero() || e[i] < first_polar) continue;
          if (a >= b) upper = false;
          if (a <= b) lower = false;
        }
      }
    if (!upper && !lower) out.push_back(i);
  }
  return out;
}

void flag_irregular(CohomologyReport& rep, const DaggerModule& m, bool mark) {
  auto bad = possibly_irregular(m);
  if (bad.empty()) return;
  std::string names;
  for (size_t i : bad) names += (names.empty() ? "" : ",") + m.ring.variables[i];
  rep.notes.push_back("not verified regular at infinity in " + names + ": t-side dimensions are window-model values");
  if (mark) rep.reliable.assign(rep.reliable.size(), false);
}

ComplexSpec compact_spec(const DaggerModule& m) {
  ComplexSpec s = t_spec(m);
  s.box = [n = s.vars](long w) { return detail::Box(n, {1, w}); };
  s.keep = all_positive;
  return s;
}

ComplexSpec robba_spec(const RobbaModule& m) {
  ComplexSpec s;
  s.vars = s.box_vars = 1;
  s.rank = m.rank();
  s.p = m.ring.p;
  s.precision = m.ring.precision;
  s.box = [](long w) { return detail::Box(1, {-w, w}); };
  s.spill = std::max(1L, static_cast<long>(s.rank) * (max_degree({m.N}) + 1));
  s.d = [N = m.N, p = s.p, prec = s.precision, r = s.rank](const Key& k, std::vector<Term>& out) {
    if (k.J) return;
    if (k.e[0] != 0) out.push_back({{1u, k.comp, k.e}, int_scalar(k.e[0], p, prec)});
    for (size_t row = 0; row < r; ++row)
      for (const auto& [f, c] : N(row, k.comp).terms()) out.push_back({{1u, row, {k.e[0] + f[0]}}, c});
  };
  return s;
}

// A copy of `base` whose window covers every exponent of the chain.
RingDescriptor covering(RingDescriptor base, const Chain& c) {
  for (const auto& [k, x] : c)
    for (size_t i = 0; i < k.e.size() && i < base.window.size(); ++i) {
      base.window[i].first = std::min(base.window[i].first, k.e[i]);
      base.window[i].second = std::max(base.window[i].second, k.e[i]);
    }
  return base;
}

std::optional<RingDescriptor> form_ring(const FormElement& f) {
  for (const auto& [J, mv] : f)
    for (const auto& x : mv)
      if (x.bound()) return x.descriptor();
  return std::nullopt;
}

RingDescriptor widened(RingDescriptor d, long lo, long hi) {
  for (auto& [a, b] : d.window) {
    a = std::min(a, lo);
    b = std::max(b, hi);
  }
  return d;
}

CohomologyReport new_report(const std::string& title, size_t degrees, int precision) {
  CohomologyReport rep;
  rep.title = title;
  rep.resize(degrees);
  rep.precision = precision;
  return rep;
}

std::vector<DegreeData> all_degrees(const ComplexSpec& s, long w, bool gens) {
  std::vector<DegreeData> out;
  for (size_t k = 0; k <= s.vars; ++k) out.push_back(detail::compute_degree(s, k, w, gens));
  return out;
}

void check_window(long w) {
  if (w < 1 || w > 10000) throw Error("cohomology.bad_window", "window must lie in [1, 10000]");
}

}  // namespace

RingDescriptor compact_ring(const DaggerModule& m, long lo, long hi) {
  std::vector<std::string> names;
  for (const auto& v : m.ring.variables) names.push_back("t_" + v);
  if (names.size() == 1) return robba_ring(names[0], lo, hi, 1, m.ring.p, m.ring.precision);
  return multi_robba_ring(names, lo, hi, 1, m.ring.p, m.ring.precision);
}

CohomologyReport mw_cohomology(const DaggerModule& m, const CohomologyOptions& opt) {
  require_integrable(m);
  check_window(opt.window);
  ComplexSpec s = mw_spec(m);
  auto rep = new_report("de Rham cohomology on A^" + std::to_string(m.arity()), m.arity() + 1, m.ring.precision);
  RingDescriptor ring = widened(m.ring, 0, opt.window + s.spill);
  auto data = all_degrees(s, opt.window, opt.generators);
  for (size_t k = 0; k < data.size(); ++k) detail::fill_degree(rep, k, data[k], s, ring, "x");
  rep.notes.push_back("window x-degree <= " + std::to_string(opt.window));
  return rep;
}

CohomologyReport compact_support_cohomology(const DaggerModule& m, const CohomologyOptions& opt) {
  require_integrable(m);
  check_window(opt.window);
  const size_t n = m.arity();
  ComplexSpec s = compact_spec(m);
  auto rep = new_report("compact-support cohomology on A^" + std::to_string(n), 2 * n + 1, m.ring.precision);
  RingDescriptor ring = compact_ring(m, -(opt.window + s.spill), opt.window + s.spill);
  auto data = all_degrees(s, opt.window, opt.generators);
  for (size_t j = 0; j <= n; ++j) detail::fill_degree(rep, n + j, data[j], s, ring, "t");
  rep.notes.push_back("canonical representatives: t-exponents in [1, " + std::to_string(opt.window) + "]");
  flag_irregular(rep, m, true);
  for (const auto& g : m.gauge)
    if (g == Gauge::Dlog) {
      rep.notes.push_back("dlog gauge: log forms on the x side, canonical part taken against dx/x");
      break;
    }
  return rep;
}

CohomologyReport robba_cohomology(const RobbaModule& m, const CohomologyOptions& opt) {
  m.validate();
  check_window(opt.window);
  ComplexSpec s = robba_spec(m);
  auto rep = new_report("local cohomology over the Robba ring", 2, m.ring.precision);
  RingDescriptor ring = widened(m.ring, -(opt.window + s.spill), opt.window + s.spill);
  auto data = all_degrees(s, opt.window, opt.generators);
  for (size_t k = 0; k < 2; ++k) detail::fill_degree(rep, k, data[k], s, ring, "t");
  rep.notes.push_back("Laurent window [-" + std::to_string(opt.window) + ", " + std::to_string(opt.window) + "]");
  return rep;
}

FormElement mw_differential(const DaggerModule& m, const FormElement& w) {
  ComplexSpec s = mw_spec(m);
  Chain out = detail::apply_d(s, detail::from_form(w));
  return detail::to_form(out, m.rank(), covering(form_ring(w).value_or(m.ring), out));
}

FormElement compact_differential(const DaggerModule& m, const FormElement& v) {
  ComplexSpec s = compact_spec(m);
  Chain in = detail::from_form(v);
  for (auto it = in.begin(); it != in.end();) it = all_positive(it->first.e) ? std::next(it) : in.erase(it);
  Chain out = detail::apply_d(s, in);
  return detail::to_form(out, m.rank(), covering(form_ring(v).value_or(compact_ring(m, 1, 1)), out));
}

FormElement compact_canonical(const DaggerModule& m, const FormElement& v) {
  Chain in = detail::from_form(v);
  for (auto it = in.begin(); it != in.end();) it = all_positive(it->first.e) ? std::next(it) : in.erase(it);
  return detail::to_form(in, m.rank(), form_ring(v).value_or(compact_ring(m, 1, 1)));
}

namespace {

// ω_J = Π_{j∈J} (-c_j) dt_J/t_J with c_j = t_j^{-1} (dx) or 1 (dlog).
FormElement convert_basis(const DaggerModule& m, const FormElement& v, bool to_dlog) {
  Chain out;
  for (const auto& [k0, c0] : detail::from_form(v)) {
    Key k = k0;
    PadicApprox c = c0;
    for (size_t j : detail::mask_to_indices(k.J)) {
      c = -c;
      if (m.gauge[j] == Gauge::Dx) k.e[j] += to_dlog ? -1 : 1;
    }
    out.emplace(k, c);
  }
  return detail::to_form(out, m.rank(), covering(form_ring(v).value_or(compact_ring(m, 0, 0)), out));
}

// (-1)^{#{(a, b) : a ∈ J, b ∈ K, a > b}}: ω_J ∧ ω_K against ω_{J ∪ K}.
int merge_sign(const std::vector<size_t>& J, const std::vector<size_t>& K) {
  int inv = 0;
  for (size_t a : J)
    for (size_t b : K)
      if (a > b) ++inv;
  return inv % 2 ? -1 : 1;
}

}  // namespace

FormElement to_dlog_basis(const DaggerModule& m, const FormElement& v) { return convert_basis(m, v, true); }
FormElement from_dlog_basis(const DaggerModule& m, const FormElement& v) { return convert_basis(m, v, false); }

PadicApprox residue_pairing(const DaggerModule& m, const FormElement& v, const FormElement& w) {
  const size_t n = m.arity();
  std::optional<size_t> dv, dw;
  for (const auto& [J, x] : v) {
    if (dv && *dv != J.size()) throw Error("cohomology.degree_mismatch", "v mixes form degrees");
    dv = J.size();
  }
  for (const auto& [J, x] : w) {
    if (dw && *dw != J.size()) throw Error("cohomology.degree_mismatch", "w mixes form degrees");
    dw = J.size();
  }
  if (dv && dw && *dv + *dw != n) throw Error("cohomology.degree_mismatch", "total form degree differs from n");
  PadicApprox total = PadicApprox::exact_zero(m.ring.p);
  if (!dv || !dw) return total;
  const long i = static_cast<long>(*dv);
  int sign = ((i * (i - 1) / 2) % 2 ? -1 : 1) * (n % 2 ? -1 : 1);
  for (const auto& [J, vv] : v)
    for (const auto& [K, ww] : w) {
      std::vector<size_t> all = J;
      all.insert(all.end(), K.begin(), K.end());
      std::sort(all.begin(), all.end());
      if (std::adjacent_find(all.begin(), all.end()) != all.end()) continue;
      int sg = sign * merge_sign(J, K);
      if (vv.size() != ww.size() || vv.size() != m.rank())
        throw Error("cohomology.shape", "coordinate vectors must have the module rank");
      for (size_t k = 0; k < vv.size(); ++k)
        for (const auto& [a, ca] : vv[k].terms()) {
          Exponent b = a;
          bool ok = true;
          for (size_t j = 0; j < n; ++j) {
            if (m.gauge[j] == Gauge::Dx) b[j] -= 1;
            if (b[j] < 0) ok = false;
          }
          if (!ok) continue;
          auto it = ww[k].terms().find(b);
          if (it == ww[k].terms().end()) continue;
          PadicApprox x = ca * it->second;
          total = total + (sg < 0 ? -x : x);
        }
    }
  return total;
}

PairingReport pairing_nondegeneracy_check(const DaggerModule& m, long i, const CohomologyOptions& opt) {
  const long n = static_cast<long>(m.arity());
  if (i < 0 || i > n) throw Error("cohomology.degree_out_of_range", "pairing index must lie in [0, n]");
  PairingReport out;
  out.i = i;
  out.compact_degree = static_cast<size_t>(n + i);
  out.mw_degree = static_cast<size_t>(n - i);
  CohomologyOptions o = opt;
  o.generators = true;
  auto hc = compact_support_cohomology(m, o);
  auto hd = mw_cohomology(dual(m), o);
  const auto& gc = hc.generators[out.compact_degree];
  const auto& gd = hd.generators[out.mw_degree];
  out.matrix = Matrix<PadicApprox>(gc.size(), gd.size());
  SparseMatrix A(gc.size(), gd.size(), m.ring.p, m.ring.precision);
  for (size_t a = 0; a < gc.size(); ++a)
    for (size_t b = 0; b < gd.size(); ++b) {
      out.matrix(a, b) = residue_pairing(m, gc[a].value, gd[b].value);
      A.add(a, b, out.matrix(a, b));
    }
  auto el = eliminate(A, false);
  out.rank = el.rank;
  out.injective_compact = el.rank == hc.dims[out.compact_degree];
  out.injective_mw = el.rank == hd.dims[out.mw_degree];
  out.reliable = el.reliable && hc.reliable[out.compact_degree] && hd.reliable[out.mw_degree] &&
                 gc.size() == hc.dims[out.compact_degree] && gd.size() == hd.dims[out.mw_degree];
  return out;
}

// ---- pushforward ----------------------------------------------------------

std::vector<size_t> PushforwardBundle::sequence_dims() const {
  auto d = [](const CohomologyReport& r) { return r.dims.empty() ? size_t{0} : r.dims[0]; };
  return {d(r0f), d(r0loc), d(r1shriek), d(r1f), d(r1loc), d(r2shriek)};
}

namespace {

// The one-variable module seen by ∇_v; throws when Γ_0 involves other variables.
DaggerModule fiber_module(const DaggerModule& m, const std::string& code) {
  m.validate();
  if (m.arity() < 1) throw Error(code + ".unsupported_shape", "needs a fiber variable");
  RingDescriptor ring = m.ring;
  ring.variables = {m.ring.variables[0]};
  ring.window = {m.ring.window[0]};
  SeriesMatrix G(m.rank(), m.rank());
  for (size_t i = 0; i < m.rank(); ++i)
    for (size_t j = 0; j < m.rank(); ++j) {
      RobbaElement x(ring);
      for (const auto& [e, c] : m.Gamma[0](i, j).terms()) {
        for (size_t v = 1; v < e.size(); ++v)
          if (e[v] != 0 && !c.is_exact_zero())
            throw Error(code + ".unsupported_base", "the fiber connection involves base variables");
        x.add_term({e[0]}, c);
      }
      G(i, j) = x;
    }
  return DaggerModule{ring, {G}, {m.gauge[0]}};
}

Chain filter(const Chain& c, bool positive) {
  Chain out;
  for (const auto& [k, x] : c)
    if ((k.e[0] >= 1) == positive) out.emplace(k, x);
  return out;
}

size_t matrix_rank(const Matrix<PadicApprox>& M, long p, int prec, bool* reliable = nullptr) {
  SparseMatrix A(M.rows(), M.cols(), p, prec);
  for (size_t i = 0; i < M.rows(); ++i)
    for (size_t j = 0; j < M.cols(); ++j) A.add(i, j, M(i, j));
  auto el = eliminate(A, false);
  if (reliable) *reliable = *reliable && el.reliable;
  return el.rank;
}

CohomologyReport single(const std::string& title, const DegreeData& d, const ComplexSpec& s,
                        const RingDescriptor& ring) {
  auto rep = new_report(title, 1, s.precision);
  detail::fill_degree(rep, 0, d, s, ring, "t");
  return rep;
}

}  // namespace

RobbaModule local_module(const DaggerModule& fiber, long window) {
  if (fiber.arity() != 1) throw Error("pushforward.unsupported_shape", "local module of a one-variable fiber");
  RingDescriptor d = robba_ring("t_" + fiber.ring.variables[0], -window, window, 1, fiber.ring.p, fiber.ring.precision);
  const size_t r = fiber.rank();
  SeriesMatrix N = zero_matrix(d, r, r);
  const long shift = fiber.gauge[0] == Gauge::Dx ? 1 : 0;
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j)
      for (const auto& [e, c] : fiber.Gamma[0](i, j).terms()) N(i, j).add_term({-e[0] - shift}, -c);
  return RobbaModule{d, N, std::nullopt};
}

PushforwardBundle pushforward_complex(const DaggerModule& m, const CohomologyOptions& opt,
                                      const std::optional<UnipotentData>& certificate) {
  check_window(opt.window);
  require_integrable(m);
  DaggerModule F = fiber_module(m, "pushforward");
  const long w = opt.window;
  ComplexSpec base = t_spec(F);
  ComplexSpec sf = base, sl = base, sq = base;
  sf.box = [](long v) { return detail::Box{{-v, 0}}; };
  sl.box = [](long v) { return detail::Box{{-v, v}}; };
  sq.box = [](long v) { return detail::Box{{1, v}}; };
  sq.keep = all_positive;

  auto f0 = detail::compute_degree(sf, 0, w, true), f1 = detail::compute_degree(sf, 1, w, true);
  auto l0 = detail::compute_degree(sl, 0, w, true), l1 = detail::compute_degree(sl, 1, w, true);
  auto q0 = detail::compute_degree(sq, 0, w, true), q1 = detail::compute_degree(sq, 1, w, true);

  PushforwardBundle b;
  RingDescriptor ring = compact_ring(F, -(w + base.spill), w + base.spill);
  b.r0f = single("R^0 f_*", f0, sf, ring);
  b.r1f = single("R^1 f_*", f1, sf, ring);
  b.r0loc = single("R^0_loc f_*", l0, sl, ring);
  b.r1loc = single("R^1_loc f_*", l1, sl, ring);
  b.r1shriek = single("R^1 f_!", q0, sq, ring);
  b.r2shriek = single("R^2 f_!", q1, sq, ring);
  b.notes.push_back("representatives in t = 1/x, window " + std::to_string(w));
  if (!possibly_irregular(F).empty())
    b.notes.push_back("fiber not verified regular at infinity: local and compact terms are window-model values");
  if (m.arity() > 1) b.notes.push_back("fiber connection independent of the base: ranks over A equal fiber dimensions");

  if (certificate) {
    auto h = h0_h1_unipotent(*certificate);
    b.certificate_used = true;
    if (h.dims[0] != l0.dim || h.dims[1] != l1.dim) {
      b.notes.push_back("unipotent certificate dims (" + std::to_string(h.dims[0]) + "," + std::to_string(h.dims[1]) +
                        ") differ from the window computation");
      b.reliable = false;
    } else {
      b.notes.push_back("local terms confirmed by the unipotent certificate");
    }
    b.r0loc.dims[0] = h.dims[0];
    b.r1loc.dims[0] = h.dims[1];
  }

  auto build = [&](const DegreeData& from, const DegreeData& to, auto&& transport) {
    Matrix<PadicApprox> M(to.dim, from.dim);
    for (size_t j = 0; j < from.generators.size(); ++j) {
      Chain image = transport(detail::to_chain(from.layout, from.generators[j]));
      auto c = detail::class_coordinates(to, image);
      if (!c) {
        b.reliable = false;
        b.notes.push_back("a connecting image left the window");
        continue;
      }
      for (size_t i = 0; i < to.dim; ++i) M(i, j) = (*c)[i];
    }
    return M;
  };
  auto id = [](const Chain& c) { return c; };
  auto positive = [](const Chain& c) { return filter(c, true); };
  auto connecting = [&](const Chain& c) { return filter(detail::apply_d(sl, c), false); };
  b.maps.push_back(build(f0, l0, id));
  b.maps.push_back(build(l0, q0, positive));
  b.maps.push_back(build(q0, f1, connecting));
  b.maps.push_back(build(f1, l1, id));
  b.maps.push_back(build(l1, q1, positive));

  for (const auto* d : {&f0, &f1, &l0, &l1, &q0, &q1}) b.reliable = b.reliable && d->reliable;

  // Primitive part: image of R^1 f_! in R^1 f_*, represented by connecting images.
  b.r1prim = new_report("R^1_p f_*", 1, F.ring.precision);
  EchelonSpace span;
  const auto& M2 = b.maps[2];
  for (size_t j = 0; j < M2.cols(); ++j) {
    SparseVector col;
    for (size_t i = 0; i < M2.rows(); ++i)
      if (!M2(i, j).is_zero()) col[i] = M2(i, j);
    if (!span.insert(col)) continue;
    Chain image = connecting(detail::to_chain(q0.layout, q0.generators[j]));
    Generator g;
    g.value = detail::to_form(image, F.rank(), ring);
    g.label = "image of " + b.r1shriek.generators[0][j].label;
    g.defect = std::nullopt;
    b.r1prim.generators[0].push_back(std::move(g));
  }
  b.r1prim.dims[0] = span.dim();
  b.r1prim.reliable[0] = b.reliable;
  return b;
}

SnakeVerdict snake_check(const PushforwardBundle& b) {
  static const char* names[] = {"r0f", "r0loc", "r1shriek", "r1f", "r1loc", "r2shriek"};
  SnakeVerdict out;
  auto dims = b.sequence_dims();
  std::vector<size_t> ranks;
  bool shapes_ok = b.maps.size() == 5;
  for (size_t k = 0; k < b.maps.size(); ++k) {
    const auto& M = b.maps[k];
    long prime = 0;
    int prec = 1;
    for (size_t i = 0; i < M.rows() && !prime; ++i)
      for (size_t j = 0; j < M.cols(); ++j)
        if (M(i, j).prime()) {
          prime = M(i, j).prime();
          prec = M(i, j).precision();
          break;
        }
    ranks.push_back(matrix_rank(M, prime, prec));
  }
  out.pass = true;
  for (size_t k = 0; k < 6; ++k) {
    SequenceNode node;
    node.name = names[k];
    node.dim = dims[k];
    node.rank_in = k > 0 && k - 1 < ranks.size() ? ranks[k - 1] : 0;
    node.rank_out = k < ranks.size() ? ranks[k] : 0;
    bool ok = shapes_ok && node.rank_in + node.rank_out == node.dim;
    if (ok && k > 0 && k < 5) {
      const auto& A = b.maps[k - 1];
      const auto& B = b.maps[k];
      if (B.cols() != A.rows() || B.cols() != node.dim) {
        ok = false;
      } else {
        auto C = B * A;
        for (size_t i = 0; i < C.rows() && ok; ++i)
          for (size_t j = 0; j < C.cols(); ++j)
            if (!C(i, j).is_zero()) {
              ok = false;
              break;
            }
      }
    }
    node.exact = ok;
    if (!ok && out.pass) {
      out.pass = false;
      out.first_failure = k;
    }
    out.nodes.push_back(node);
  }
  return out;
}

// ---- Leray -----------------------------------------------------------------

namespace {

// Constant-in-x matrices G_k with Γ_1 = Σ_k G_k y^k.
std::map<long, Matrix<PadicApprox>> base_slices(const DaggerModule& m) {
  std::map<long, Matrix<PadicApprox>> out;
  const size_t r = m.rank();
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < r; ++j)
      for (const auto& [e, c] : m.Gamma[1](i, j).terms()) {
        if (c.is_exact_zero()) continue;
        if (e[0] != 0) throw Error("leray.unsupported_base", "base connection involves the fiber variable");
        auto it = out.try_emplace(e[1], Matrix<PadicApprox>(r, r)).first;
        it->second(i, j) = c;
      }
  return out;
}

Chain apply_constant(const Matrix<PadicApprox>& G, const Chain& c) {
  Chain out;
  for (const auto& [k, x] : c)
    for (size_t row = 0; row < G.rows(); ++row) {
      if (G(row, k.comp).is_exact_zero()) continue;
      Key key = k;
      key.comp = row;
      PadicApprox y = G(row, k.comp) * x;
      auto [it, fresh] = out.try_emplace(key, y);
      if (!fresh) it->second = it->second + y;
    }
  return out;
}

// Module on the base whose basis is the fiber classes of `fd`.
DaggerModule induced(const DaggerModule& m, const DegreeData& fd, const std::map<long, Matrix<PadicApprox>>& slices) {
  RingDescriptor ring = m.ring;
  ring.variables = {m.ring.variables[1]};
  ring.window = {m.ring.window[1]};
  const size_t a = fd.dim;
  SeriesMatrix G = zero_matrix(ring, a, a);
  for (const auto& [deg, Gk] : slices)
    for (size_t j = 0; j < a; ++j) {
      auto c = detail::class_coordinates(fd, apply_constant(Gk, detail::to_chain(fd.layout, fd.generators[j])));
      if (!c) throw Error("leray.not_free", "base connection does not preserve the fiber cohomology at precision");
      for (size_t i = 0; i < a; ++i)
        if (!(*c)[i].is_exact_zero()) G(i, j).add_term({deg}, (*c)[i]);
    }
  return DaggerModule{ring, {G}, {m.gauge[1]}};
}

long euler(const std::vector<size_t>& dims) {
  long s = 0;
  for (size_t i = 0; i < dims.size(); ++i) s += (i % 2 ? -1 : 1) * static_cast<long>(dims[i]);
  return s;
}

}  // namespace

LerayReport leray_assemble(const DaggerModule& m, const CohomologyOptions& opt) {
  check_window(opt.window);
  require_integrable(m);
  const size_t n = m.arity();
  if (n != 1 && n != 2) throw Error("leray.unsupported_shape", "fiber times a base of dimension 0 or 1");
  const long w = opt.window;
  DaggerModule F = fiber_module(m, "leray");
  ComplexSpec sF = mw_spec(F);
  auto F0 = detail::compute_degree(sF, 0, w, true);
  auto F1 = detail::compute_degree(sF, 1, w, true);

  LerayReport out;
  out.rank_P = F0.dim;
  out.rank_Q = F1.dim;
  ComplexSpec sM = mw_spec(m);
  auto Md = all_degrees(sM, w, true);
  out.HM = new_report("H(M)", n + 1, m.ring.precision);
  RingDescriptor ringM = widened(m.ring, 0, w + sM.spill);
  for (size_t k = 0; k <= n; ++k) detail::fill_degree(out.HM, k, Md[k], sM, ringM, "x");

  const size_t nb = n - 1;  // base dimension
  std::vector<size_t> hp(nb + 1), hq(nb + 1);
  std::vector<DegreeData> Pd, Qd;
  std::optional<ComplexSpec> sP, sQ;
  if (nb == 0) {
    hp[0] = F0.dim;
    hq[0] = F1.dim;
    out.HP = new_report("H(P)", 1, m.ring.precision);
    out.HQ = new_report("H(Q)", 1, m.ring.precision);
    out.HP.dims = hp;
    out.HQ.dims = hq;
  } else {
    auto slices = base_slices(m);
    out.P = induced(m, F0, slices);
    out.Q = induced(m, F1, slices);
    sP = mw_spec(out.P);
    sQ = mw_spec(out.Q);
    Pd = all_degrees(*sP, w, true);
    Qd = all_degrees(*sQ, w, true);
    out.HP = new_report("H(P)", 2, m.ring.precision);
    out.HQ = new_report("H(Q)", 2, m.ring.precision);
    RingDescriptor ringB = widened(out.P.ring, 0, w + sP->spill);
    for (size_t k = 0; k < 2; ++k) {
      detail::fill_degree(out.HP, k, Pd[k], *sP, ringB, "y");
      detail::fill_degree(out.HQ, k, Qd[k], *sQ, ringB, "y");
      hp[k] = Pd[k].dim;
      hq[k] = Qd[k].dim;
    }
  }

  // H^i(P) → H^i(M): a(y) ω_J ⊗ s(x) as a form on the product.
  auto alpha = [&](size_t i) -> Matrix<PadicApprox> {
    const size_t src = i <= nb ? hp[i] : 0;
    Matrix<PadicApprox> A(Md[i].dim, src);
    for (size_t j = 0; j < src; ++j) {
      Chain c;
      if (nb == 0) {
        c = detail::to_chain(F0.layout, F0.generators[j]);
      } else {
        for (const auto& [kb, cb] : detail::to_chain(Pd[i].layout, Pd[i].generators[j]))
          for (const auto& [kf, cf] : detail::to_chain(F0.layout, F0.generators[kb.comp])) {
            Key k{kb.J ? 2u : 0u, kf.comp, {kf.e[0], kb.e[0]}};
            PadicApprox x = cb * cf;
            auto [it, fresh] = c.try_emplace(k, x);
            if (!fresh) it->second = it->second + x;
          }
      }
      auto co = detail::class_coordinates(Md[i], c);
      if (!co) throw Error("leray.window", "a class of P left the window of M");
      for (size_t r = 0; r < Md[i].dim; ++r) A(r, j) = (*co)[r];
    }
    return A;
  };
  // H^i(M) → H^{i-1}(Q): the dx-component, read in the fiber H^1 basis.
  auto beta = [&](size_t i) -> Matrix<PadicApprox> {
    const size_t tgt = i >= 1 && i - 1 <= nb ? hq[i - 1] : 0;
    Matrix<PadicApprox> B(tgt, Md[i].dim);
    if (!tgt) return B;
    for (size_t j = 0; j < Md[i].dim; ++j) {
      std::map<std::pair<unsigned, long>, Chain> groups;
      for (const auto& [k, x] : detail::to_chain(Md[i].layout, Md[i].generators[j])) {
        if (!(k.J & 1u)) continue;
        long b = nb ? k.e[1] : 0;
        groups[{k.J >> 1, b}].emplace(Key{1u, k.comp, {k.e[0]}}, x);
      }
      Chain q;
      for (const auto& [gk, fiber_chain] : groups) {
        auto co = detail::class_coordinates(F1, fiber_chain);
        if (!co) throw Error("leray.window", "a fiber class left the window");
        for (size_t r = 0; r < F1.dim; ++r)
          if (!(*co)[r].is_exact_zero()) q.emplace(Key{gk.first, r, nb ? Exponent{gk.second} : Exponent{}}, (*co)[r]);
      }
      std::optional<std::vector<PadicApprox>> co;
      if (nb == 0) {
        std::vector<PadicApprox> v(tgt);
        for (const auto& [k, x] : q) v[k.comp] = x;
        co = v;
      } else {
        co = detail::class_coordinates(Qd[i - 1], q);
      }
      if (!co) throw Error("leray.window", "a class of Q left the window");
      for (size_t r = 0; r < tgt; ++r) B(r, j) = (*co)[r];
    }
    return B;
  };

  out.exact = true;
  const long p = m.ring.p;
  const int prec = m.ring.precision;
  for (size_t i = 0; i <= n; ++i) {
    size_t a_rank = matrix_rank(alpha(i), p, prec);
    size_t b_rank = matrix_rank(beta(i), p, prec);
    SequenceNode P{"H^" + std::to_string(i) + "(P)", i <= nb ? hp[i] : 0, 0, a_rank, false};
    SequenceNode M{"H^" + std::to_string(i) + "(M)", Md[i].dim, a_rank, b_rank, false};
    SequenceNode Q{"H^" + std::to_string(static_cast<long>(i) - 1) + "(Q)", i >= 1 && i - 1 <= nb ? hq[i - 1] : 0, b_rank,
                   0, false};
    // d_2 lands in H^{i+1}(P), which vanishes on a base of dimension <= 1.
    P.exact = P.rank_out == P.dim;
    M.exact = M.rank_in + M.rank_out == M.dim;
    Q.exact = Q.rank_in == Q.dim;
    out.exact = out.exact && P.exact && M.exact && Q.exact;
    out.sequence.push_back(P);
    out.sequence.push_back(M);
    out.sequence.push_back(Q);
    out.leray_dims.push_back(P.dim + Q.dim);
  }
  out.euler_M = euler(out.HM.dims);
  out.euler_P = euler(hp);
  out.euler_Q = euler(hq);
  out.euler_ok = out.euler_M == out.euler_P - out.euler_Q;
  out.matches_direct = out.leray_dims == out.HM.dims;
  return out;
}

}  // namespace ovc
