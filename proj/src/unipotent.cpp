#include "ovc/unipotent.hpp"

#include "ovc/linalg.hpp"

namespace ovc {

namespace {

RobbaElement bind(const RobbaElement& x, const RingDescriptor& d) { return x.bound() ? x : RobbaElement(d); }

ModuleVector unit_vector(const RingDescriptor& d, size_t n, size_t i) {
  ModuleVector v(n, RobbaElement(d));
  v[i] = RobbaElement::constant(d, d.scalar(1));
  return v;
}

// Coordinates of y against the columns of a unit upper triangular V.
ModuleVector back_substitute(const SeriesMatrix& V, const ModuleVector& y, const RingDescriptor& d) {
  const size_t n = y.size();
  ModuleVector a(n, RobbaElement(d));
  for (size_t jj = n; jj-- > 0;) {
    RobbaElement s = bind(y[jj], d);
    for (size_t k = jj + 1; k < n; ++k) s = s - V(jj, k) * a[k];
    a[jj] = bind(s, d).pruned();
  }
  return a;
}

CheckResult vector_defect(const ModuleVector& v) {
  SeriesMatrix A(v.size(), 1);
  for (size_t i = 0; i < v.size(); ++i) A(i, 0) = v[i];
  return scan_defect(A);
}

std::optional<long> min_abs_precision(const ModuleVector& v) {
  std::optional<long> best;
  for (const auto& x : v)
    for (const auto& [e, c] : x.terms()) {
      if (c.is_exact_zero()) continue;
      long a = c.abs_precision();
      if (!best || a < *best) best = a;
    }
  return best;
}

ModuleVector pruned(const ModuleVector& v) {
  ModuleVector out;
  for (const auto& x : v) out.push_back(x.pruned());
  return out;
}

bool scalar_matrix_zero(const ScalarMatrix& A) {
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j)
      if (!A(i, j).is_zero()) return false;
  return true;
}

}  // namespace

RobbaModule UnipotentData::constant_module() const {
  const auto& d = module.ring;
  RobbaModule out{d, zero_matrix(d, rank(), rank()), std::nullopt};
  for (size_t i = 0; i < rank(); ++i)
    for (size_t j = 0; j < rank(); ++j)
      if (!X(i, j).is_exact_zero()) out.N(i, j) = RobbaElement::constant(d, X(i, j));
  return out;
}

size_t nilpotency_index(const ScalarMatrix& X) {
  ScalarMatrix P = X;
  for (size_t e = 1; e <= X.rows() + 1; ++e) {
    if (scalar_matrix_zero(P)) return e;
    P = P * X;
  }
  throw Error("unipotent.bad_certificate", "X is not nilpotent at working precision");
}

UnipotentData strongly_unipotent_basis(const RobbaModule& m, const SeriesMatrix& filtration) {
  m.validate();
  const auto& d = m.ring;
  const size_t n = m.rank();
  RobbaModule mw = gauge_transform(m, filtration);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j)
      if (!mw.N(i, j).is_zero())
        throw Error("unipotent.bad_certificate", "D w_" + std::to_string(j + 1) +
                                                     " leaves the span of the earlier basis vectors");

  SeriesMatrix V = identity_matrix(d, n);
  ScalarMatrix X(n, n, PadicApprox::exact_zero(d.p));
  for (size_t i = 0; i < n; ++i) {
    ModuleVector u = unit_vector(d, n, i);
    for (size_t l = i; l-- > 0;) {
      ModuleVector a = back_substitute(V, apply_D(mw, u), d);
      // t de/dt = a_l - b_l, termwise c_m t^m / m.
      RobbaElement e(d);
      for (const auto& [ex, c] : a[l].terms())
        if (ex[0] != 0 && !c.is_zero()) e.add_term(ex, c * d.scalar(Rational(1, ex[0])));
      if (e.terms().empty()) continue;
      for (size_t r = 0; r <= l; ++r) u[r] = (u[r] - e * V(r, l)).pruned();
    }
    ModuleVector a = back_substitute(V, apply_D(mw, u), d);
    for (size_t j = 0; j < n; ++j) {
      for (const auto& [ex, c] : a[j].terms()) {
        if (ex[0] == 0 || c.is_zero()) continue;
        throw Error("unipotent.bad_certificate", "nonconstant coefficient survives in column " + std::to_string(i + 1));
      }
      if (j < i) X(j, i) = a[j].coefficient({0});
      if (X(j, i).prime() == 0) X(j, i) = PadicApprox::exact_zero(d.p);
      if (j >= i && !a[j].is_zero()) throw Error("unipotent.bad_certificate", "X is not strictly upper triangular");
    }
    for (size_t r = 0; r < n; ++r) V(r, i) = bind(u[r], d);
  }

  UnipotentData out{m, filtration * V, {}, X, nilpotency_index(X)};
  out.U = out.U.map([&](const RobbaElement& x) { return bind(x, d).pruned(); });
  out.U_inverse = invert_matrix(out.U);
  return out;
}

CheckResult verify_unipotent(const UnipotentData& data) {
  SeriesMatrix Xs = data.constant_module().N;
  return scan_defect(data.module.N * data.U + euler_derivative(data.U) - data.U * Xs);
}

CheckResult transition_is_constant(const SeriesMatrix& U1, const SeriesMatrix& U2) {
  SeriesMatrix T = invert_matrix(U1) * U2;
  SeriesMatrix nonconst(T.rows(), T.cols());
  for (size_t i = 0; i < T.rows(); ++i)
    for (size_t j = 0; j < T.cols(); ++j) {
      RobbaElement r(T(i, j).bound() ? T(i, j).descriptor() : U1(0, 0).descriptor());
      for (const auto& [ex, c] : T(i, j).terms())
        if (ex[0] != 0) r.add_term(ex, c);
      nonconst(i, j) = r;
    }
  return scan_defect(nonconst);
}

long ceil_log(long p, long n) {
  long k = 0;
  Integer pk = 1;
  while (pk < n) {
    pk *= p;
    ++k;
  }
  return k;
}

DenominatorBound bounddenom(long p, long m, long l, long e) {
  if (l < 1 || e < 1) throw Error("unipotent.bad_argument", "l and e must be positive");
  DenominatorBound out;
  out.bound = (e - 1) * ceil_log(p, std::labs(m) + l);
  std::vector<Rational> poly(e, Rational(0));
  poly[0] = 1;
  for (long i = 1; i <= l; ++i) {
    // poly *= ((m + i) + x) / i
    Rational c0(m + i, i), c1(1, i);
    c0.canonicalize();
    c1.canonicalize();
    for (long k = e - 1; k >= 0; --k) {
      Rational next = poly[k] * c0;
      if (k > 0) next += poly[k - 1] * c1;
      poly[k] = next;
    }
  }
  for (const auto& c : poly)
    if (c != 0) out.exact = std::max(out.exact, -vp_rational(c, p));
  return out;
}

HorizontalResult horizontal_iterate(const UnipotentData& data, const ModuleVector& w, long L, bool in_v_basis) {
  const auto& d = data.module.ring;
  const size_t n = data.rank();
  if (w.size() != n) throw Error("connection.shape", "vector length differs from rank");
  RobbaModule mv = data.constant_module();
  ModuleVector f(n);
  for (size_t i = 0; i < n; ++i) f[i] = bind(w[i], d);
  if (!in_v_basis) f = apply_matrix(data.U_inverse, f);
  for (size_t k = 1; k < data.e; ++k) f = pruned(apply_D(mv, f));

  HorizontalResult out;
  const auto start = min_abs_precision(f);
  const long e = static_cast<long>(data.e);
  for (long l = 1; l <= L; ++l) {
    const PadicApprox inv = d.scalar(Rational(1, l * l));
    ModuleVector g = f;
    for (long k = 0; k < e; ++k) {
      ModuleVector dd = apply_D(mv, apply_D(mv, g));
      for (size_t i = 0; i < n; ++i) g[i] = g[i] - dd[i].scaled(inv);
    }
    std::optional<Rational> wl;
    for (size_t i = 0; i < n; ++i) {
      auto sv = w_slope((g[i] - f[i]).pruned(), d.slope_r);
      if (sv.value && (!wl || *sv.value < *wl)) wl = sv.value;
    }
    out.log.push_back(wl);
    out.nominal_loss += 2 * e * vp_integer(Integer(l), d.p);
    if (auto now = min_abs_precision(g); start && now) out.tracked_loss = std::max(out.tracked_loss, *start - *now);
    if (out.tracked_loss >= d.precision)
      throw Error("unipotent.precision_exhausted",
                  "at l = " + std::to_string(l) + ": tracked loss " + std::to_string(out.tracked_loss) +
                      " digits, nominal 2e*sum vp(l) = " + std::to_string(out.nominal_loss) + ", precision " +
                      std::to_string(d.precision));
    f = pruned(g);
  }

  // Least-squares slope of the finite log entries against l.
  std::vector<std::pair<Rational, Rational>> pts;
  for (size_t k = 0; k < out.log.size(); ++k)
    if (out.log[k]) pts.emplace_back(Rational(static_cast<long>(k + 1)), *out.log[k]);
  if (pts.size() >= 2) {
    Rational mx = 0, my = 0;
    for (auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<long>(pts.size());
    my /= static_cast<long>(pts.size());
    Rational sxy = 0, sxx = 0;
    for (auto& [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    out.slope = Rational(sxy / sxx);
  }

  out.f_v = f;
  out.f = pruned(apply_matrix(data.U, f));
  for (auto& x : out.f) x = bind(x, d);
  out.nabla = vector_defect(apply_D(data.module, out.f));
  return out;
}

CohomologyReport h0_h1_unipotent(const UnipotentData& data) {
  const auto& d = data.module.ring;
  const size_t n = data.rank();
  CohomologyReport rep;
  rep.title = "unipotent local cohomology";
  rep.resize(2);
  rep.precision = d.precision;

  SparseMatrix A(n, n, d.p, d.precision);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) A.add(i, j, data.X(i, j));
  auto el = eliminate(A, true);
  rep.reliable = {el.reliable, el.reliable};

  auto to_module = [&](const SparseVector& k) {
    ModuleVector v(n, RobbaElement(d));
    for (const auto& [i, c] : k) v[i] = RobbaElement::constant(d, c);
    ModuleVector out = pruned(apply_matrix(data.U, v));
    for (auto& x : out) x = bind(x, d);
    return out;
  };

  for (const auto& k : el.kernel) {
    Generator g;
    g.value[{}] = to_module(k);
    g.label = "ker X";
    g.defect = vector_defect(apply_D(data.module, g.value[{}])).defect_value;
    rep.generators[0].push_back(std::move(g));
  }
  rep.dims[0] = el.kernel.size();

  EchelonSpace image;
  for (size_t j = 0; j < n; ++j) {
    SparseVector col;
    for (size_t i = 0; i < n; ++i)
      if (!data.X(i, j).is_zero()) col[i] = data.X(i, j);
    image.insert(col);
  }
  for (size_t j = 0; j < n; ++j) {
    SparseVector ej{{j, d.scalar(1)}};
    if (!image.insert(ej)) continue;
    Generator g;
    g.value[{0}] = to_module(ej);
    g.label = "coker X dt/t";
    rep.generators[1].push_back(std::move(g));
  }
  rep.dims[1] = rep.generators[1].size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) rep.note_loss(data.U(i, j).truncation_loss());
  return rep;
}

PlusCohomResult pluscohom_check(const UnipotentData& data) {
  const auto& d = data.module.ring;
  const size_t n = data.rank();
  PlusCohomResult out;
  const long lo = d.window[0].first;
  if (lo >= 0) {
    out.pass = out.injective = out.surjective = true;
    return out;
  }
  RobbaModule mv = data.constant_module();
  const size_t modes = static_cast<size_t>(-lo);
  out.dim = modes * n;
  SparseMatrix A(out.dim, out.dim, d.p, d.precision);
  auto index = [&](long m, size_t i) { return static_cast<size_t>(m - lo) * n + i; };
  for (long m = lo; m < 0; ++m)
    for (size_t i = 0; i < n; ++i) {
      ModuleVector v(n, RobbaElement(d));
      v[i] = RobbaElement::monomial(d, {m}, d.scalar(1));
      ModuleVector dv = apply_D(mv, v);
      for (size_t j = 0; j < n; ++j)
        for (const auto& [ex, c] : dv[j].terms())
          if (ex[0] < 0) A.add(index(ex[0], j), index(m, i), c);
    }
  auto el = eliminate(A, false);
  out.rank = el.rank;
  out.reliable = el.reliable;
  out.injective = el.rank == out.dim;
  out.surjective = el.rank == out.dim;
  out.pass = out.injective && out.surjective && out.reliable;
  return out;
}

ModuleVector pluscohom_preimage(const UnipotentData& data, const ModuleVector& omega_v) {
  const auto& d = data.module.ring;
  const size_t n = data.rank();
  if (omega_v.size() != n) throw Error("connection.shape", "vector length differs from rank");
  std::map<long, std::vector<PadicApprox>> modes;
  for (size_t i = 0; i < n; ++i)
    if (omega_v[i].bound())
      for (const auto& [ex, c] : omega_v[i].terms())
        if (ex[0] < 0) {
          auto& slot = modes.try_emplace(ex[0], n, PadicApprox::exact_zero(d.p)).first->second;
          slot[i] = c;
        }
  ModuleVector out(n, RobbaElement(d));
  for (auto& [m, w] : modes) {
    // (mI + X) y = w with X strictly upper triangular.
    std::vector<PadicApprox> y(n, PadicApprox::exact_zero(d.p));
    const PadicApprox inv = d.scalar(Rational(1, m));
    for (size_t i = n; i-- > 0;) {
      PadicApprox s = w[i];
      for (size_t j = i + 1; j < n; ++j) s = s - data.X(i, j) * y[j];
      y[i] = s * inv;
    }
    for (size_t i = 0; i < n; ++i) out[i].add_term({m}, y[i]);
  }
  return out;
}

}  // namespace ovc
