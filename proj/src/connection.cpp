#include "ovc/connection.hpp"

namespace ovc {

SeriesMatrix zero_matrix(const RingDescriptor& d, size_t rows, size_t cols) {
  return SeriesMatrix(rows, cols, RobbaElement(d));
}

SeriesMatrix identity_matrix(const RingDescriptor& d, size_t n) {
  auto out = zero_matrix(d, n, n);
  for (size_t i = 0; i < n; ++i) out(i, i) = RobbaElement::constant(d, d.scalar(1));
  return out;
}

namespace {

void check_square(const SeriesMatrix& A, size_t n, const char* what) {
  if (A.rows() != n || A.cols() != n)
    throw Error("connection.shape", std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

SeriesMatrix map_entries(const SeriesMatrix& A, auto&& f) {
  SeriesMatrix out(A.rows(), A.cols());
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j) out(i, j) = f(A(i, j));
  return out;
}

RobbaElement rebind(const RobbaElement& x, const RingDescriptor& d) { return x.bound() ? x : RobbaElement(d); }

SeriesMatrix commutator(const SeriesMatrix& A, const SeriesMatrix& B) { return A * B - B * A; }

RobbaElement delta(const RobbaElement& x, size_t var, Gauge g) {
  return g == Gauge::Dx ? d_dt(x, var) : euler_derivative(x, var);
}

}  // namespace

CheckResult scan_defect(const SeriesMatrix& A) {
  CheckResult out;
  out.pass = true;
  bool lossy = false;
  for (size_t i = 0; i < A.rows(); ++i)
    for (size_t j = 0; j < A.cols(); ++j) {
      const auto& x = A(i, j);
      lossy |= x.truncation_loss().has_value();
      for (const auto& [e, c] : x.terms()) {
        if (c.is_zero()) continue;
        out.pass = false;
        Rational v = c.valuation();
        if (!out.defect_value || v < *out.defect_value) {
          out.defect_value = v;
          out.defect_index = e;
          out.detail = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
      }
    }
  if (lossy) out.detail += out.detail.empty() ? "window truncation present" : "; window truncation present";
  return out;
}

void RobbaModule::validate() const {
  ring.validate();
  if (!ring.is_robba() || ring.arity() != 1)
    throw Error("connection.kind_mismatch", "Robba module needs a one-variable Robba-type ring");
  check_square(N, N.rows(), "N");
  if (Phi) check_square(*Phi, N.rows(), "Phi");
}

void DaggerModule::validate() const {
  ring.validate();
  if (ring.kind != RingKind::DaggerFringe && ring.kind != RingKind::Tate)
    throw Error("connection.kind_mismatch", "dagger module needs a dagger or Tate ring");
  if (Gamma.size() != ring.arity()) throw Error("connection.shape", "one connection matrix per variable");
  if (gauge.size() != ring.arity()) throw Error("connection.shape", "one gauge per variable");
  for (const auto& G : Gamma) check_square(G, rank(), "Gamma");
}

RobbaModule trivial_robba_module(const RingDescriptor& d, size_t rank) {
  RobbaModule m{d, zero_matrix(d, rank, rank), identity_matrix(d, rank)};
  m.validate();
  return m;
}

DaggerModule trivial_dagger_module(const RingDescriptor& d, size_t rank) {
  DaggerModule m{d, std::vector<SeriesMatrix>(d.arity(), zero_matrix(d, rank, rank)),
                 std::vector<Gauge>(d.arity(), Gauge::Dx)};
  m.validate();
  return m;
}

RobbaModule dual(const RobbaModule& m) {
  RobbaModule out{m.ring, map_entries(m.N.transpose(), [](const RobbaElement& x) { return -x; }), std::nullopt};
  return out;
}

DaggerModule dual(const DaggerModule& m) {
  DaggerModule out = m;
  for (auto& G : out.Gamma) G = map_entries(G.transpose(), [](const RobbaElement& x) { return -x; });
  return out;
}

ModuleVector apply_matrix(const SeriesMatrix& A, const ModuleVector& v) {
  if (A.cols() != v.size()) throw Error("connection.shape", "vector length differs from rank");
  ModuleVector out(A.rows());
  for (size_t i = 0; i < A.rows(); ++i) {
    RobbaElement acc;
    for (size_t j = 0; j < A.cols(); ++j) acc = acc + A(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

ModuleVector apply_D(const RobbaModule& m, const ModuleVector& v) {
  if (!m.ring.is_robba()) throw Error("connection.kind_mismatch", "D is defined over Robba-type rings");
  ModuleVector out = apply_matrix(m.N, v);
  for (size_t i = 0; i < v.size(); ++i) out[i] = rebind(out[i] + euler_derivative(rebind(v[i], m.ring), 0), m.ring);
  return out;
}

ModuleVector apply_nabla_v(const DaggerModule& m, const ModuleVector& v, size_t var) {
  if (m.ring.is_robba()) throw Error("connection.kind_mismatch", "nabla_v is defined over dagger rings");
  if (var >= m.arity()) throw Error("connection.shape", "variable index out of range");
  ModuleVector out = apply_matrix(m.Gamma[var], v);
  for (size_t i = 0; i < v.size(); ++i)
    out[i] = rebind(out[i] + delta(rebind(v[i], m.ring), var, m.gauge[var]), m.ring);
  return out;
}

CheckResult check_frobenius_compat(const RobbaModule& m) {
  if (!m.Phi) throw Error("connection.no_frobenius", "module carries no Frobenius matrix");
  const auto& Phi = *m.Phi;
  const long q = m.ring.q;
  auto tdPhi = map_entries(Phi, [](const RobbaElement& x) { return euler_derivative(x, 0); });
  auto sigmaN = map_entries(m.N, [&](const RobbaElement& x) { return frobenius_substitute(x, q); });
  auto rhs = map_entries(Phi * sigmaN, [&](const RobbaElement& x) { return x.scaled(m.ring.scalar(q)); });
  return scan_defect(m.N * Phi + tdPhi - rhs);
}

CheckResult check_integrability(const DaggerModule& m) {
  CheckResult out;
  out.pass = true;
  for (size_t i = 0; i < m.arity(); ++i)
    for (size_t j = i + 1; j < m.arity(); ++j) {
      auto di = map_entries(m.Gamma[j], [&](const RobbaElement& x) { return delta(x, i, m.gauge[i]); });
      auto dj = map_entries(m.Gamma[i], [&](const RobbaElement& x) { return delta(x, j, m.gauge[j]); });
      auto r = scan_defect(di - dj + commutator(m.Gamma[i], m.Gamma[j]));
      if (!r.pass && (out.pass || *r.defect_value < *out.defect_value)) {
        out = r;
        out.detail = "curvature (" + std::to_string(i) + "," + std::to_string(j) + ") " + r.detail;
      }
    }
  return out;
}

RobbaModule pullback_module(const RobbaModule& m, const PullbackMap& f) {
  RobbaModule out = m;
  auto guard = [](const RobbaElement& x) {
    if (x.truncation_loss()) throw Error("connection.window_overflow", "pullback leaves the exponent window");
    return x;
  };
  if (f.kind == PullbackKind::Kummer) {
    if (f.degree < 1) throw Error("series.bad_degree", "Kummer degree must be positive");
    auto e = m.ring.scalar(f.degree);
    out.N = map_entries(m.N, [&](const RobbaElement& x) { return guard(kummer_substitute(x, f.degree).scaled(e)); });
    if (m.Phi)
      out.Phi = map_entries(*m.Phi, [&](const RobbaElement& x) { return guard(kummer_substitute(x, f.degree)); });
  } else {
    if (f.degree != m.ring.q) throw Error("connection.bad_lift", "Frobenius pullback uses the module's q");
    auto qs = m.ring.scalar(f.degree);
    out.N = map_entries(m.N, [&](const RobbaElement& x) { return guard(frobenius_substitute(x, f.degree).scaled(qs)); });
    if (m.Phi)
      out.Phi = map_entries(*m.Phi, [&](const RobbaElement& x) { return guard(frobenius_substitute(x, f.degree)); });
  }
  return out;
}

namespace {

void check_cover_degree(const RingDescriptor& d, long e) {
  if (e < 1) throw Error("series.bad_degree", "Kummer degree must be positive");
  if (e % d.p == 0) throw Error("connection.bad_degree", "trace needs the degree prime to p");
}

}  // namespace

RobbaElement trace_map(const RobbaElement& w, long e) {
  const auto& d = w.descriptor();
  check_cover_degree(d, e);
  RobbaElement out(d);
  auto es = d.scalar(e);
  for (const auto& [ex, c] : w.terms()) {
    bool keep = true;
    Exponent f = ex;
    for (long& x : f) {
      if (x % e != 0) keep = false;
      x /= e;
    }
    if (keep) out.add_term(f, c * es);
  }
  out.record_loss(w.truncation_loss());
  return out;
}

RobbaElement trace_projector(const RobbaElement& w, long e) {
  return trace_map(w, e).scaled(w.descriptor().scalar(Rational(1) / e));
}

RobbaElement trace_form(const RobbaElement& w, long e) { return trace_projector(w, e); }

RobbaElement form_projector(const RobbaElement& w, long e) {
  return trace_form(w, e).scaled(w.descriptor().scalar(Rational(1) / e));
}

RobbaElement pullback_form(const RobbaElement& g, long e) {
  return kummer_substitute(g, e).scaled(g.descriptor().scalar(e));
}

ModuleVector kummer_pullback(const ModuleVector& v, long e, bool forms) {
  ModuleVector out;
  for (const auto& x : v) out.push_back(forms ? pullback_form(x, e) : kummer_substitute(x, e));
  return out;
}

ModuleVector project_vector(const ModuleVector& v, long e, bool forms) {
  ModuleVector out;
  for (const auto& x : v) out.push_back(forms ? form_projector(x, e) : trace_projector(x, e));
  return out;
}

bool vector_is_zero(const ModuleVector& v) {
  for (const auto& x : v)
    if (!x.is_zero()) return false;
  return true;
}

SeriesMatrix invert_matrix(const SeriesMatrix& A) {
  const size_t n = A.rows();
  if (A.cols() != n) throw Error("connection.shape", "only square matrices are inverted");
  if (n == 0) return A;
  RingDescriptor d;
  for (size_t i = 0; i < n && !d.arity(); ++i)
    for (size_t j = 0; j < n; ++j)
      if (A(i, j).bound()) {
        d = A(i, j).descriptor();
        break;
      }
  if (!d.arity()) throw Error("connection.not_invertible", "zero matrix");
  SeriesMatrix a = A.map([&](const RobbaElement& x) { return rebind(x, d); });
  SeriesMatrix inv = identity_matrix(d, n);
  for (size_t k = 0; k < n; ++k) {
    std::optional<size_t> piv;
    RobbaElement pinv;
    for (size_t r = k; r < n && !piv; ++r) {
      if (a(r, k).is_zero()) continue;
      try {
        pinv = invert_series(a(r, k).pruned());
        piv = r;
      } catch (const Error&) {
      }
    }
    if (!piv) throw Error("connection.not_invertible", "no recognized unit pivot in column " + std::to_string(k));
    for (size_t j = 0; j < n; ++j) {
      std::swap(a(k, j), a(*piv, j));
      std::swap(inv(k, j), inv(*piv, j));
    }
    for (size_t j = 0; j < n; ++j) {
      a(k, j) = (a(k, j) * pinv).pruned();
      inv(k, j) = (inv(k, j) * pinv).pruned();
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == k || a(r, k).is_zero()) continue;
      RobbaElement f = a(r, k);
      for (size_t j = 0; j < n; ++j) {
        a(r, j) = (a(r, j) - f * a(k, j)).pruned();
        inv(r, j) = (inv(r, j) - f * inv(k, j)).pruned();
      }
    }
  }
  return inv;
}

SeriesMatrix euler_derivative(const SeriesMatrix& A) {
  return map_entries(A, [](const RobbaElement& x) { return euler_derivative(x, 0); });
}

RobbaModule gauge_transform(const RobbaModule& m, const SeriesMatrix& F) {
  check_square(F, m.rank(), "basis change");
  SeriesMatrix Fb = map_entries(F, [&](const RobbaElement& x) { return rebind(x, m.ring); });
  SeriesMatrix Finv = invert_matrix(Fb);
  RobbaModule out{m.ring, Finv * (m.N * Fb + euler_derivative(Fb)), std::nullopt};
  if (m.Phi) {
    auto sF = map_entries(Fb, [&](const RobbaElement& x) { return frobenius_substitute(x, m.ring.q); });
    out.Phi = Finv * *m.Phi * sF;
  }
  out.N = map_entries(out.N, [&](const RobbaElement& x) { return rebind(x, m.ring); });
  return out;
}

}  // namespace ovc
