#include "complex.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>

namespace ovc::detail {

std::vector<size_t> mask_to_indices(unsigned J) {
  std::vector<size_t> out;
  for (size_t i = 0; J; ++i, J >>= 1)
    if (J & 1u) out.push_back(i);
  return out;
}

unsigned indices_to_mask(const std::vector<size_t>& J) {
  unsigned m = 0;
  for (size_t i : J) m |= 1u << i;
  return m;
}

int wedge_sign(unsigned J, size_t i) { return std::popcount(J & ((1u << i) - 1u)) % 2 ? -1 : 1; }

namespace {

long abs_total(const Exponent& e) {
  long s = 0;
  for (long x : e) s += x < 0 ? -x : x;
  return s;
}

bool key_order(const Key& a, const Key& b) {
  long ta = abs_total(a.e), tb = abs_total(b.e);
  if (ta != tb) return ta < tb;
  if (a.e != b.e) return a.e < b.e;
  if (a.J != b.J) return a.J < b.J;
  return a.comp < b.comp;
}

// v := v - f * row.
void axpy(SparseVector& v, const PadicApprox& f, const SparseVector& row) {
  for (const auto& [j, x] : row) {
    auto [it, fresh] = v.try_emplace(j, -(f * x));
    if (!fresh) it->second = it->second - f * x;
  }
}

void add_into(SparseVector& v, const PadicApprox& f, const SparseVector& row) {
  for (const auto& [j, x] : row) {
    auto [it, fresh] = v.try_emplace(j, f * x);
    if (!fresh) it->second = it->second + f * x;
  }
}

struct Columns {
  std::vector<Key> row_keys;
  std::map<Key, size_t> row_index;
  std::vector<std::vector<std::pair<size_t, PadicApprox>>> cols;
};

Columns differential_columns(const ComplexSpec& s, const Layout& src) {
  Columns out;
  out.cols.resize(src.keys.size());
  std::vector<Term> terms;
  for (size_t c = 0; c < src.keys.size(); ++c) {
    terms.clear();
    s.d(src.keys[c], terms);
    std::map<size_t, PadicApprox> acc;
    for (auto& t : terms) {
      if (t.c.is_exact_zero()) continue;
      if (s.keep && !s.keep(t.key.e)) continue;
      auto [it, fresh] = out.row_index.try_emplace(t.key, out.row_keys.size());
      if (fresh) out.row_keys.push_back(t.key);
      auto [a, f2] = acc.try_emplace(it->second, t.c);
      if (!f2) a->second = a->second + t.c;
    }
    for (auto& [r, x] : acc)
      if (!x.is_exact_zero()) out.cols[c].emplace_back(r, x);
  }
  return out;
}

SparseMatrix to_matrix(const ComplexSpec& s, const Columns& C, const std::function<std::optional<size_t>(size_t)>& row_map,
                       size_t nrows) {
  SparseMatrix A(nrows, C.cols.size(), s.p, s.precision);
  for (size_t c = 0; c < C.cols.size(); ++c)
    for (const auto& [r, x] : C.cols[c])
      if (auto rr = row_map(r)) A.add(*rr, c, x);
  return A;
}

void merge(DegreeData& d, const Elimination& e) {
  d.reliable = d.reliable && e.reliable;
  if (e.max_pivot_value && (!d.max_pivot || *e.max_pivot_value > *d.max_pivot)) d.max_pivot = e.max_pivot_value;
}

}  // namespace

Layout make_layout(const ComplexSpec& s, size_t degree, long w) {
  Layout L;
  Box b = s.box(w);
  std::vector<unsigned> masks;
  for (unsigned J = 0; J < (1u << s.vars); ++J)
    if (static_cast<size_t>(std::popcount(J)) == degree) masks.push_back(J);
  bool empty = false;
  for (auto& [lo, hi] : b)
    if (lo > hi) empty = true;
  if (!empty) {
    Exponent e(s.box_vars);
    for (size_t i = 0; i < s.box_vars; ++i) e[i] = b[i].first;
    while (true) {
      if (!s.keep || s.keep(e))
        for (unsigned J : masks)
          for (size_t k = 0; k < s.rank; ++k) L.keys.push_back({J, k, e});
      size_t i = 0;
      for (; i < s.box_vars; ++i) {
        if (e[i] < b[i].second) {
          ++e[i];
          break;
        }
        e[i] = b[i].first;
      }
      if (i == s.box_vars) break;
    }
  }
  std::sort(L.keys.begin(), L.keys.end(), key_order);
  for (size_t i = 0; i < L.keys.size(); ++i) L.index.emplace(L.keys[i], i);
  return L;
}

std::pair<SparseVector, SparseVector> TaggedSpace::reduce(SparseVector v) const {
  SparseVector acc;
  for (const auto& r : rows_) {
    auto it = v.find(r.pivot);
    if (it == v.end()) continue;
    if (it->second.is_zero()) {
      v.erase(it);
      continue;
    }
    PadicApprox f = it->second;
    axpy(v, f, r.row);
    v.erase(r.pivot);
    add_into(acc, f, r.tag);
  }
  return {std::move(v), std::move(acc)};
}

bool TaggedSpace::insert(const SparseVector& v, std::optional<size_t> tag) {
  auto [res, acc] = reduce(v);
  std::optional<size_t> pc;
  long best = 0;
  for (const auto& [c, x] : res) {
    if (x.is_zero()) continue;
    if (!pc || x.valuation() < best) {
      pc = c;
      best = x.valuation();
    }
  }
  if (!pc) return false;
  PadicApprox inv = res.at(*pc).inverse();
  Row r;
  r.pivot = *pc;
  for (const auto& [c, x] : res)
    if (!x.is_zero()) r.row[c] = x * inv;
  r.row[*pc] = PadicApprox::from_integer(1, inv.prime(), inv.precision());
  for (const auto& [j, x] : acc) r.tag[j] = -(x * inv);
  if (tag) {
    auto [it, fresh] = r.tag.try_emplace(*tag, inv);
    if (!fresh) it->second = it->second + inv;
  }
  rows_.push_back(std::move(r));
  return true;
}

std::optional<std::vector<PadicApprox>> TaggedSpace::coordinates(const SparseVector& v, size_t tags) const {
  auto [res, acc] = reduce(v);
  if (!sparse_is_zero(res)) return std::nullopt;
  std::vector<PadicApprox> out(tags);
  for (const auto& [j, x] : acc)
    if (j < tags) out[j] = x;
  return out;
}

DegreeData compute_degree(const ComplexSpec& s, size_t degree, long w, bool want_generators) {
  DegreeData out;
  out.degree = degree;
  out.window = w;
  out.layout = make_layout(s, degree, w);
  const Layout& L = out.layout;

  size_t zdim = L.keys.size();
  std::optional<Elimination> ez;
  if (degree < s.vars) {
    Columns C = differential_columns(s, L);
    ez = eliminate(to_matrix(s, C, [](size_t r) { return std::optional<size_t>(r); }, C.row_keys.size()), want_generators);
    merge(out, *ez);
    zdim -= ez->rank;
  }

  size_t bdim = 0;
  std::optional<Columns> B;
  std::optional<SparseMatrix> projected;
  if (degree > 0) {
    Layout S = make_layout(s, degree - 1, w + s.spill);
    B = differential_columns(s, S);
    std::vector<std::optional<size_t>> outside(B->row_keys.size());
    size_t n_out = 0;
    for (size_t r = 0; r < B->row_keys.size(); ++r)
      if (!L.index.count(B->row_keys[r])) outside[r] = n_out++;
    auto full = eliminate(to_matrix(s, *B, [](size_t r) { return std::optional<size_t>(r); }, B->row_keys.size()), false);
    projected = to_matrix(s, *B, [&](size_t r) { return outside[r]; }, n_out);
    auto ep = eliminate(*projected, false);
    merge(out, full);
    merge(out, ep);
    bdim = full.rank - ep.rank;
  }

  if (bdim > zdim) {
    out.reliable = false;
    out.dim = 0;
  } else {
    out.dim = zdim - bdim;
  }
  if (!want_generators || out.dim == 0) return out;

  out.coords.emplace();
  if (degree > 0) {
    auto ep = eliminate(*projected, true);
    for (const auto& y : ep.kernel) {
      SparseVector img;
      for (const auto& [c, yc] : y)
        for (const auto& [r, x] : B->cols[c]) {
          auto it = L.index.find(B->row_keys[r]);
          if (it == L.index.end()) continue;
          auto [a, fresh] = img.try_emplace(it->second, yc * x);
          if (!fresh) a->second = a->second + yc * x;
        }
      out.coords->insert(img, std::nullopt);
    }
  }
  std::vector<SparseVector> candidates;
  if (ez) {
    candidates = ez->kernel;
  } else {
    const PadicApprox one = PadicApprox::from_integer(1, s.p, s.precision);
    for (size_t c = 0; c < L.keys.size(); ++c) candidates.push_back({{c, one}});
  }
  for (const auto& z : candidates) {
    if (out.generators.size() == out.dim) break;
    if (out.coords->insert(z, out.generators.size())) out.generators.push_back(z);
  }
  if (out.generators.size() != out.dim) out.reliable = false;
  return out;
}

Chain apply_d(const ComplexSpec& s, const Chain& v) {
  Chain out;
  std::vector<Term> terms;
  for (const auto& [k, c] : v) {
    terms.clear();
    s.d(k, terms);
    for (auto& t : terms) {
      if (s.keep && !s.keep(t.key.e)) continue;
      PadicApprox x = c * t.c;
      if (x.is_exact_zero()) continue;
      auto [it, fresh] = out.try_emplace(t.key, x);
      if (!fresh) it->second = it->second + x;
    }
  }
  for (auto it = out.begin(); it != out.end();) it = it->second.is_exact_zero() ? out.erase(it) : std::next(it);
  return out;
}

Chain to_chain(const Layout& L, const SparseVector& v) {
  Chain out;
  for (const auto& [i, c] : v)
    if (!c.is_exact_zero()) out.emplace(L.keys.at(i), c);
  return out;
}

std::optional<SparseVector> to_layout(const Layout& L, const Chain& v) {
  SparseVector out;
  for (const auto& [k, c] : v) {
    if (c.is_zero()) continue;
    auto it = L.index.find(k);
    if (it == L.index.end()) return std::nullopt;
    out[it->second] = c;
  }
  return out;
}

std::optional<std::vector<PadicApprox>> class_coordinates(const DegreeData& d, const Chain& v) {
  if (d.dim == 0) return std::vector<PadicApprox>{};
  if (!d.coords) return std::nullopt;
  auto lv = to_layout(d.layout, v);
  if (!lv) return std::nullopt;
  return d.coords->coordinates(*lv, d.dim);
}

std::optional<Rational> chain_defect(const Chain& v) {
  std::optional<long> best;
  for (const auto& [k, c] : v) {
    long x = c.is_zero() ? c.abs_precision() : c.valuation();
    if (c.is_exact_zero()) continue;
    if (!best || x < *best) best = x;
  }
  if (!best) return std::nullopt;
  return Rational(*best);
}

FormElement to_form(const Chain& v, size_t rank, const RingDescriptor& ring) {
  FormElement out;
  for (const auto& [k, c] : v) {
    auto& mv = out.try_emplace(mask_to_indices(k.J), ModuleVector(rank, RobbaElement(ring))).first->second;
    mv[k.comp].add_term(k.e, c);
  }
  return out;
}

Chain from_form(const FormElement& f) {
  Chain out;
  for (const auto& [J, mv] : f) {
    unsigned m = indices_to_mask(J);
    for (size_t k = 0; k < mv.size(); ++k)
      for (const auto& [e, c] : mv[k].terms()) {
        if (c.is_exact_zero()) continue;
        Key key{m, k, e};
        auto [it, fresh] = out.try_emplace(key, c);
        if (!fresh) it->second = it->second + c;
      }
  }
  return out;
}

void fill_degree(CohomologyReport& rep, size_t slot, const DegreeData& d, const ComplexSpec& s,
                 const RingDescriptor& ring, const std::string& var) {
  rep.dims[slot] = d.dim;
  rep.reliable[slot] = d.reliable;
  if (d.max_pivot) rep.precision = std::min<long>(rep.precision, s.precision - *d.max_pivot);
  for (const auto& g : d.generators) {
    Chain c = to_chain(d.layout, g);
    Generator gen;
    gen.value = to_form(c, s.rank, ring);
    gen.defect = chain_defect(apply_d(s, c));
    // Label by the lowest basis element present.
    size_t first = g.begin()->first;
    for (const auto& [i, x] : g)
      if (!x.is_zero()) {
        first = i;
        break;
      }
    const Key& k = d.layout.keys.at(first);
    std::ostringstream os;
    os << var << "^(";
    for (size_t i = 0; i < k.e.size(); ++i) os << (i ? "," : "") << k.e[i];
    os << ") e" << k.comp;
    if (k.J) {
      os << " w{";
      auto idx = mask_to_indices(k.J);
      for (size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
      os << "}";
    }
    gen.label = os.str();
    rep.generators[slot].push_back(std::move(gen));
  }
}

}  // namespace ovc::detail
