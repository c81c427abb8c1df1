#include "ovc/factor.hpp"

#include <map>

namespace ovc {

namespace {

RobbaElement bind(const RobbaElement& x, const RingDescriptor& d) { return x.bound() ? x : RobbaElement(d); }

const RingDescriptor& descriptor_of(const SeriesMatrix& U) {
  for (size_t i = 0; i < U.rows(); ++i)
    for (size_t j = 0; j < U.cols(); ++j)
      if (U(i, j).bound()) return U(i, j).descriptor();
  throw Error("factor.unsupported_shape", "matrix has no ring attached");
}

// ---- F_p Laurent series on a window ----------------------------------------

using FpSeries = std::map<long, long>;  // exponent -> coefficient in [1, p)

long mod(long a, long p) { return ((a % p) + p) % p; }

long inv_mod(long a, long p) {
  long r = 1, b = mod(a, p), e = p - 2;
  while (e > 0) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

void fp_add(FpSeries& s, long e, long c, long p) {
  c = mod(c, p);
  if (!c) return;
  long v = mod(s[e] + c, p);
  if (v)
    s[e] = v;
  else
    s.erase(e);
}

FpSeries reduce(const RobbaElement& x) {
  FpSeries out;
  const long p = x.descriptor().p;
  for (const auto& [e, c] : x.terms()) {
    if (c.is_zero()) {
      if (c.abs_precision() < 1) throw Error("factor.precision_exhausted", "entry unknown modulo p");
      continue;
    }
    if (c.valuation() < 0) throw Error("factor.not_integral", "entry has a negative coefficient valuation");
    if (c.valuation() > 0) continue;
    long u = mod(mpz_fdiv_ui(c.unit().get_mpz_t(), static_cast<unsigned long>(p)), p);
    if (u) out[e[0]] = u;
  }
  return out;
}

// q·a truncated above hi.
FpSeries fp_mul(const FpSeries& q, const FpSeries& a, long hi, long p) {
  FpSeries out;
  for (auto [e1, c1] : q)
    for (auto [e2, c2] : a)
      if (e1 + e2 <= hi) fp_add(out, e1 + e2, c1 * c2, p);
  return out;
}

// b/a in k[[t]] to K terms, given val(b) >= val(a).
FpSeries fp_quotient(const FpSeries& b, const FpSeries& a, long K, long p) {
  const long alpha = a.begin()->first;
  std::vector<long> an(K, 0), inv(K, 0);
  for (auto [e, c] : a)
    if (e - alpha < K) an[e - alpha] = c;
  inv[0] = inv_mod(an[0], p);
  for (long k = 1; k < K; ++k) {
    long s = 0;
    for (long j = 1; j <= k; ++j) s = mod(s + an[j] * inv[k - j], p);
    inv[k] = mod(-inv[0] * s, p);
  }
  FpSeries q;
  for (auto [e, c] : b)
    for (long k = 0; k < K; ++k) {
      long x = e - alpha + k;
      if (x >= K) break;
      if (inv[k]) fp_add(q, x, c * inv[k], p);
    }
  return q;
}

RobbaElement lift(const FpSeries& s, const RingDescriptor& d) {
  RobbaElement out(d);
  for (auto [e, c] : s) out.add_term({e}, d.scalar(c));
  return out;
}

RobbaElement scaled(const RobbaElement& x, const PadicApprox& c) { return x.scaled(c); }

}  // namespace

SeriesMatrix apply_elementary(const SeriesMatrix& M, const ElementaryOp& op, Side side) {
  const size_t n = side == Side::Left ? M.rows() : M.cols();
  if (op.i >= n || op.j >= n) throw Error("factor.bad_index", "elementary operation index out of range");
  SeriesMatrix out = M;
  const bool left = side == Side::Left;
  const size_t len = left ? M.cols() : M.rows();
  auto at = [&](SeriesMatrix& A, size_t line, size_t k) -> RobbaElement& { return left ? A(line, k) : A(k, line); };
  switch (op.kind) {
    case ElementaryKind::Swap:
      for (size_t k = 0; k < len; ++k) std::swap(at(out, op.i, k), at(out, op.j, k));
      break;
    case ElementaryKind::Scale: {
      try {
        (void)invert_series(op.factor.pruned());
      } catch (const Error&) {
        throw Error("factor.non_unit", "scale factor is not a recognized unit");
      }
      for (size_t k = 0; k < len; ++k) at(out, op.i, k) = at(out, op.i, k) * op.factor;
      break;
    }
    case ElementaryKind::AddMultiple:
      if (op.i == op.j) throw Error("factor.bad_index", "row added to itself");
      // Left: row i += f row j. Right (M·E): column j += f column i.
      if (left)
        for (size_t k = 0; k < len; ++k) out(op.i, k) = out(op.i, k) + op.factor * M(op.j, k);
      else
        for (size_t k = 0; k < len; ++k) out(k, op.j) = out(k, op.j) + M(k, op.i) * op.factor;
      break;
  }
  return out;
}

ElementaryOp transpose_op(const ElementaryOp& op) {
  ElementaryOp out = op;
  if (op.kind == ElementaryKind::AddMultiple) std::swap(out.i, out.j);
  return out;
}

ElementaryOp inverse_op(const ElementaryOp& op) {
  ElementaryOp out = op;
  if (op.kind == ElementaryKind::AddMultiple) out.factor = -op.factor;
  if (op.kind == ElementaryKind::Scale) out.factor = invert_series(op.factor.pruned());
  return out;
}

ModpReduction reduce_modp_elementary(const SeriesMatrix& U) {
  const auto& d = descriptor_of(U);
  const long p = d.p, lo = d.window[0].first, hi = d.window[0].second;
  const size_t n = U.rows(), m = U.cols();
  std::vector<std::vector<FpSeries>> rows(n, std::vector<FpSeries>(m));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      if (U(i, j).bound()) rows[i][j] = reduce(U(i, j));

  std::vector<size_t> remaining(n);
  for (size_t i = 0; i < n; ++i) remaining[i] = i;
  ModpReduction out;
  auto find_zero = [&]() -> std::optional<size_t> {
    for (size_t r : remaining) {
      bool zero = true;
      for (const auto& s : rows[r]) zero &= s.empty();
      if (zero) return r;
    }
    return std::nullopt;
  };

  for (size_t c = 0; c < m; ++c) {
    if (auto z = find_zero()) {
      out.zero_row = *z;
      return out;
    }
    std::optional<size_t> piv;
    for (size_t r : remaining)
      if (!rows[r][c].empty() && (!piv || rows[r][c].begin()->first < rows[*piv][c].begin()->first)) piv = r;
    if (!piv) continue;
    for (size_t r : remaining) {
      if (r == *piv || rows[r][c].empty()) continue;
      FpSeries q = fp_quotient(rows[r][c], rows[*piv][c], hi - lo + 1, p);
      // the lifted factor lives on the window too
      for (auto it = q.lower_bound(hi + 1); it != q.end();) it = q.erase(it);
      for (size_t k = 0; k < m; ++k)
        for (auto [e, x] : fp_mul(q, rows[*piv][k], hi, p)) fp_add(rows[r][k], e, -x, p);
      FpSeries neg;
      for (auto [e, x] : q) neg[e] = mod(-x, p);
      out.ops.push_back({ElementaryKind::AddMultiple, r, *piv, lift(neg, d)});
    }
    std::erase(remaining, *piv);
  }
  if (auto z = find_zero()) {
    out.zero_row = *z;
    return out;
  }
  throw Error("factor.full_rank", "reduction has full rank on the window");
}

RobbaElement determinant(const SeriesMatrix& U) {
  const auto& d = descriptor_of(U);
  const size_t n = U.rows();
  if (U.cols() != n) throw Error("factor.unsupported_shape", "determinant of a non-square matrix");
  if (n == 1) return bind(U(0, 0), d);
  RobbaElement acc(d);
  for (size_t j = 0; j < n; ++j) {
    if (!U(0, j).bound() || U(0, j).terms().empty()) continue;
    SeriesMatrix minor(n - 1, n - 1);
    for (size_t r = 1; r < n; ++r)
      for (size_t c = 0, k = 0; c < n; ++c)
        if (c != j) minor(r - 1, k++) = bind(U(r, c), d);
    RobbaElement term = U(0, j) * determinant(minor);
    acc = j % 2 ? acc - term : acc + term;
  }
  return acc;
}

std::optional<Rational> det_valuation(const SeriesMatrix& U) { return gauss_value(determinant(U).pruned()).value; }

SeriesMatrix clip_above(const SeriesMatrix& A, long hi) {
  return A.map([&](const RobbaElement& x) {
    if (!x.bound()) return x;
    RobbaElement out(x.descriptor());
    for (const auto& [e, c] : x.terms())
      if (e[0] <= hi) out.add_term(e, c);
    return out;
  });
}

FactorResult factor_plus(const SeriesMatrix& U, std::optional<long> max_steps) {
  const auto& d0 = descriptor_of(U);
  const size_t n = U.rows();
  if (U.cols() != n) throw Error("factor.unsupported_shape", "factorization needs a square matrix");

  // Factor t^s U, which has no negative exponents, on a window widened by s:
  // truncation above the window is then compatible with every product.
  long s = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (U(i, j).bound())
        for (const auto& [e, c] : U(i, j).terms()) s = std::max(s, -e[0]);
  RingDescriptor d = d0;
  const long hi = d0.window[0].second;
  d.window[0].second = hi + s;
  const SeriesMatrix Uw = U.map([&](const RobbaElement& x) { return bind(x, d0).rewindowed(d); });
  SeriesMatrix A = Uw.map([&](const RobbaElement& x) { return x.shifted({s}); });

  FactorResult out;
  out.shift = s;
  std::optional<Rational> least;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (auto v = gauss_value(A(i, j)).value; v && (!least || *v < *least)) least = v;
  if (least && *least < 0) {
    out.rescale = mpz_class(-least->get_num()).get_si();
    const PadicApprox ps = d.scalar(Rational(pow_p(d.p, out.rescale)));
    A = A.map([&](const RobbaElement& x) { return x.scaled(ps); });
  }
  auto det0 = det_valuation(A);
  if (!det0) throw Error("factor.not_invertible", "determinant vanishes at working precision");
  const long cap = max_steps.value_or(mpz_class(det0->get_num() / det0->get_den()).get_si());

  SeriesMatrix G = identity_matrix(d, n), Ginv = identity_matrix(d, n);
  const PadicApprox inv_p = d.scalar(Rational(1, d.p)), p_s = d.scalar(d.p);
  std::optional<Rational> dv = det0;
  while (dv && *dv > 0) {
    if (static_cast<long>(out.steps.size()) >= cap)
      throw Error("factor.unsupported_shape", "induction on v(det) exceeded its bound; input needs the general reduction");
    FactorStep step;
    step.det_before = dv;
    SeriesMatrix T = A.transpose();
    auto red = reduce_modp_elementary(T);
    for (const auto& op : red.ops) {
      T = apply_elementary(T, op, Side::Left);
      ElementaryOp col = transpose_op(op);
      G = apply_elementary(G, col, Side::Right);
      Ginv = apply_elementary(Ginv, inverse_op(col), Side::Left);
      step.column_ops.push_back(col);
    }
    const size_t r = red.zero_row;
    for (size_t k = 0; k < n; ++k) {
      for (const auto& [e, c] : T(r, k).terms())
        if (!c.is_zero() && c.valuation() < 1)
          throw Error("factor.precision_exhausted", "cleared row is not divisible by p");
      T(r, k) = scaled(T(r, k), inv_p).pruned();
    }
    for (size_t k = 0; k < n; ++k) {
      G(k, r) = scaled(G(k, r), inv_p);
      Ginv(r, k) = scaled(Ginv(r, k), p_s);
    }
    A = T.transpose();
    step.divided_column = r;
    dv = det_valuation(A);
    step.det_after = dv;
    out.steps.push_back(std::move(step));
  }
  if (!dv) throw Error("factor.precision_exhausted", "determinant lost at working precision");

  out.V = A.map([&](const RobbaElement& x) { return x.shifted({-s}); });
  const PadicApprox down = d.scalar(Rational(1) / Rational(pow_p(d.p, out.rescale)));
  const PadicApprox up = d.scalar(Rational(pow_p(d.p, out.rescale)));
  out.W = Ginv.map([&](const RobbaElement& x) { return bind(x, d).scaled(down).pruned(); });
  out.W_inverse = G.map([&](const RobbaElement& x) { return bind(x, d).scaled(up).pruned(); });

  SeriesMatrix diff = out.V * out.W - Uw;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (const auto& [e, c] : diff(i, j).terms())
        if (e[0] <= hi && !c.is_zero() && (!out.reconstruction_defect || c.valuation() < *out.reconstruction_defect))
          out.reconstruction_defect = Rational(c.valuation());
  return out;
}

}  // namespace ovc
