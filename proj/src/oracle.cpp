#include "ovc/oracle.hpp"

#include <algorithm>

namespace ovc::oracle {

size_t rank(RationalMatrix A) {
  size_t r = 0;
  const size_t rows = A.size(), cols = rows ? A[0].size() : 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t piv = r;
    while (piv < rows && A[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(A[piv], A[r]);
    for (size_t i = r + 1; i < rows; ++i) {
      if (A[i][c] == 0) continue;
      Rational f = A[i][c] / A[r][c];
      for (size_t j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
    }
    ++r;
  }
  return r;
}

namespace {

// Dense matrix of f ↦ δf + Γf from degree ≤ src into degree ≤ dst, rows
// restricted to degrees in [lo_row, dst].
RationalMatrix de_rham_matrix(const PolyMatrix& Gamma, bool dlog, long src, long dst, long lo_row) {
  const size_t n = Gamma.size();
  const long rows_per = dst - lo_row + 1;
  RationalMatrix A(n * std::max(0L, rows_per), std::vector<Rational>(n * (src + 1), 0));
  auto put = [&](size_t comp, long deg, size_t col, const Rational& v) {
    if (deg < lo_row || deg > dst) return;
    A[comp * rows_per + (deg - lo_row)][col] += v;
  };
  for (size_t j = 0; j < n; ++j)
    for (long d = 0; d <= src; ++d) {
      size_t col = j * (src + 1) + d;
      if (d > 0) put(j, dlog ? d : d - 1, col, d);
      for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < Gamma[i][j].size(); ++k)
          if (Gamma[i][j][k] != 0) put(i, d + static_cast<long>(k), col, Gamma[i][j][k]);
    }
  return A;
}

}  // namespace

std::pair<size_t, size_t> polynomial_de_rham(const PolyMatrix& Gamma, bool dlog, long N, long extra) {
  const size_t n = Gamma.size();
  long g = 0;
  for (const auto& row : Gamma)
    for (const auto& p : row)
      for (size_t k = 0; k < p.size(); ++k)
        if (p[k] != 0) g = std::max(g, static_cast<long>(k));
  // Kernel: nothing is truncated.
  size_t h0 = n * (N + 1) - rank(de_rham_matrix(Gamma, dlog, N, N + g, 0));
  // Cokernel on degree ≤ N: images of degree ≤ N + extra sources that stay in degree ≤ N.
  const long S = N + extra;
  size_t full = rank(de_rham_matrix(Gamma, dlog, S, S + g, 0));
  size_t above = rank(de_rham_matrix(Gamma, dlog, S, S + g, N + 1));
  return {h0, n * (N + 1) - (full - above)};
}

std::pair<size_t, size_t> kummer_laurent(const Rational& a, long w) {
  size_t zeros = 0;
  for (long i = -w; i <= w; ++i)
    if (Rational(i) + a == 0) ++zeros;
  return {zeros, zeros};
}

std::vector<size_t> kunneth(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  std::vector<size_t> out(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace ovc::oracle

namespace ovc::oracle {

long least_denominator(long p, long m, long l, long e) {
  std::vector<Integer> poly{1};
  for (long i = 1; i <= l; ++i) {
    std::vector<Integer> next(poly.size() + 1, 0);
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k] * (m + i);
      next[k + 1] += poly[k];
    }
    poly = std::move(next);
  }
  long vfact = 0;
  for (long pk = p; pk <= l; pk *= p) vfact += l / pk;
  long worst = 0;
  for (long k = 0; k < e && k < static_cast<long>(poly.size()); ++k) {
    if (poly[k] == 0) continue;
    long v = 0;
    Integer r = poly[k];
    while (r % p == 0) {
      r /= p;
      ++v;
    }
    worst = std::max(worst, vfact - v);
  }
  return worst;
}

}  // namespace ovc::oracle
