#include <random>

#include "doctest.h"
#include "ovc/linalg.hpp"

using namespace ovc;

namespace {

// Exact rank over Q by fraction-free elimination.
size_t rational_rank(std::vector<std::vector<Rational>> a) {
  size_t rank = 0, rows = a.size(), cols = rows ? a[0].size() : 0;
  for (size_t c = 0; c < cols && rank < rows; ++c) {
    size_t piv = rank;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    for (size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][c] == 0) continue;
      Rational f = a[r][c] / a[rank][c];
      for (size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("elimination rank and kernel agree with exact rational arithmetic") {
  std::mt19937_64 rng(2024);
  const long p = 3;
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> dim(1, 9), co(-6, 6), sparse(0, 2);
    size_t r = dim(rng), c = dim(rng);
    std::vector<std::vector<Rational>> dense(r, std::vector<Rational>(c, 0));
    SparseMatrix A(r, c, p, 30);
    // Low-rank products make kernels and dependencies common.
    size_t k = 1 + rng() % 4;
    std::vector<std::vector<long>> L(r, std::vector<long>(k)), R(k, std::vector<long>(c));
    for (auto& row : L)
      for (auto& x : row) x = sparse(rng) ? co(rng) : 0;
    for (auto& row : R)
      for (auto& x : row) x = sparse(rng) ? co(rng) * (rng() % 2 ? 1 : 9) : 0;
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) {
        long s = 0;
        for (size_t m = 0; m < k; ++m) s += L[i][m] * R[m][j];
        dense[i][j] = s;
        if (s) A.add(i, j, PadicApprox::from_integer(s, p, 30));
      }
    auto e = eliminate(A, true);
    CHECK(e.rank == rational_rank(dense));
    CHECK(e.reliable);
    CHECK(e.kernel.size() == c - e.rank);
    for (const auto& v : e.kernel) CHECK(sparse_is_zero(A.apply(v)));
    EchelonSpace S;
    for (size_t i = 0; i < r; ++i) S.insert(A.row[i]);
    CHECK(S.dim() == e.rank);
    for (size_t i = 0; i < r; ++i) CHECK(S.contains(A.row[i]));
  }
}

TEST_CASE("blocks are found and zero columns are free") {
  SparseMatrix A(3, 4, 5, 10);
  A.add(0, 0, PadicApprox::from_integer(5, 5, 10));
  A.add(1, 2, PadicApprox::from_integer(1, 5, 10));
  A.add(2, 2, PadicApprox::from_integer(2, 5, 10));
  auto e = eliminate(A, true);
  CHECK(e.rank == 2);
  CHECK(e.free_cols == std::vector<size_t>{1, 3});
  CHECK(*e.max_pivot_value == 1);

  SparseMatrix Z(2, 2, 5, 10);
  auto z = eliminate(Z, true);
  CHECK(z.rank == 0);
  CHECK(z.kernel.size() == 2);
}

TEST_CASE("precision-limited leftovers make a rank unreliable when pivots are deeper") {
  SparseMatrix A(2, 2, 3, 4);
  // rows (1, 1) and (1, 1 + 3^5): the difference 3^5 is invisible at precision 4
  A.add(0, 0, PadicApprox::from_integer(1, 3, 4));
  A.add(0, 1, PadicApprox::from_integer(1, 3, 4));
  A.add(1, 0, PadicApprox::from_integer(1, 3, 4));
  A.add(1, 1, PadicApprox::from_integer(1 + 243, 3, 4));
  auto e = eliminate(A, false);
  CHECK(e.rank == 1);
  REQUIRE(e.floor.has_value());
  CHECK(*e.floor == 4);
  CHECK(e.reliable);

  SparseMatrix B(2, 2, 3, 4);
  B.add(0, 0, PadicApprox::from_parts(1, 6, 4, 3));
  B.add(1, 1, PadicApprox::from_integer(1, 3, 4));
  B.add(1, 0, PadicApprox::limited_zero(3, 5));
  auto u = eliminate(B, false);
  CHECK(u.rank == 2);
  CHECK_FALSE(u.reliable);
}

TEST_CASE("thread count follows OVC_THREADS") {
  setenv("OVC_THREADS", "3", 1);
  CHECK(thread_count() == 3);
  setenv("OVC_THREADS", "junk", 1);
  CHECK(thread_count() >= 1);
  unsetenv("OVC_THREADS");
}
