#include "ovc/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace ovc {

void SparseMatrix::add(size_t i, size_t j, const PadicApprox& x) {
  if (x.is_exact_zero()) return;
  auto [it, fresh] = row[i].try_emplace(j, x);
  if (!fresh) it->second = it->second + x;
}

SparseVector SparseMatrix::apply(const SparseVector& v) const {
  SparseVector out;
  for (size_t i = 0; i < rows; ++i) {
    PadicApprox acc;
    bool any = false;
    for (const auto& [j, a] : row[i]) {
      auto it = v.find(j);
      if (it == v.end()) continue;
      acc = acc + a * it->second;
      any = true;
    }
    if (any && !acc.is_exact_zero()) out[i] = acc;
  }
  return out;
}

bool sparse_is_zero(const SparseVector& v) {
  for (const auto& [j, x] : v)
    if (!x.is_zero()) return false;
  return true;
}

unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OVC_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<unsigned>(std::min<long>(n, 256));
  }
  return hw;
}

namespace {

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct Block {
  std::vector<size_t> cols;
  std::vector<SparseVector> rows;
};

struct BlockResult {
  std::vector<size_t> pivot_cols;
  std::vector<long> pivot_values;
  std::optional<long> floor;
  std::vector<size_t> free_cols;
  std::vector<SparseVector> kernel;
};

void note_floor(std::optional<long>& floor, const PadicApprox& x) {
  if (x.is_limited_zero() && (!floor || x.abs_precision() < *floor)) floor = x.abs_precision();
}

// row := row - f * piv, leaving column c removed.
void axpy(SparseVector& row, const PadicApprox& f, const SparseVector& piv, size_t c) {
  for (const auto& [j, x] : piv) {
    if (j == c) continue;
    auto [it, fresh] = row.try_emplace(j, -(f * x));
    if (!fresh) it->second = it->second - f * x;
  }
  row.erase(c);
}

BlockResult eliminate_block(Block b, bool want_kernel) {
  BlockResult out;
  auto& rows = b.rows;
  std::vector<bool> active(rows.size(), true);
  std::vector<std::pair<size_t, size_t>> pivots;  // (col, row)
  while (true) {
    long bv = 0;
    size_t bc = 0, br = 0;
    bool found = false;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (!active[r]) continue;
      for (const auto& [c, x] : rows[r]) {
        if (x.is_zero()) continue;
        long v = x.valuation();
        if (!found || v < bv || (v == bv && (c < bc || (c == bc && r < br)))) {
          found = true;
          bv = v;
          bc = c;
          br = r;
        }
      }
    }
    if (!found) break;
    out.pivot_values.push_back(bv);
    PadicApprox inv = rows[br].at(bc).inverse();
    for (auto& [c, x] : rows[br]) x = x * inv;
    rows[br][bc] = PadicApprox::from_integer(1, inv.prime(), inv.precision());
    active[br] = false;
    pivots.emplace_back(bc, br);
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == br || (!active[r] && !want_kernel)) continue;
      auto it = rows[r].find(bc);
      if (it == rows[r].end()) continue;
      if (it->second.is_zero()) {
        rows[r].erase(it);
        continue;
      }
      PadicApprox f = it->second;
      axpy(rows[r], f, rows[br], bc);
    }
  }
  for (size_t r = 0; r < rows.size(); ++r)
    if (active[r])
      for (const auto& [c, x] : rows[r]) note_floor(out.floor, x);
  std::sort(pivots.begin(), pivots.end());
  for (auto& [c, r] : pivots) out.pivot_cols.push_back(c);
  for (size_t c : b.cols)
    if (!std::binary_search(out.pivot_cols.begin(), out.pivot_cols.end(), c)) out.free_cols.push_back(c);
  if (want_kernel) {
    // The free coordinate itself (= 1) is filled in by the caller.
    for (size_t f : out.free_cols) {
      SparseVector k;
      for (auto& [c, r] : pivots) {
        auto it = rows[r].find(f);
        if (it != rows[r].end() && !it->second.is_exact_zero()) k[c] = -it->second;
      }
      out.kernel.push_back(std::move(k));
    }
  }
  return out;
}

}  // namespace

Elimination eliminate(const SparseMatrix& A, bool want_kernel) {
  Elimination out;
  long p = A.prime;
  int prec = A.precision;
  UnionFind uf(A.cols);
  for (const auto& r : A.row) {
    std::optional<size_t> first;
    for (const auto& [c, x] : r) {
      if (x.is_zero()) {
        note_floor(out.floor, x);
        continue;
      }
      if (!p) {
        p = x.prime();
        prec = x.precision();
      }
      if (first)
        uf.unite(*first, c);
      else
        first = c;
    }
  }
  std::map<size_t, size_t> block_of_root;
  std::vector<Block> blocks;
  for (size_t c = 0; c < A.cols; ++c) {
    size_t root = uf.find(c);
    auto [it, fresh] = block_of_root.try_emplace(root, blocks.size());
    if (fresh) blocks.emplace_back();
    blocks[it->second].cols.push_back(c);
  }
  for (const auto& r : A.row) {
    SparseVector nz;
    for (const auto& [c, x] : r)
      if (!x.is_zero()) nz.emplace(c, x);
    if (nz.empty()) continue;
    blocks[block_of_root.at(uf.find(nz.begin()->first))].rows.push_back(std::move(nz));
  }

  std::vector<BlockResult> results(blocks.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t k; (k = next.fetch_add(1)) < blocks.size();) results[k] = eliminate_block(std::move(blocks[k]), want_kernel);
  };
  unsigned nt = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max<size_t>(1, blocks.size() / 64)));
  if (nt <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (want_kernel && !p && A.cols) throw Error("linalg.no_prime", "kernel of an empty matrix needs a prime");
  const PadicApprox one = p ? PadicApprox::from_integer(1, p, prec) : PadicApprox();
  for (auto& r : results) {
    out.rank += r.pivot_cols.size();
    out.pivot_cols.insert(out.pivot_cols.end(), r.pivot_cols.begin(), r.pivot_cols.end());
    out.free_cols.insert(out.free_cols.end(), r.free_cols.begin(), r.free_cols.end());
    for (long v : r.pivot_values)
      if (!out.max_pivot_value || v > *out.max_pivot_value) out.max_pivot_value = v;
    if (r.floor && (!out.floor || *r.floor < *out.floor)) out.floor = r.floor;
    if (want_kernel)
      for (size_t k = 0; k < r.kernel.size(); ++k) {
        r.kernel[k][r.free_cols[k]] = one;
        out.kernel.push_back(std::move(r.kernel[k]));
      }
  }
  std::sort(out.pivot_cols.begin(), out.pivot_cols.end());
  if (want_kernel) {
    std::vector<size_t> order(out.free_cols.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return out.free_cols[a] < out.free_cols[b]; });
    std::vector<SparseVector> kern;
    std::vector<size_t> fc;
    for (size_t i : order) {
      kern.push_back(std::move(out.kernel[i]));
      fc.push_back(out.free_cols[i]);
    }
    out.kernel = std::move(kern);
    out.free_cols = std::move(fc);
  } else {
    std::sort(out.free_cols.begin(), out.free_cols.end());
  }
  out.reliable = !out.floor || !out.max_pivot_value || *out.max_pivot_value < *out.floor;
  return out;
}

SparseVector EchelonSpace::reduce(SparseVector v) const {
  for (const auto& [pc, row] : rows_) {
    auto it = v.find(pc);
    if (it == v.end() || it->second.is_exact_zero()) continue;
    if (it->second.is_zero()) {
      v.erase(it);
      continue;
    }
    PadicApprox f = it->second;
    axpy(v, f, row, pc);
  }
  return v;
}

bool EchelonSpace::insert(const SparseVector& v) {
  SparseVector r = reduce(v);
  std::optional<size_t> pc;
  long best = 0;
  for (const auto& [c, x] : r) {
    if (x.is_zero()) continue;
    if (!pc || x.valuation() < best) {
      pc = c;
      best = x.valuation();
    }
  }
  if (!pc) return false;
  PadicApprox inv = r.at(*pc).inverse();
  SparseVector row;
  for (const auto& [c, x] : r)
    if (!x.is_zero()) row[c] = x * inv;
  row[*pc] = PadicApprox::from_integer(1, inv.prime(), inv.precision());
  by_pivot_[*pc] = rows_.size();
  rows_.emplace_back(*pc, std::move(row));
  return true;
}

bool EchelonSpace::contains(const SparseVector& v) const { return sparse_is_zero(reduce(v)); }

}  // namespace ovc
