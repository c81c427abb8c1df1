#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ovc/padic.hpp"

namespace ovc {

using SparseVector = std::map<size_t, PadicApprox>;

/// Row-major sparse matrix over Q_p at finite precision.
struct SparseMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<SparseVector> row;
  long prime = 0;  // needed for kernels of matrices without entries
  int precision = 1;

  SparseMatrix() = default;
  SparseMatrix(size_t r, size_t c, long p = 0, int prec = 1) : rows(r), cols(c), row(r), prime(p), precision(prec) {}
  /// Accumulates x into (i, j); exact zeros are skipped.
  void add(size_t i, size_t j, const PadicApprox& x);
  SparseVector apply(const SparseVector& v) const;
};

struct Elimination {
  size_t rank = 0;
  bool reliable = true;
  std::optional<long> max_pivot_value;  // largest pivot valuation
  std::optional<long> floor;            // least absolute precision among residual limited zeros
  std::vector<size_t> pivot_cols;       // ascending
  std::vector<SparseVector> kernel;     // right kernel, one vector per free column (ascending)
  std::vector<size_t> free_cols;
};

/// Full-pivot Gauss-Jordan elimination on the connected blocks of A. Pivots
/// minimize valuation, ties broken by (column, row). A rank is reliable when
/// every pivot valuation sits strictly below the floor of the leftover zeros.
Elimination eliminate(const SparseMatrix& A, bool want_kernel);

/// Worker count from OVC_THREADS (default: hardware concurrency, at least 1).
unsigned thread_count();

/// Incrementally built span with reduced rows; insertion reports whether the
/// vector was new modulo the span.
class EchelonSpace {
 public:
  /// Reduces v against the span; returns the residual.
  SparseVector reduce(SparseVector v) const;
  /// Adds v if it is independent at working precision; returns true on growth.
  bool insert(const SparseVector& v);
  bool contains(const SparseVector& v) const;
  size_t dim() const noexcept { return rows_.size(); }

 private:
  std::vector<std::pair<size_t, SparseVector>> rows_;  // (pivot column, row) with row[pivot] = 1
  std::map<size_t, size_t> by_pivot_;
};

bool sparse_is_zero(const SparseVector& v);

}  // namespace ovc
