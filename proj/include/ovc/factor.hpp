#pragma once

#include <optional>
#include <vector>

#include "ovc/connection.hpp"

namespace ovc {

enum class ElementaryKind { Scale, Swap, AddMultiple };

/// Scale: row i *= factor. Swap: rows i, j. AddMultiple: row i += factor · row j.
struct ElementaryOp {
  ElementaryKind kind = ElementaryKind::AddMultiple;
  size_t i = 0;
  size_t j = 0;
  RobbaElement factor;
};

enum class Side { Left, Right };

/// Left: E·M, the row operation. Right: M·E for the same elementary matrix E
/// (a column operation). Scale factors must be recognized units.
SeriesMatrix apply_elementary(const SeriesMatrix& M, const ElementaryOp& op, Side side = Side::Left);
ElementaryOp transpose_op(const ElementaryOp& op);
ElementaryOp inverse_op(const ElementaryOp& op);

struct ModpReduction {
  std::vector<ElementaryOp> ops;  // lifted to integer coefficients, nonnegative exponents
  size_t zero_row = 0;
};

/// Euclidean algorithm column by column over k[[t]] on the reduction mod p of
/// an integral matrix, until some row vanishes on the window. Throws
/// factor.full_rank when no row can be cleared.
ModpReduction reduce_modp_elementary(const SeriesMatrix& U);

struct FactorStep {
  std::vector<ElementaryOp> column_ops;  // applied to U on the right
  size_t divided_column = 0;
  std::optional<Rational> det_before;
  std::optional<Rational> det_after;
};

/// V, W live on U's window widened above by `shift`; V W = U holds on U's window.
struct FactorResult {
  SeriesMatrix V;          // integral, invertible over R^int
  SeriesMatrix W;          // plus part
  SeriesMatrix W_inverse;  // plus part
  long rescale = 0;        // U was multiplied by p^rescale before the induction
  long shift = 0;          // the induction ran on t^shift U
  std::vector<FactorStep> steps;
  std::optional<Rational> reconstruction_defect;  // least valuation of V W - U on the window
};

/// v_K of the determinant: least coefficient valuation (nullopt for zero).
std::optional<Rational> det_valuation(const SeriesMatrix& U);
RobbaElement determinant(const SeriesMatrix& U);

/// Restrict a matrix to exponents at most hi (for comparisons on the original window).
SeriesMatrix clip_above(const SeriesMatrix& A, long hi);

/// U = V W by induction on v_K(det U). max_steps bounds the induction
/// (default: the initial v_K(det U)).
FactorResult factor_plus(const SeriesMatrix& U, std::optional<long> max_steps = std::nullopt);

}  // namespace ovc
