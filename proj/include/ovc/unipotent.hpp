#pragma once

#include <optional>
#include <vector>

#include "ovc/connection.hpp"
#include "ovc/report.hpp"

namespace ovc {

using ScalarMatrix = Matrix<PadicApprox>;

/**
 * A strongly unipotent basis: the columns of U (coordinates in the module's
 * basis) are v_1..v_n with D v_j = Σ_i X_ij v_i for a constant strictly upper
 * triangular X, so X = U^{-1} N U + U^{-1} t dU/dt.
 */
struct UnipotentData {
  RobbaModule module;
  SeriesMatrix U;
  SeriesMatrix U_inverse;
  ScalarMatrix X;
  size_t e = 1;  // least e with X^e = 0

  size_t rank() const noexcept { return X.rows(); }
  /// D in the v-basis: the module over the same ring with N = X.
  RobbaModule constant_module() const;
};

/// Proof loop over a unipotent basis (columns of `filtration`, D w_j in the
/// span of w_1..w_{j-1}). Throws unipotent.bad_certificate otherwise.
UnipotentData strongly_unipotent_basis(const RobbaModule& m, const SeriesMatrix& filtration);

/// N U + t dU/dt - U X, scanned for nonzero terms.
CheckResult verify_unipotent(const UnipotentData& data);

/// Least e >= 1 with X^e = 0 at working precision.
size_t nilpotency_index(const ScalarMatrix& X);

/// Passes when U1^{-1} U2 has only constant entries at precision.
CheckResult transition_is_constant(const SeriesMatrix& U1, const SeriesMatrix& U2);

struct DenominatorBound {
  long bound = 0;  // (e-1)·⌈log_p(|m| + l)⌉
  long exact = 0;  // least a >= 0 making p^a Π (m+x+i)/i integral in Q_p[x]/(x^e)
};
DenominatorBound bounddenom(long p, long m, long l, long e);
long ceil_log(long p, long n);

struct HorizontalResult {
  ModuleVector f;    // limit candidate in the module's basis
  ModuleVector f_v;  // same in the strongly unipotent basis
  std::vector<std::optional<Rational>> log;  // w_r(f_l - f_{l-1}), l = 1..L; nullopt = +∞
  std::optional<Rational> slope;              // least-squares c' over finite log entries
  long nominal_loss = 0;                      // 2e Σ vp(l)
  long tracked_loss = 0;                      // drop of absolute precision over the run
  CheckResult nabla;                          // ∇f at precision
};

/// f_0 = D^{e-1} w, f_l = (1 - D²/l²)^e f_{l-1}. `w` is in the module's basis
/// unless `in_v_basis`. Throws unipotent.precision_exhausted once the tracked
/// loss eats the working precision.
HorizontalResult horizontal_iterate(const UnipotentData& data, const ModuleVector& w, long L,
                                    bool in_v_basis = false);

/// H^0 = ker X and H^1 = coker X ⊗ dt/t on constant vectors.
CohomologyReport h0_h1_unipotent(const UnipotentData& data);

struct PlusCohomResult {
  bool pass = false;
  bool injective = false;
  bool surjective = false;
  size_t dim = 0;  // number of (mode, index) pairs tested
  size_t rank = 0;
  bool reliable = true;
};

/// ∇: M/M_1 → (M ⊗ dt/t)/(M_1 ⊗ dt/t) on the negative modes of the window,
/// M_1 the plus span of the v_i.
PlusCohomResult pluscohom_check(const UnipotentData& data);

/// v-basis preimage of the negative part of omega (v-basis dt/t coefficients).
ModuleVector pluscohom_preimage(const UnipotentData& data, const ModuleVector& omega_v);

}  // namespace ovc
