#pragma once

#include <optional>
#include <vector>

#include "ovc/matrix.hpp"
#include "ovc/series.hpp"

namespace ovc {

using SeriesMatrix = Matrix<RobbaElement>;
using ModuleVector = std::vector<RobbaElement>;

/// Zero matrix / identity over a descriptor.
SeriesMatrix zero_matrix(const RingDescriptor& d, size_t rows, size_t cols);
SeriesMatrix identity_matrix(const RingDescriptor& d, size_t n);

/**
 * Free module over a one-variable Robba-type ring, connection stored in the
 * dt/t gauge: (Dv)_i = t dv_i/dt + Σ_j N_ij v_j, so column j of N holds D e_j.
 * Frobenius on the basis: F e_j = Σ_i Φ_ij e_i for the lift t ↦ t^q.
 */
struct RobbaModule {
  RingDescriptor ring;
  SeriesMatrix N;
  std::optional<SeriesMatrix> Phi;

  size_t rank() const noexcept { return N.rows(); }
  void validate() const;
};

/// Per-variable gauge of a dagger module: ∇ = d + Γ_i dx_i or ∇ = d + Γ_i dx_i/x_i.
enum class Gauge { Dx, Dlog };

/**
 * Free module over K⟨x_1..x_n⟩† (dagger or Tate descriptor) with
 * ∇_i v = δ_i v + Γ_i v, δ_i = ∂/∂x_i in the dx gauge and x_i ∂/∂x_i in the dlog gauge.
 */
struct DaggerModule {
  RingDescriptor ring;
  std::vector<SeriesMatrix> Gamma;
  std::vector<Gauge> gauge;

  size_t rank() const noexcept { return Gamma.empty() ? 0 : Gamma[0].rows(); }
  size_t arity() const noexcept { return ring.arity(); }
  void validate() const;
};

RobbaModule trivial_robba_module(const RingDescriptor& d, size_t rank);
DaggerModule trivial_dagger_module(const RingDescriptor& d, size_t rank);

/// Dual connection: N^∨ = -N^T (Φ^∨ = (Φ^T)^{-1} is dropped).
RobbaModule dual(const RobbaModule& m);
DaggerModule dual(const DaggerModule& m);

/// Matrix acting on a coordinate vector.
ModuleVector apply_matrix(const SeriesMatrix& A, const ModuleVector& v);

ModuleVector apply_D(const RobbaModule& m, const ModuleVector& v);
/// Coefficient of dx_var (or dx_var/x_var in the dlog gauge) in ∇v.
ModuleVector apply_nabla_v(const DaggerModule& m, const ModuleVector& v, size_t var = 0);

struct CheckResult {
  bool pass = false;
  std::optional<Rational> defect_value;  // least valuation of a nonzero defect term; nullopt if none
  std::optional<Exponent> defect_index;
  std::string detail;
};

/// Reports the least-valuation nonzero term of a matrix that should vanish.
CheckResult scan_defect(const SeriesMatrix& A);

/// N Φ + t dΦ/dt = q Φ σ(N) entrywise at working precision.
CheckResult check_frobenius_compat(const RobbaModule& m);
/// δ_i Γ_j - δ_j Γ_i + [Γ_i, Γ_j] = 0 for all i < j.
CheckResult check_integrability(const DaggerModule& m);

enum class PullbackKind { Frobenius, Kummer };
struct PullbackMap {
  PullbackKind kind = PullbackKind::Kummer;
  long degree = 1;  // e for Kummer, q for Frobenius
};

/// Kummer t ↦ t^e: N' = e N(t^e), Φ' = Φ(t^e). Frobenius: N' = q σ(N), Φ' = σ(Φ).
RobbaModule pullback_module(const RobbaModule& m, const PullbackMap& f);

/// Raw trace along t ↦ t^e on functions: t^{ke} ↦ e t^k, other exponents die.
RobbaElement trace_map(const RobbaElement& w, long e);
/// (1/e)·Trace, the projector onto pulled-back functions.
RobbaElement trace_projector(const RobbaElement& w, long e);
/// Trace of the form w dt'/t' along the cover, as a coefficient of dt/t.
RobbaElement trace_form(const RobbaElement& w, long e);
/// (1/e)·trace_form, the projector on one-forms.
RobbaElement form_projector(const RobbaElement& w, long e);
/// Pullback of the form g dt/t, as a coefficient of dt'/t'.
RobbaElement pullback_form(const RobbaElement& g, long e);

/// Coordinatewise pullback of functions (forms = false) or of dt/t-coefficients.
ModuleVector kummer_pullback(const ModuleVector& v, long e, bool forms = false);
/// Coordinatewise (1/e)·Trace in degree 0 or 1.
ModuleVector project_vector(const ModuleVector& v, long e, bool forms = false);

/// Inverse over the ring by Gauss-Jordan with recognized-unit pivots;
/// throws connection.not_invertible when no pivot can be certified.
SeriesMatrix invert_matrix(const SeriesMatrix& A);

/// The module in the basis given by the columns of F:
/// N' = F^{-1}(N F + t dF/dt), Φ' = F^{-1} Φ σ(F).
RobbaModule gauge_transform(const RobbaModule& m, const SeriesMatrix& F);

/// Coordinatewise t d/dt.
SeriesMatrix euler_derivative(const SeriesMatrix& A);

/// True when every coordinate is zero at working precision (limited zeros allowed).
bool vector_is_zero(const ModuleVector& v);

}  // namespace ovc
