#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ovc/connection.hpp"
#include "ovc/report.hpp"
#include "ovc/unipotent.hpp"

namespace ovc {

struct CohomologyOptions {
  long window = 16;         // exponent bound per variable
  bool generators = true;   // compute class representatives
};

/**
 * de Rham cohomology of a free module with integrable connection on A^n,
 * from the complex M ⊗ Ω^• truncated to x-degree ≤ window. Coboundaries are
 * counted through a larger source window so that truncation never creates
 * spurious classes. Form basis per variable: dx_i, or dx_i/x_i in the dlog gauge.
 */
CohomologyReport mw_cohomology(const DaggerModule& m, const CohomologyOptions& opt = {});

/**
 * Compact-support cohomology H^{n+j}_c(M), j = 0..n, on A^n through the
 * quotient of M ⊗ Ω^• ⊗ S^(n) by the subcomplexes where some t_i has no
 * positive power (t_i = 1/x_i). Classes are represented by their part with
 * every exponent in [1, window], coefficients written against the same form
 * basis as on the x side. Report degrees run 0..2n.
 */
CohomologyReport compact_support_cohomology(const DaggerModule& m, const CohomologyOptions& opt = {});

/// H^0, H^1 of D = t d/dt + N on the Laurent window [-window, window].
CohomologyReport robba_cohomology(const RobbaModule& m, const CohomologyOptions& opt = {});

/// ∇ on x-side forms of M.
FormElement mw_differential(const DaggerModule& m, const FormElement& w);
/// ∇ on the compact-support quotient (t side); terms outside the canonical part are dropped.
FormElement compact_differential(const DaggerModule& m, const FormElement& v);
/// Canonical representative: drops every term with a nonpositive exponent.
FormElement compact_canonical(const DaggerModule& m, const FormElement& v);

/// t-side descriptor for compact-support chains, exponents in [lo, hi].
RingDescriptor compact_ring(const DaggerModule& m, long lo, long hi);
/// Coefficients against ∧ dt_j/t_j instead of the module's form basis, and back.
FormElement to_dlog_basis(const DaggerModule& m, const FormElement& v);
FormElement from_dlog_basis(const DaggerModule& m, const FormElement& v);

/**
 * [v, w] for v a t-side chain of M of degree i and w an x-side chain of M^∨
 * of degree n - i: pair coordinates, wedge, take the coefficient of
 * dt_1/t_1 ∧ ... ∧ dt_n/t_n. The wedge is signed by (-1)^{i(i-1)/2}, which
 * makes [v, ∇w] + [∇v, w] = 0 in every degree.
 */
PadicApprox residue_pairing(const DaggerModule& m, const FormElement& v, const FormElement& w);

struct PairingReport {
  long i = 0;
  size_t compact_degree = 0;   // n + i
  size_t mw_degree = 0;        // n - i
  Matrix<PadicApprox> matrix;  // rows: H_c classes, cols: H(M^∨) classes
  size_t rank = 0;
  bool injective_compact = false;  // H^{n+i}_c(M) → H^{n-i}(M^∨)^*
  bool injective_mw = false;
  bool reliable = true;
  bool full_rank() const { return injective_compact && injective_mw; }
};

PairingReport pairing_nondegeneracy_check(const DaggerModule& m, long i, const CohomologyOptions& opt = {});

/**
 * Pushforward along A⟨x⟩† ⊃ A for the fiber variable x = x_0. The fiber
 * connection must not involve the base variables; the base then enters only
 * as a flat extension and every rank below is a rank over A.
 *
 * maps[k] sends node k to node k+1 in the order
 * r0f, r0loc, r1shriek, r1f, r1loc, r2shriek; rows index the target basis.
 */
struct PushforwardBundle {
  CohomologyReport r0f, r1f, r0loc, r1loc, r1shriek, r2shriek, r1prim;
  std::vector<Matrix<PadicApprox>> maps;
  bool certificate_used = false;
  bool reliable = true;
  std::vector<std::string> notes;

  /// Node dimensions in sequence order.
  std::vector<size_t> sequence_dims() const;
};

PushforwardBundle pushforward_complex(const DaggerModule& m, const CohomologyOptions& opt = {},
                                      const std::optional<UnipotentData>& certificate = std::nullopt);

/// The Robba-side module M ⊗ R with t = 1/x: N = -t^{-1}Γ(1/t) (dx) or -Γ(1/t) (dlog).
RobbaModule local_module(const DaggerModule& fiber, long window);

struct SequenceNode {
  std::string name;
  size_t dim = 0;
  size_t rank_in = 0;   // rank of the incoming map
  size_t rank_out = 0;  // rank of the outgoing map
  bool exact = false;
};

struct SnakeVerdict {
  std::vector<SequenceNode> nodes;
  bool pass = false;
  std::optional<size_t> first_failure;
};

SnakeVerdict snake_check(const PushforwardBundle& b);

struct LerayReport {
  DaggerModule P, Q;  // kernel and cokernel of ∇_v as modules on the base (unset for a point base)
  size_t rank_P = 0, rank_Q = 0;
  CohomologyReport HP, HQ, HM;
  std::vector<SequenceNode> sequence;  // H^i(P), H^i(M), H^{i-1}(Q), ...
  std::vector<size_t> leray_dims;      // dim H^i(M) read off the sequence
  bool exact = false;
  bool euler_ok = false;
  bool matches_direct = false;
  long euler_M = 0, euler_P = 0, euler_Q = 0;
};

/// Leray sequence for M on A^1 × base, base of dimension 0 or 1, fiber
/// variable x_0; Γ_0 may only involve x_0 and Γ_1 only x_1.
LerayReport leray_assemble(const DaggerModule& m, const CohomologyOptions& opt = {});

}  // namespace ovc
