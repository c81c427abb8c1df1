#pragma once

#include <optional>
#include <vector>

#include "ovc/series.hpp"

namespace ovc {

enum class Ordering { Less, Equal, Greater };

/// deglex: total degree first, then at the first differing position the
/// tuple with the lesser entry is the larger one.
Ordering deglex_compare(const Exponent& a, const Exponent& b);
inline bool deglex_less(const Exponent& a, const Exponent& b) { return deglex_compare(a, b) == Ordering::Less; }
/// Componentwise a ⪯ b.
bool divides(const Exponent& a, const Exponent& b);

/// Decay parameter D of ρ = p^{1/D}; nullopt stands for D = ∞ (the Gauss norm).
using Decay = std::optional<Rational>;

struct LeadingDatum {
  DaggerSeries element;
  Decay decay;
  Exponent leading_index;
  PadicApprox leading_coeff;
};

/// Term maximizing |a_I| ρ^{|I|}, ties broken towards the deglex-largest index.
LeadingDatum rho_leading_term(const DaggerSeries& a, const Decay& decay);

/// Least integer D0 such that the ρ-leading index equals the 1-leading index
/// for every D ≥ D0 on the stored support.
long stable_decay(const DaggerSeries& a);

struct LeadingBasis {
  std::vector<LeadingDatum> elements;
  long decay = 1;           // a D at which every element's ρ- and 1-leading terms agree
  long spairs = 0;
  bool window_truncated = false;
};

/// Buchberger completion with 1-leading terms, then minimalized so no leading
/// index divides another.
LeadingBasis complete_leading_basis(const std::vector<DaggerSeries>& gens);

struct DivisionResult {
  DaggerSeries remainder;
  std::vector<DaggerSeries> quotients;
  long steps = 0;
  bool window_truncated = false;
  std::optional<long> precision_floor;  // set when the tail was cut at working precision
};

/// Normal form of f by 1-leading-term division.
DivisionResult divide(const DaggerSeries& f, const std::vector<LeadingDatum>& basis);

struct ReductionResult {
  DaggerSeries u;
  long steps = 0;
  std::optional<Rational> gauss_u, gauss_y, rho_u, rho_z;
  bool gauss_ok = false;  // |u| <= |y|
  bool rho_ok = false;    // |u|_ρ <= |z|_ρ
  bool membership_at_precision = false;
};

/// Lemma loop: from z, repeatedly cancel the 1-leading term of (z_j - y) by
/// a monomial multiple of a basis element until |z_j| <= |y|.
ReductionResult reduce_element(const DaggerSeries& y, const DaggerSeries& z, const std::vector<LeadingDatum>& basis,
                               const Decay& decay);

struct HadamardResult {
  Rational inv_decay_C;  // 1/D_C
  std::optional<Rational> value_C, bound;
  bool pass = false;
};

/// ρ_C = ρ_A^{1-ε} ρ_B^{ε}; checks value_C(x) >= (1-ε) value_A(x) + ε value_B(x).
HadamardResult hadamard_check(const DaggerSeries& x, const Decay& D_A, const Rational& D_B, const Rational& eps);

}  // namespace ovc
