#pragma once

#include <utility>
#include <vector>

#include "ovc/padic.hpp"

// Exact rational reference computations used by the tests and the acceptance
// suite. Nothing here shares code with the p-adic engine.
namespace ovc::oracle {

using RationalMatrix = std::vector<std::vector<Rational>>;
/// Polynomial in one variable, coefficient of x^k at index k.
using Poly = std::vector<Rational>;
using PolyMatrix = std::vector<std::vector<Poly>>;

size_t rank(RationalMatrix A);

/// (dim H^0, dim H^1) of f ↦ δf + Γf on polynomial vectors, δ = d/dx or x d/dx.
/// H^0 is the kernel on degree ≤ N; H^1 is the quotient of the one-forms of
/// degree ≤ N by those that are images of sources of degree ≤ N + extra.
std::pair<size_t, size_t> polynomial_de_rham(const PolyMatrix& Gamma, bool dlog, long N, long extra = 8);

/// (dim H^0, dim H^1) of t d/dt + a on Laurent polynomials: one each when a is an integer in [-w, w].
std::pair<size_t, size_t> kummer_laurent(const Rational& a, long w);

/// Dimensions of an external product from the factors (Künneth on finite complexes).
std::vector<size_t> kunneth(const std::vector<size_t>& a, const std::vector<size_t>& b);

/// Least a ≥ 0 with p^a·Π_{i=1..l} (m + x + i)/i integral in Q_p[x]/(x^e), from the
/// integer expansion of Π (m + i + x) and Legendre's formula for v_p(l!).
long least_denominator(long p, long m, long l, long e);

}  // namespace ovc::oracle
