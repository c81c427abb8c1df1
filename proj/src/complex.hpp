#pragma once

// Windowed cochain complexes of free K-modules on monomial boxes. Internal to
// the library: the cohomology operations build one of these per complex and
// read dimensions, representatives and class coordinates off it.

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ovc/linalg.hpp"
#include "ovc/report.hpp"

namespace ovc::detail {

/// Basis element t^e ⊗ e_comp ⊗ ω_J, J a bit mask of form variables.
struct Key {
  unsigned J = 0;
  size_t comp = 0;
  Exponent e;
  friend auto operator<=>(const Key&, const Key&) = default;
};

struct Term {
  Key key;
  PadicApprox c;
};

using Box = std::vector<std::pair<long, long>>;
using Chain = std::map<Key, PadicApprox>;

struct ComplexSpec {
  size_t vars = 0;       // form variables, degrees 0..vars
  size_t box_vars = 0;   // exponent variables (usually = vars)
  size_t rank = 0;
  long p = 0;
  int precision = 0;
  std::function<Box(long)> box;                       // window box at size w
  std::function<bool(const Exponent&)> keep;          // quotient filter; empty keeps all
  std::function<void(const Key&, std::vector<Term>&)> d;  // differential of a basis element, exact
  long spill = 1;                                     // window growth needed for coboundary sources
};

/// Ordered basis of C^k on a box: total |exponent| first, then exponent, then J, comp.
struct Layout {
  std::vector<Key> keys;
  std::map<Key, size_t> index;
};

Layout make_layout(const ComplexSpec& s, size_t degree, long w);

/// Solves for coordinates modulo a span: rows carry tags that record their
/// expression in the generators.
class TaggedSpace {
 public:
  /// Adds v with the given tag (generator index) or as a relation; returns false if dependent.
  bool insert(const SparseVector& v, std::optional<size_t> tag);
  /// Coordinates of v in the tagged generators, or nullopt if v is outside the span.
  std::optional<std::vector<PadicApprox>> coordinates(const SparseVector& v, size_t tags) const;

 private:
  struct Row {
    size_t pivot;
    SparseVector row;
    SparseVector tag;
  };
  std::pair<SparseVector, SparseVector> reduce(SparseVector v) const;
  std::vector<Row> rows_;
};

struct DegreeData {
  size_t degree = 0;
  long window = 0;
  size_t dim = 0;
  bool reliable = true;
  std::optional<long> max_pivot;
  Layout layout;
  std::vector<SparseVector> generators;  // layout coordinates
  std::optional<TaggedSpace> coords;     // coboundaries + generators, when generators were requested
};

DegreeData compute_degree(const ComplexSpec& s, size_t degree, long w, bool want_generators);

/// d applied to a chain (quotient filter applied, nothing truncated).
Chain apply_d(const ComplexSpec& s, const Chain& v);

Chain to_chain(const Layout& L, const SparseVector& v);
/// Layout coordinates of a chain; nullopt if a term falls outside the layout.
std::optional<SparseVector> to_layout(const Layout& L, const Chain& v);

/// Class coordinates of a cocycle (given as a chain) in d's generators.
std::optional<std::vector<PadicApprox>> class_coordinates(const DegreeData& d, const Chain& v);

/// Least valuation over the nonzero or limited terms; nullopt when none.
std::optional<Rational> chain_defect(const Chain& v);

FormElement to_form(const Chain& v, size_t rank, const RingDescriptor& ring);
Chain from_form(const FormElement& f);

std::vector<size_t> mask_to_indices(unsigned J);
unsigned indices_to_mask(const std::vector<size_t>& J);
/// Sign of dx_i ∧ ω_J against ω_{J ∪ i}.
int wedge_sign(unsigned J, size_t i);

/// Fills a report degree from the computed data.
void fill_degree(CohomologyReport& rep, size_t slot, const DegreeData& d, const ComplexSpec& s,
                 const RingDescriptor& ring, const std::string& label_prefix);

}  // namespace ovc::detail
