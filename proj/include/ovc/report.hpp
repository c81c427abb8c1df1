#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ovc/connection.hpp"

namespace ovc {

/// An element of M ⊗ Ω^k: one coordinate vector per increasing index set
/// (the wedge of the basis forms of those variables).
using FormElement = std::map<std::vector<size_t>, ModuleVector>;

struct Generator {
  FormElement value;
  std::string label;
  std::optional<Rational> defect;  // valuation of ∇(value) or of the membership residual; nullopt: zero
};

/// Degree-indexed dimensions with representatives, the precision the
/// dimensions are asserted at, and the worst truncation loss met.
struct CohomologyReport {
  std::string title;
  std::vector<size_t> dims;
  std::vector<bool> reliable;
  std::vector<std::vector<Generator>> generators;
  long precision = 0;
  std::optional<Rational> truncation_loss;
  std::vector<std::string> notes;

  void resize(size_t degrees) {
    dims.assign(degrees, 0);
    reliable.assign(degrees, true);
    generators.assign(degrees, {});
  }
  void note_loss(const std::optional<Rational>& v) {
    if (v && (!truncation_loss || *v < *truncation_loss)) truncation_loss = v;
  }
  bool all_reliable() const {
    for (bool b : reliable)
      if (!b) return false;
    return true;
  }
};

}  // namespace ovc
