#pragma once

#include <string>
#include <vector>

namespace ovc::acceptance {

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // deterministic summary of what was checked
  double seconds = 0;  // wall time, kept out of reports
};

inline constexpr int kCriteria = 14;

/// Runs one acceptance criterion (1..kCriteria). Independent oracles live in ovc/oracle.hpp.
Criterion run_criterion(int id);
std::vector<Criterion> run_all();

}  // namespace ovc::acceptance
