#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovc/problem.hpp"

namespace ovc {

/// Ordered key/value records under one heading. Values are single-line.
struct ReportSection {
  std::string id;     // key prefix in the structured format
  std::string title;  // heading in the text format
  std::vector<std::pair<std::string, std::string>> fields;

  void add(std::string key, std::string value) { fields.emplace_back(std::move(key), std::move(value)); }
};

struct RunReport {
  std::string command;  // echo: name and parameters
  std::vector<ReportSection> sections;
  std::optional<long> precision_floor;  // least absolute precision behind any reported value
  std::optional<Rational> truncation;   // worst value dropped by a window; nullopt: nothing dropped
  std::vector<std::string> truncation_flags;
  std::vector<std::string> notes;
  bool success = true;  // false when a check the command runs fails (selftest)
  double wall_seconds = 0;  // not part of any emitted report
};

/// Runs `command` on the problem. The problem's command block, when present,
/// must name the same command and supplies its parameters.
RunReport run_command(const ProblemFile& problem, const std::string& command);

enum class ReportFormat { Text, Structured };

/// Byte-deterministic serialization; wall time is never included.
std::string emit_report(const RunReport& r, ReportFormat format);

/// key=value lines of a structured report back into a map.
std::map<std::string, std::string> parse_structured(std::string_view text);

}  // namespace ovc
