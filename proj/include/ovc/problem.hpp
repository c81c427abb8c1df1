#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ovc/connection.hpp"
#include "ovc/error.hpp"

namespace ovc {

/// Problem-file failure with a 1-based position. Codes: problem.syntax,
/// problem.range, problem.undefined, problem.version, problem.command,
/// problem.invalid.
class ParseError : public Error {
 public:
  ParseError(std::string code, const std::string& what, size_t line, size_t column)
      : Error(std::move(code), what), line_(line), column_(column) {}
  size_t line() const noexcept { return line_; }
  size_t column() const noexcept { return column_; }

 private:
  size_t line_, column_;
};

struct ProblemHeader {
  int version = 1;
  long p = 0;
  long q = 0;
  int precision = 20;
  long window = 16;  // default window for commands and rings
  long decay = 1;
  Rational slope = 1;
};

struct CommandBlock {
  std::string name;
  std::map<std::string, std::string> params;
  size_t line = 0;
};

struct ProblemFile {
  ProblemHeader header;
  std::map<std::string, RingDescriptor> rings;
  std::map<std::string, RobbaElement> series;
  std::map<std::string, SeriesMatrix> matrices;
  std::map<std::string, ModuleVector> vectors;
  std::map<std::string, DaggerModule> dagger_modules;
  std::map<std::string, RobbaModule> robba_modules;
  std::optional<CommandBlock> command;
};

inline constexpr long kMaxWindow = 10000;
inline constexpr int kMaxPrecision = 256;

const std::vector<std::string>& command_names();
bool is_command(const std::string& name);

/**
 * Line-oriented problem format, version 1:
 *
 *   ovc-problem 1
 *   prime 3                         # required; q, precision, window, decay, slope optional
 *   ring R robba t lo=-20 hi=20
 *   series f R [[0,"1"],[-1,"2*3^1@20"]]
 *   matrix N R [[0, [[0,"1"]]], [0, 0]]
 *   vector v R [[[0,"1"]], []]
 *   module L robba R N=N            # or trivial=<rank>; dagger modules take gamma=G0,G1 gauge=dx,dlog
 *   command cohomology module=L window=12
 *
 * Series are JSON lists of records [e_1, ..., e_k, scalar]; a scalar is an
 * integer or a string "u*p^v@M", "0@k", "a/b". Matrix and vector entries are
 * series or bare scalars. A JSON literal may continue over following lines
 * until its brackets balance. '#' starts a comment outside strings.
 */
ProblemFile parse_problem(std::string_view text);

}  // namespace ovc
