#include "ovc/problem.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "json.hpp"

namespace ovc {

namespace {

using json = nlohmann::json;

struct Token {
  std::string text;
  size_t col = 1;
};

struct Param {
  std::string key;
  bool required = false;
  enum Kind { AnyModule, Dagger, Robba, MatrixName, VectorName, SeriesName, SeriesList, Integer, Flag } kind;
  long lo = 0, hi = 0;
};

const std::map<std::string, std::vector<Param>>& command_params() {
  static const std::map<std::string, std::vector<Param>> table = {
      {"cohomology",
       {{"module", true, Param::AnyModule}, {"window", false, Param::Integer, 1, kMaxWindow}, {"reps", false, Param::Flag}}},
      {"compact-supports",
       {{"module", true, Param::Dagger}, {"window", false, Param::Integer, 1, kMaxWindow}, {"reps", false, Param::Flag}}},
      {"pushforward",
       {{"module", true, Param::Dagger},
        {"window", false, Param::Integer, 1, kMaxWindow},
        {"certificate", false, Param::Flag}}},
      {"factor", {{"matrix", true, Param::MatrixName}, {"steps", false, Param::Integer, 0, 1000}}},
      {"unipotent-basis", {{"module", true, Param::Robba}, {"filtration", false, Param::MatrixName}}},
      {"horizontal",
       {{"module", true, Param::Robba},
        {"filtration", false, Param::MatrixName},
        {"vector", true, Param::VectorName},
        {"iterations", false, Param::Integer, 1, kMaxWindow},
        {"basis", false, Param::Flag}}},
      {"pairing",
       {{"module", true, Param::Dagger},
        {"degree", true, Param::Integer, 0, 16},
        {"window", false, Param::Integer, 1, kMaxWindow}}},
      {"groebner-reduce",
       {{"generators", true, Param::SeriesList},
        {"element", true, Param::SeriesName},
        {"bound", true, Param::SeriesName},
        {"decay", false, Param::Integer, 1, kMaxWindow}}},
      {"selftest", {}},
  };
  return table;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t k = s.find(sep, start);
    out.push_back(s.substr(start, k == std::string::npos ? std::string::npos : k - start));
    if (k == std::string::npos) break;
    start = k + 1;
  }
  return out;
}

// Text before an unquoted '#'.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Bracket depth change over a JSON fragment, ignoring strings.
long bracket_balance(const std::string& s) {
  long depth = 0;
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (quoted) continue;
    if (s[i] == '[' || s[i] == '{') ++depth;
    if (s[i] == ']' || s[i] == '}') --depth;
  }
  return depth;
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    size_t start = 0;
    while (start <= text.size()) {
      size_t k = text.find('\n', start);
      std::string line(text.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(strip_comment(line));
      if (k == std::string_view::npos) break;
      start = k + 1;
    }
  }

  ProblemFile run() {
    bool header_seen = false;
    for (line_ = 0; line_ < lines_.size(); ++line_) {
      auto toks = tokenize(lines_[line_]);
      if (toks.empty()) continue;
      if (!header_seen) {
        if (toks[0].text != "ovc-problem") fail("problem.version", "expected 'ovc-problem 1' header", toks[0]);
        if (toks.size() != 2) fail("problem.syntax", "header takes one version number", toks[0]);
        if (toks[1].text != "1") fail("problem.version", "unsupported problem version " + toks[1].text, toks[1]);
        header_seen = true;
        continue;
      }
      statement(toks);
    }
    if (!header_seen) throw ParseError("problem.version", "empty problem file", 1, 1);
    if (!out_.header.p) throw ParseError("problem.syntax", "missing 'prime' statement", lines_.size(), 1);
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const std::string& code, const std::string& what, const Token& at) const {
    throw ParseError(code, what, line_ + 1, at.col);
  }
  [[noreturn]] void fail_at(const std::string& code, const std::string& what, size_t line, size_t col) const {
    throw ParseError(code, what, line + 1, col);
  }

  static std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      out.push_back({line.substr(i, j - i), i + 1});
      i = j;
    }
    return out;
  }

  long integer(const Token& t, long lo, long hi, const std::string& what) const {
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec == std::errc::result_out_of_range) fail("problem.range", what + " out of range", t);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail("problem.syntax", what + " must be an integer", t);
    if (v < lo || v > hi)
      fail("problem.range", what + " " + t.text + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]", t);
    return v;
  }

  Rational rational(const Token& t, const std::string& what) const {
    Rational r;
    if (t.text.empty() || r.set_str(t.text, 10) != 0) fail("problem.syntax", what + " must be a rational number", t);
    r.canonicalize();
    return r;
  }

  void fresh_name(const Token& t) {
    if (!is_identifier(t.text)) fail("problem.syntax", "bad name '" + t.text + "'", t);
    if (!names_.insert(t.text).second) fail("problem.syntax", "name '" + t.text + "' defined twice", t);
  }

  void need(const std::vector<Token>& toks, size_t n, const std::string& form) const {
    if (toks.size() < n) fail("problem.syntax", "expected: " + form, toks.back());
  }

  std::map<std::string, Token> options(const std::vector<Token>& toks, size_t from,
                                       const std::set<std::string>& allowed) const {
    std::map<std::string, Token> out;
    for (size_t i = from; i < toks.size(); ++i) {
      auto eq = toks[i].text.find('=');
      if (eq == std::string::npos || eq == 0) fail("problem.syntax", "expected key=value", toks[i]);
      std::string key = toks[i].text.substr(0, eq);
      if (!allowed.count(key)) fail("problem.syntax", "unknown parameter '" + key + "'", toks[i]);
      if (out.count(key)) fail("problem.syntax", "parameter '" + key + "' given twice", toks[i]);
      out[key] = {toks[i].text.substr(eq + 1), toks[i].col + eq + 1};
    }
    return out;
  }

  void require_header() const {
    if (!out_.header.p) fail_at("problem.syntax", "'prime' must come before definitions", line_, 1);
  }

  void statement(const std::vector<Token>& toks) {
    const std::string& kw = toks[0].text;
    auto& h = out_.header;
    if (kw == "prime" || kw == "q" || kw == "precision" || kw == "window" || kw == "decay" || kw == "slope") {
      if (defined_any_) fail("problem.syntax", "header statement '" + kw + "' after definitions", toks[0]);
      if (toks.size() != 2) fail("problem.syntax", "'" + kw + "' takes one value", toks[0]);
      const Token& v = toks[1];
      if (kw == "prime") {
        h.p = integer(v, 2, 1L << 30, "prime");
        if (!is_prime(h.p)) fail("problem.range", v.text + " is not prime", v);
        if (!h.q) h.q = h.p;
      } else if (kw == "q") {
        if (!h.p) fail("problem.syntax", "'q' needs 'prime' first", toks[0]);
        h.q = integer(v, 2, 1L << 40, "q");
        long r = h.q;
        while (r % h.p == 0 && r > 1) r /= h.p;
        if (r != 1) fail("problem.range", "q must be a power of p", v);
      } else if (kw == "precision") {
        h.precision = static_cast<int>(integer(v, 1, kMaxPrecision, "precision"));
      } else if (kw == "window") {
        h.window = integer(v, 1, kMaxWindow, "window");
      } else if (kw == "decay") {
        h.decay = integer(v, 1, kMaxWindow, "decay");
      } else {
        h.slope = rational(v, "slope");
        if (h.slope <= 0) fail("problem.range", "slope must be positive", v);
      }
      return;
    }
    if (kw == "command") return command(toks);
    require_header();
    defined_any_ = true;
    if (kw == "ring") return ring(toks);
    if (kw == "series" || kw == "matrix" || kw == "vector") return literal(toks);
    if (kw == "module") return module(toks);
    fail("problem.syntax", "unknown statement '" + kw + "'", toks[0]);
  }

  void ring(const std::vector<Token>& toks) {
    need(toks, 4, "ring <name> <kind> <vars> [lo=..] [hi=..] [slope=..] [decay=..]");
    fresh_name(toks[1]);
    RingDescriptor d;
    try {
      d.kind = parse_ring_kind(toks[2].text);
    } catch (const Error& e) {
      fail("problem.syntax", e.what(), toks[2]);
    }
    d.variables = split(toks[3].text, ',');
    std::set<std::string> seen;
    for (const auto& v : d.variables)
      if (!is_identifier(v) || !seen.insert(v).second) fail("problem.syntax", "bad variable list '" + toks[3].text + "'", toks[3]);
    auto opt = options(toks, 4, {"lo", "hi", "slope", "decay"});
    const auto& h = out_.header;
    long lo = d.is_robba() && d.kind != RingKind::RobbaPlus ? -h.window : 0;
    long hi = h.window;
    if (opt.count("lo")) lo = integer(opt["lo"], -kMaxWindow, kMaxWindow, "lo");
    if (opt.count("hi")) hi = integer(opt["hi"], -kMaxWindow, kMaxWindow, "hi");
    d.window.assign(d.variables.size(), {lo, hi});
    d.slope_r = opt.count("slope") ? rational(opt["slope"], "slope") : h.slope;
    d.decay_D = opt.count("decay") ? integer(opt["decay"], 1, kMaxWindow, "decay") : h.decay;
    d.p = h.p;
    d.q = h.q;
    d.precision = h.precision;
    try {
      d.validate();
    } catch (const Error& e) {
      fail("problem.range", e.what(), toks[1]);
    }
    out_.rings[toks[1].text] = d;
  }

  const RingDescriptor& ring_ref(const Token& t) const {
    auto it = out_.rings.find(t.text);
    if (it == out_.rings.end()) fail("problem.undefined", "undefined ring '" + t.text + "'", t);
    return it->second;
  }

  PadicApprox scalar(const json& j, size_t line, size_t col) const {
    const auto& h = out_.header;
    try {
      if (j.is_number_integer()) return PadicApprox::from_integer(Integer(j.dump()), h.p, h.precision);
      if (j.is_string()) return PadicApprox::parse(j.get<std::string>(), h.p, h.precision);
    } catch (const Error& e) {
      fail_at("problem.syntax", e.what(), line, col);
    }
    fail_at("problem.syntax", "scalar must be an integer or a string, got " + j.dump(), line, col);
  }

  RobbaElement element(const RingDescriptor& d, const json& j, size_t line, size_t col) const {
    RobbaElement x(d);
    if (!j.is_array()) {
      x.add_term(Exponent(d.arity(), 0), scalar(j, line, col));
      return x;
    }
    for (const auto& rec : j) {
      if (!rec.is_array() || rec.size() != d.arity() + 1)
        fail_at("problem.syntax", "series record needs " + std::to_string(d.arity()) + " exponents and a scalar: " + rec.dump(),
                line, col);
      Exponent e;
      for (size_t k = 0; k < d.arity(); ++k) {
        if (!rec[k].is_number_integer()) fail_at("problem.syntax", "exponent must be an integer: " + rec.dump(), line, col);
        e.push_back(rec[k].get<long>());
      }
      if (!d.in_window(e)) fail_at("problem.range", "exponent outside the ring window: " + rec.dump(), line, col);
      x.add_term(e, scalar(rec[d.arity()], line, col));
    }
    return x;
  }

  // Reads a JSON literal starting at column `col` of the current line,
  // pulling in continuation lines until brackets balance.
  json read_json(size_t col) {
    const size_t first = line_;
    std::string text = lines_[line_].substr(col - 1);
    long depth = bracket_balance(text);
    while (depth > 0) {
      if (line_ + 1 >= lines_.size()) fail_at("problem.syntax", "unterminated literal", first, col);
      ++line_;
      text += "\n" + lines_[line_];
      depth += bracket_balance(lines_[line_]);
    }
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      // byte offset into the literal -> line and column
      size_t off = e.byte > 0 ? e.byte - 1 : 0, ln = first, c = col;
      for (size_t i = 0; i < off && i < text.size(); ++i) {
        if (text[i] == '\n') {
          ++ln;
          c = 1;
        } else {
          ++c;
        }
      }
      fail_at("problem.syntax", "bad literal", ln, c);
    }
  }

  void literal(const std::vector<Token>& toks) {
    const std::string& kw = toks[0].text;
    need(toks, 4, kw + " <name> <ring> <literal>");
    fresh_name(toks[1]);
    const RingDescriptor& d = ring_ref(toks[2]);
    const size_t line = line_, col = toks[3].col;
    json j = read_json(col);
    if (kw == "series") {
      if (!j.is_array()) fail_at("problem.syntax", "series literal must be a list of records", line, col);
      out_.series[toks[1].text] = element(d, j, line, col);
    } else if (kw == "vector") {
      if (!j.is_array() || j.empty()) fail_at("problem.syntax", "vector literal must be a nonempty list", line, col);
      ModuleVector v;
      for (const auto& x : j) v.push_back(element(d, x, line, col));
      out_.vectors[toks[1].text] = v;
    } else {
      if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        fail_at("problem.syntax", "matrix literal must be a nonempty list of rows", line, col);
      SeriesMatrix A(j.size(), j[0].size());
      for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != A.cols()) fail_at("problem.syntax", "matrix rows differ in length", line, col);
        for (size_t k = 0; k < A.cols(); ++k) A(i, k) = element(d, j[i][k], line, col);
      }
      out_.matrices[toks[1].text] = A;
    }
    ring_of_[toks[1].text] = toks[2].text;
  }

  const SeriesMatrix& matrix_on(const Token& t, const std::string& ring) const {
    auto it = out_.matrices.find(t.text);
    if (it == out_.matrices.end()) fail("problem.undefined", "undefined matrix '" + t.text + "'", t);
    if (ring_of_.at(t.text) != ring) fail("problem.invalid", "matrix '" + t.text + "' is not over ring " + ring, t);
    return it->second;
  }

  size_t rank_param(const Token& t) const { return static_cast<size_t>(integer(t, 1, 64, "rank")); }

  void module(const std::vector<Token>& toks) {
    need(toks, 5, "module <name> dagger|robba <ring> key=value...");
    fresh_name(toks[1]);
    const RingDescriptor& d = ring_ref(toks[3]);
    const std::string& rname = toks[3].text;
    try {
      if (toks[2].text == "dagger") {
        if (d.is_robba()) fail("problem.invalid", "dagger modules need a tate or dagger-fringe ring", toks[3]);
        auto opt = options(toks, 4, {"gamma", "gauge", "trivial"});
        DaggerModule m;
        if (opt.count("trivial")) {
          if (opt.count("gamma")) fail("problem.syntax", "give either trivial= or gamma=", opt["gamma"]);
          m = trivial_dagger_module(d, rank_param(opt["trivial"]));
        } else {
          if (!opt.count("gamma")) fail("problem.syntax", "missing gamma=", toks[2]);
          const Token g = opt["gamma"];
          auto names = split(g.text, ',');
          if (names.size() != d.arity())
            fail("problem.invalid", "need one gamma matrix per ring variable (" + std::to_string(d.arity()) + ")", g);
          m.ring = d;
          for (const auto& n : names) m.Gamma.push_back(matrix_on({n, g.col}, rname));
          m.gauge.assign(d.arity(), Gauge::Dx);
        }
        if (opt.count("gauge")) {
          const Token g = opt["gauge"];
          auto names = split(g.text, ',');
          if (names.size() != d.arity()) fail("problem.invalid", "need one gauge per ring variable", g);
          for (size_t i = 0; i < names.size(); ++i) {
            if (names[i] != "dx" && names[i] != "dlog") fail("problem.syntax", "gauge is dx or dlog", g);
            m.gauge[i] = names[i] == "dx" ? Gauge::Dx : Gauge::Dlog;
          }
        }
        m.validate();
        out_.dagger_modules[toks[1].text] = m;
      } else if (toks[2].text == "robba") {
        if (!d.is_robba()) fail("problem.invalid", "robba modules need a robba-kind ring", toks[3]);
        auto opt = options(toks, 4, {"N", "frobenius", "trivial"});
        RobbaModule m;
        if (opt.count("trivial")) {
          if (opt.count("N")) fail("problem.syntax", "give either trivial= or N=", opt["N"]);
          m = trivial_robba_module(d, rank_param(opt["trivial"]));
        } else {
          if (!opt.count("N")) fail("problem.syntax", "missing N=", toks[2]);
          m.ring = d;
          m.N = matrix_on(opt["N"], rname);
        }
        if (opt.count("frobenius")) m.Phi = matrix_on(opt["frobenius"], rname);
        m.validate();
        out_.robba_modules[toks[1].text] = m;
      } else {
        fail("problem.syntax", "module kind is dagger or robba", toks[2]);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail("problem.invalid", e.what(), toks[1]);
    }
  }

  void command(const std::vector<Token>& toks) {
    need(toks, 2, "command <name> key=value...");
    if (out_.command) fail("problem.syntax", "only one command block is allowed", toks[0]);
    if (!is_command(toks[1].text)) fail("problem.command", "unknown command '" + toks[1].text + "'", toks[1]);
    const auto& spec = command_params().at(toks[1].text);
    std::set<std::string> allowed;
    for (const auto& p : spec) allowed.insert(p.key);
    auto opt = options(toks, 2, allowed);
    CommandBlock c{toks[1].text, {}, line_ + 1};
    for (const auto& p : spec) {
      auto it = opt.find(p.key);
      if (it == opt.end()) {
        if (p.required) fail("problem.syntax", "command " + c.name + " needs " + p.key + "=", toks[1]);
        continue;
      }
      const Token& v = it->second;
      auto exists = [&](const auto& table, const std::string& name, const std::string& what) {
        if (!table.count(name)) fail("problem.undefined", "undefined " + what + " '" + name + "'", v);
      };
      switch (p.kind) {
        case Param::AnyModule:
          if (!out_.dagger_modules.count(v.text) && !out_.robba_modules.count(v.text))
            fail("problem.undefined", "undefined module '" + v.text + "'", v);
          break;
        case Param::Dagger: exists(out_.dagger_modules, v.text, "dagger module"); break;
        case Param::Robba: exists(out_.robba_modules, v.text, "robba module"); break;
        case Param::MatrixName: exists(out_.matrices, v.text, "matrix"); break;
        case Param::VectorName: exists(out_.vectors, v.text, "vector"); break;
        case Param::SeriesName: exists(out_.series, v.text, "series"); break;
        case Param::SeriesList:
          for (const auto& n : split(v.text, ',')) exists(out_.series, n, "series");
          break;
        case Param::Integer: integer(v, p.lo, p.hi, p.key); break;
        case Param::Flag:
          if (v.text != "yes" && v.text != "no") fail("problem.syntax", p.key + " is yes or no", v);
          break;
      }
      c.params[p.key] = v.text;
    }
    out_.command = c;
  }

  std::vector<std::string> lines_;
  size_t line_ = 0;
  bool defined_any_ = false;
  std::set<std::string> names_;
  std::map<std::string, std::string> ring_of_;
  ProblemFile out_;
};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"cohomology", "compact-supports", "pushforward", "factor", "unipotent-basis",
                                                 "horizontal", "pairing", "groebner-reduce", "selftest"};
  return names;
}

bool is_command(const std::string& name) {
  const auto& n = command_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ProblemFile parse_problem(std::string_view text) { return Parser(text).run(); }

}  // namespace ovc
