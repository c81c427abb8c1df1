#include "ovc/run.hpp"

#include <chrono>
#include <sstream>

#include "ovc/acceptance.hpp"
#include "ovc/cohomology.hpp"
#include "ovc/factor.hpp"
#include "ovc/groebner.hpp"
#include "ovc/unipotent.hpp"

namespace ovc {

namespace {

std::string yes(bool b) { return b ? "yes" : "no"; }
std::string str(const Rational& r) { return r.get_str(); }
std::string str(const std::optional<Rational>& r) { return r ? r->get_str() : "none"; }

std::string str(const Exponent& e) {
  std::string s = "(";
  for (size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
  return s + ")";
}

std::string str(const std::vector<size_t>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

class Builder {
 public:
  explicit Builder(RunReport& r) : r_(r) {}

  ReportSection& section(const std::string& id, const std::string& title) {
    r_.sections.push_back({id, title, {}});
    return r_.sections.back();
  }

  void track(const PadicApprox& c) {
    if (c.is_exact_zero()) return;
    long a = c.abs_precision();
    if (!r_.precision_floor || a < *r_.precision_floor) r_.precision_floor = a;
  }
  void track_loss(const std::optional<Rational>& v) {
    if (v && (!r_.truncation || *v < *r_.truncation)) r_.truncation = v;
  }
  void track_floor(long v) {
    if (!r_.precision_floor || v < *r_.precision_floor) r_.precision_floor = v;
  }

  std::string series(const RobbaElement& x) {
    for (const auto& [e, c] : x.terms()) track(c);
    track_loss(x.truncation_loss());
    return to_records(x);
  }
  std::string vec(const ModuleVector& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + series(v[i]);
    return s + ")";
  }
  std::string scalar(const PadicApprox& c) {
    track(c);
    return c.to_string();
  }

  void matrix(ReportSection& s, const std::string& name, const SeriesMatrix& A) {
    s.add(name + ".shape", std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    for (size_t i = 0; i < A.rows(); ++i)
      for (size_t j = 0; j < A.cols(); ++j) s.add(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]", series(A(i, j)));
  }
  void matrix(ReportSection& s, const std::string& name, const Matrix<PadicApprox>& A) {
    s.add(name + ".shape", std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    for (size_t i = 0; i < A.rows(); ++i) {
      std::string row = "[";
      for (size_t j = 0; j < A.cols(); ++j) row += (j ? ", " : "") + scalar(A(i, j));
      s.add(name + ".row" + std::to_string(i), row + "]");
    }
  }

  void check(ReportSection& s, const std::string& name, const CheckResult& c) {
    s.add(name + ".pass", yes(c.pass));
    s.add(name + ".defect", str(c.defect_value));
    if (c.defect_index) s.add(name + ".defect_index", str(*c.defect_index));
    if (!c.detail.empty()) s.add(name + ".detail", one_line(c.detail));
  }

  void cohomology(const std::string& id, const CohomologyReport& h) {
    auto& s = section(id, h.title);
    s.add("degrees", std::to_string(h.dims.size()));
    s.add("dims", str(h.dims));
    for (size_t k = 0; k < h.dims.size(); ++k) {
      const std::string d = "H" + std::to_string(k);
      s.add(d + ".dim", std::to_string(h.dims[k]));
      s.add(d + ".reliable", yes(h.reliable[k]));
      for (size_t j = 0; j < h.generators[k].size(); ++j) {
        const auto& g = h.generators[k][j];
        const std::string gk = d + ".gen" + std::to_string(j);
        s.add(gk + ".label", one_line(g.label));
        for (const auto& [J, v] : g.value) s.add(gk + ".w" + str(J), vec(v));
        s.add(gk + ".defect", str(g.defect));
      }
    }
    s.add("precision", std::to_string(h.precision));
    s.add("truncation_loss", str(h.truncation_loss));
    for (size_t i = 0; i < h.notes.size(); ++i) s.add("note" + std::to_string(i), one_line(h.notes[i]));
    track_floor(h.precision);
    track_loss(h.truncation_loss);
  }

  void flag(const std::string& f) { r_.truncation_flags.push_back(f); }
  void note(const std::string& n) { r_.notes.push_back(one_line(n)); }
  void fail() { r_.success = false; }

 private:
  RunReport& r_;
};

long param_long(const std::map<std::string, std::string>& p, const std::string& key, long fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : std::stol(it->second);
}

bool param_flag(const std::map<std::string, std::string>& p, const std::string& key, bool fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second == "yes";
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string op_string(const ElementaryOp& op) {
  switch (op.kind) {
    case ElementaryKind::Scale:
      return "scale " + std::to_string(op.i) + " by " + to_records(op.factor);
    case ElementaryKind::Swap:
      return "swap " + std::to_string(op.i) + " " + std::to_string(op.j);
    case ElementaryKind::AddMultiple:
      break;
  }
  return "add " + to_records(op.factor) + " * " + std::to_string(op.j) + " to " + std::to_string(op.i);
}

SeriesMatrix filtration(const ProblemFile& pf, const std::map<std::string, std::string>& params, const RobbaModule& m) {
  auto it = params.find("filtration");
  return it == params.end() ? identity_matrix(m.ring, m.rank()) : pf.matrices.at(it->second);
}

void run_cohomology(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params, bool compact) {
  CohomologyOptions opt{param_long(params, "window", pf.header.window), param_flag(params, "reps", true)};
  const std::string& name = params.at("module");
  if (compact) {
    b.cohomology("compact", compact_support_cohomology(pf.dagger_modules.at(name), opt));
  } else if (pf.dagger_modules.count(name)) {
    b.cohomology("cohomology", mw_cohomology(pf.dagger_modules.at(name), opt));
  } else {
    b.cohomology("cohomology", robba_cohomology(pf.robba_modules.at(name), opt));
  }
}

void run_pushforward(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  const DaggerModule& m = pf.dagger_modules.at(params.at("module"));
  CohomologyOptions opt{param_long(params, "window", pf.header.window), true};
  std::optional<UnipotentData> cert;
  if (param_flag(params, "certificate", false)) {
    if (m.arity() != 1)
      throw Error("cli.certificate_unsupported", "unipotent certificates are built for one-variable modules only");
    RobbaModule loc = local_module(m, opt.window);
    cert = strongly_unipotent_basis(loc, identity_matrix(loc.ring, loc.rank()));
  }
  auto bundle = pushforward_complex(m, opt, cert);
  auto& s = b.section("pushforward", "pushforward along the first variable");
  s.add("dims(r0f,r1f,r0loc,r1loc,r1shriek,r2shriek)",
        str(std::vector<size_t>{bundle.r0f.dims[0], bundle.r1f.dims[0], bundle.r0loc.dims[0], bundle.r1loc.dims[0],
                                bundle.r1shriek.dims[0], bundle.r2shriek.dims[0]}));
  s.add("sequence(r0f,r0loc,r1shriek,r1f,r1loc,r2shriek)", str(bundle.sequence_dims()));
  s.add("r1prim.dim", std::to_string(bundle.r1prim.dims[0]));
  s.add("certificate_used", yes(bundle.certificate_used));
  s.add("reliable", yes(bundle.reliable));
  for (size_t k = 0; k < bundle.maps.size(); ++k) b.matrix(s, "map" + std::to_string(k), bundle.maps[k]);
  for (size_t i = 0; i < bundle.notes.size(); ++i) s.add("note" + std::to_string(i), one_line(bundle.notes[i]));

  auto verdict = snake_check(bundle);
  auto& sn = b.section("snake", "snake exactness");
  for (const auto& n : verdict.nodes)
    sn.add(n.name, "dim " + std::to_string(n.dim) + " in " + std::to_string(n.rank_in) + " out " +
                       std::to_string(n.rank_out) + (n.exact ? " exact" : " not exact"));
  sn.add("pass", yes(verdict.pass));
  sn.add("first_failure", verdict.first_failure ? std::to_string(*verdict.first_failure) : "none");

  b.cohomology("r0f", bundle.r0f);
  b.cohomology("r1f", bundle.r1f);
  b.cohomology("r0loc", bundle.r0loc);
  b.cohomology("r1loc", bundle.r1loc);
  b.cohomology("r1shriek", bundle.r1shriek);
  b.cohomology("r2shriek", bundle.r2shriek);
  b.cohomology("r1prim", bundle.r1prim);
}

void run_factor(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  const SeriesMatrix& U = pf.matrices.at(params.at("matrix"));
  std::optional<long> steps;
  if (params.count("steps")) steps = param_long(params, "steps", 0);
  auto f = factor_plus(U, steps);
  auto& s = b.section("factor", "factorization U = V W");
  s.add("det_valuation", str(det_valuation(U)));
  s.add("rescale", std::to_string(f.rescale));
  s.add("shift", std::to_string(f.shift));
  b.matrix(s, "V", f.V);
  b.matrix(s, "W", f.W);
  b.matrix(s, "W_inverse", f.W_inverse);
  s.add("steps", std::to_string(f.steps.size()));
  for (size_t k = 0; k < f.steps.size(); ++k) {
    const auto& st = f.steps[k];
    const std::string key = "step" + std::to_string(k);
    s.add(key + ".det", str(st.det_before) + " -> " + str(st.det_after));
    s.add(key + ".divided_column", std::to_string(st.divided_column));
    for (size_t j = 0; j < st.column_ops.size(); ++j) s.add(key + ".op" + std::to_string(j), op_string(st.column_ops[j]));
  }
  s.add("reconstruction_defect", str(f.reconstruction_defect));
}

void unipotent_fields(Builder& b, ReportSection& s, const UnipotentData& u) {
  b.matrix(s, "X", u.X);
  s.add("nilpotency_index", std::to_string(u.e));
  b.matrix(s, "U", u.U);
  b.matrix(s, "U_inverse", u.U_inverse);
  b.check(s, "gauge_identity", verify_unipotent(u));
}

void run_unipotent(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  const RobbaModule& m = pf.robba_modules.at(params.at("module"));
  auto u = strongly_unipotent_basis(m, filtration(pf, params, m));
  auto& s = b.section("unipotent", "strongly unipotent basis");
  unipotent_fields(b, s, u);
  b.cohomology("h0_h1", h0_h1_unipotent(u));
}

void run_horizontal(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  const RobbaModule& m = pf.robba_modules.at(params.at("module"));
  const ModuleVector& w = pf.vectors.at(params.at("vector"));
  if (w.size() != m.rank()) throw Error("cli.shape", "vector length differs from the module rank");
  auto u = strongly_unipotent_basis(m, filtration(pf, params, m));
  const long L = param_long(params, "iterations", pf.header.window);
  auto r = horizontal_iterate(u, w, L, param_flag(params, "basis", false));
  auto& s = b.section("horizontal", "horizontal iteration");
  s.add("iterations", std::to_string(L));
  s.add("f", b.vec(r.f));
  s.add("f_v", b.vec(r.f_v));
  for (size_t l = 0; l < r.log.size(); ++l) s.add("w_r.step" + std::to_string(l + 1), r.log[l] ? str(*r.log[l]) : "inf");
  s.add("slope", str(r.slope));
  s.add("nominal_loss", std::to_string(r.nominal_loss));
  s.add("tracked_loss", std::to_string(r.tracked_loss));
  b.check(s, "nabla", r.nabla);
}

void run_pairing(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  const DaggerModule& m = pf.dagger_modules.at(params.at("module"));
  CohomologyOptions opt{param_long(params, "window", pf.header.window), true};
  auto r = pairing_nondegeneracy_check(m, param_long(params, "degree", 0), opt);
  auto& s = b.section("pairing", "residue pairing");
  s.add("i", std::to_string(r.i));
  s.add("compact_degree", std::to_string(r.compact_degree));
  s.add("mw_degree", std::to_string(r.mw_degree));
  b.matrix(s, "matrix", r.matrix);
  s.add("rank", std::to_string(r.rank));
  s.add("injective_compact", yes(r.injective_compact));
  s.add("injective_mw", yes(r.injective_mw));
  s.add("full_rank", yes(r.full_rank()));
  s.add("reliable", yes(r.reliable));
}

void run_groebner(Builder& b, const ProblemFile& pf, const std::map<std::string, std::string>& params) {
  std::vector<DaggerSeries> gens;
  for (const auto& n : split_names(params.at("generators"))) gens.push_back(pf.series.at(n));
  auto basis = complete_leading_basis(gens);
  auto& s = b.section("groebner", "leading basis and reduction");
  s.add("basis.size", std::to_string(basis.elements.size()));
  for (size_t k = 0; k < basis.elements.size(); ++k) {
    const auto& e = basis.elements[k];
    const std::string key = "basis" + std::to_string(k);
    s.add(key + ".element", b.series(e.element));
    s.add(key + ".leading_index", str(e.leading_index));
    s.add(key + ".leading_coeff", b.scalar(e.leading_coeff));
  }
  s.add("basis.decay", std::to_string(basis.decay));
  s.add("basis.spairs", std::to_string(basis.spairs));
  if (basis.window_truncated) b.flag("leading basis completion hit the window");
  const long decay = param_long(params, "decay", basis.decay);
  auto r = reduce_element(pf.series.at(params.at("bound")), pf.series.at(params.at("element")), basis.elements,
                          Rational(decay));
  s.add("decay", std::to_string(decay));
  s.add("u", b.series(r.u));
  s.add("steps", std::to_string(r.steps));
  s.add("gauss_u", str(r.gauss_u));
  s.add("gauss_y", str(r.gauss_y));
  s.add("rho_u", str(r.rho_u));
  s.add("rho_z", str(r.rho_z));
  s.add("gauss_ok", yes(r.gauss_ok));
  s.add("rho_ok", yes(r.rho_ok));
  s.add("membership_at_precision", yes(r.membership_at_precision));
}

void run_selftest(Builder& b) {
  auto& s = b.section("selftest", "acceptance criteria");
  size_t passed = 0;
  for (const auto& c : acceptance::run_all()) {
    const std::string key = "criterion" + std::to_string(c.id);
    s.add(key + ".name", c.name);
    s.add(key + ".pass", yes(c.pass));
    s.add(key + ".detail", one_line(c.detail));
    if (c.pass)
      ++passed;
    else
      b.fail();
  }
  s.add("passed", std::to_string(passed) + "/" + std::to_string(acceptance::kCriteria));
}

std::string echo(const std::string& command, const std::map<std::string, std::string>& params) {
  std::string s = command;
  for (const auto& [k, v] : params) s += " " + k + "=" + v;
  return s;
}

}  // namespace

RunReport run_command(const ProblemFile& pf, const std::string& command) {
  if (!is_command(command)) throw ParseError("problem.command", "unknown command '" + command + "'", 1, 1);
  std::map<std::string, std::string> params;
  if (pf.command) {
    if (pf.command->name != command)
      throw ParseError("problem.command",
                       "problem file is for '" + pf.command->name + "', not '" + command + "'", pf.command->line, 1);
    params = pf.command->params;
  } else if (command != "selftest") {
    throw ParseError("problem.command", "problem file has no command block for '" + command + "'", 1, 1);
  }

  RunReport r;
  r.command = echo(command, params);
  const auto start = std::chrono::steady_clock::now();
  Builder b(r);
  if (command == "cohomology" || command == "compact-supports")
    run_cohomology(b, pf, params, command == "compact-supports");
  else if (command == "pushforward")
    run_pushforward(b, pf, params);
  else if (command == "factor")
    run_factor(b, pf, params);
  else if (command == "unipotent-basis")
    run_unipotent(b, pf, params);
  else if (command == "horizontal")
    run_horizontal(b, pf, params);
  else if (command == "pairing")
    run_pairing(b, pf, params);
  else if (command == "groebner-reduce")
    run_groebner(b, pf, params);
  else
    run_selftest(b);
  if (!r.precision_floor && pf.header.p) r.precision_floor = pf.header.precision;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string emit_report(const RunReport& r, ReportFormat format) {
  std::ostringstream os;
  const std::string floor = r.precision_floor ? std::to_string(*r.precision_floor) : "none";
  std::string trunc = r.truncation ? "dropped terms of value >= " + str(*r.truncation) : "none";
  std::string flags;
  for (size_t i = 0; i < r.truncation_flags.size(); ++i) flags += (i ? "; " : "") + r.truncation_flags[i];

  if (format == ReportFormat::Structured) {
    os << "format=ovc-report-1\n";
    os << "command=" << r.command << "\n";
    os << "status=" << (r.success ? "ok" : "fail") << "\n";
    os << "precision_floor=" << floor << "\n";
    os << "truncation=" << (r.truncation ? str(*r.truncation) : "none") << "\n";
    os << "truncation_flags=" << (flags.empty() ? "none" : flags) << "\n";
    for (const auto& s : r.sections)
      for (const auto& [k, v] : s.fields) os << s.id << "." << k << "=" << v << "\n";
    for (size_t i = 0; i < r.notes.size(); ++i) os << "note" << i << "=" << r.notes[i] << "\n";
    return os.str();
  }

  os << "ovc report 1\n";
  os << "command: " << r.command << "\n";
  os << "status: " << (r.success ? "ok" : "FAILED") << "\n";
  os << "precision floor: " << floor << "\n";
  os << "truncation: " << trunc << (flags.empty() ? "" : " (" + flags + ")") << "\n";
  for (const auto& s : r.sections) {
    os << "\n[" << s.title << "]\n";
    for (const auto& [k, v] : s.fields) os << "  " << k << ": " << v << "\n";
  }
  if (!r.notes.empty()) {
    os << "\nnotes:\n";
    for (const auto& n : r.notes) os << "  - " << n << "\n";
  }
  return os.str();
}

std::map<std::string, std::string> parse_structured(std::string_view text) {
  std::map<std::string, std::string> out;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    size_t eq = line.find('=');
    if (eq != std::string_view::npos) out.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    start = end + 1;
  }
  return out;
}

}  // namespace ovc
