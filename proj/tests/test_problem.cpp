#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ovc/run.hpp"

using namespace ovc;

namespace {

const std::string kHeader = "ovc-problem 1\nprime 3\nprecision 20\n";

std::string trivial_line(const std::string& extra = "") {
  return kHeader + "ring A dagger-fringe x hi=20\nmodule O dagger A trivial=1\n" + extra +
         "command cohomology module=O window=12\n";
}

// Code and position of the parse failure, or empty when the text parses.
struct Failure {
  std::string code;
  size_t line = 0, column = 0;
};

Failure parse_failure(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return {e.code(), e.line(), e.column()};
  }
  return {};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string field(const RunReport& r, const std::string& key) {
  for (const auto& s : r.sections)
    for (const auto& [k, v] : s.fields)
      if (s.id + "." + k == key) return v;
  return "<missing>";
}

int run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " " + OVC_CLI + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("parse_problem: minimal problem") {
  auto pf = parse_problem(trivial_line());
  CHECK(pf.header.p == 3);
  CHECK(pf.header.q == 3);
  CHECK(pf.header.precision == 20);
  REQUIRE(pf.rings.count("A"));
  CHECK(pf.rings.at("A").window[0] == std::pair<long, long>{0, 20});
  REQUIRE(pf.dagger_modules.count("O"));
  CHECK(pf.dagger_modules.at("O").rank() == 1);
  REQUIRE(pf.command.has_value());
  CHECK(pf.command->name == "cohomology");
  CHECK(pf.command->params.at("window") == "12");
  CHECK(pf.command->line == 6);
}

TEST_CASE("parse_problem: range errors") {
  auto f = parse_failure(kHeader + "window 1000000\n");
  CHECK(f.code == "problem.range");
  CHECK(f.line == 4);
  CHECK(f.column == 8);
  CHECK(parse_failure("ovc-problem 1\nprime 4\n").code == "problem.range");
  CHECK(parse_failure("ovc-problem 1\nprime 1\n").code == "problem.range");
  CHECK(parse_failure("ovc-problem 1\nprime 3\nprecision 257\n").code == "problem.range");
  CHECK(parse_failure("ovc-problem 1\nprime 3\nprecision 0\n").code == "problem.range");
  CHECK(parse_failure("ovc-problem 1\nprime 3\nq 12\n").code == "problem.range");
  CHECK(parse_failure("ovc-problem 1\nprime 3\nprecision 256\nq 27\n").code.empty());
  CHECK(parse_failure(kHeader + "ring A dagger-fringe x hi=10001\n").code == "problem.range");
  CHECK(parse_failure(kHeader + "ring R robba t lo=5 hi=-5\n").code == "problem.range");
  CHECK(parse_failure(trivial_line().replace(trivial_line().find("window=12"), 9, "window=20000")).code ==
        "problem.range");
  CHECK(parse_failure(kHeader + "ring A dagger-fringe x hi=4\nseries f A [[5, \"1\"]]\n").code == "problem.range");
}

TEST_CASE("parse_problem: undefined names carry their position") {
  auto f = parse_failure(kHeader + "ring R robba t\nmodule L robba R N=U\n");
  CHECK(f.code == "problem.undefined");
  CHECK(f.line == 5);
  CHECK(f.column == 20);
  CHECK(parse_failure(kHeader + "series f B [[0, \"1\"]]\n").code == "problem.undefined");
  CHECK(parse_failure(kHeader + "ring A dagger-fringe x\ncommand cohomology module=M\n").code == "problem.undefined");
  // a robba module where a dagger module is required
  CHECK(parse_failure(kHeader + "ring R robba t\nmodule L robba R trivial=1\ncommand pairing module=L degree=0\n").code ==
        "problem.undefined");
}

TEST_CASE("parse_problem: syntax errors") {
  CHECK(parse_failure("").code == "problem.version");
  CHECK(parse_failure("prime 3\n").code == "problem.version");
  CHECK(parse_failure("ovc-problem 2\nprime 3\n").code == "problem.version");
  CHECK(parse_failure("ovc-problem 1\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "frobnicate 3\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x\nring A tate y\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x\nprime 5\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A banana x\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x,x\n").code == "problem.syntax");
  CHECK(parse_failure(trivial_line() + "command cohomology module=O\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "command integrate\n").code == "problem.command");
  CHECK(parse_failure(kHeader + "ring A tate x\nmodule O dagger A trivial=1\ncommand cohomology module=O colour=red\n")
            .code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x\nmodule O dagger A trivial=1\ncommand cohomology\n").code ==
        "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x\nseries f A [[0, 1.5]]\n").code == "problem.syntax");
  CHECK(parse_failure(kHeader + "ring A tate x\nseries f A [[0, \"1*5^0@20\"]]\n").code == "problem.syntax");

  auto bad = parse_failure(kHeader + "ring A tate x\nseries f A [[0, \"1\"],,]\n");
  CHECK(bad.code == "problem.syntax");
  CHECK(bad.line == 5);
  CHECK(bad.column > 12);

  auto open = parse_failure(kHeader + "ring A tate x\nseries f A [[0, \"1\"],\n");
  CHECK(open.code == "problem.syntax");
  CHECK(open.line == 5);
}

TEST_CASE("parse_problem: invalid modules") {
  CHECK(parse_failure(kHeader + "ring R robba t\nmodule L dagger R trivial=1\n").code == "problem.invalid");
  CHECK(parse_failure(kHeader + "ring A tate x,y\nmatrix G A [[0]]\nmodule M dagger A gamma=G\n").code ==
        "problem.invalid");
  CHECK(parse_failure(kHeader + "ring A tate x\nring B tate y\nmatrix G B [[0]]\nmodule M dagger A gamma=G\n").code ==
        "problem.invalid");
  CHECK(parse_failure(kHeader + "ring R robba t\nmatrix N R [[0, 1]]\nmodule L robba R N=N\n").code ==
        "problem.invalid");
}

TEST_CASE("parse_problem: literals") {
  auto pf = parse_problem(kHeader +
                          "ring R robba t lo=-5 hi=5   # a comment\n"
                          "matrix N R [[0, [[1, \"1\"], [-2, \"2*3^1@20\"]]],\n"
                          "            [\"1/2\", \"0@7\"]]\n"
                          "vector v R [[[0, -4]], 7]\n");
  const auto& N = pf.matrices.at("N");
  REQUIRE(N.rows() == 2);
  REQUIRE(N.cols() == 2);
  const auto& d = pf.rings.at("R");
  CHECK(N(0, 0).is_zero());
  CHECK(N(0, 1).coefficient({1}) == d.scalar(1));
  CHECK(N(0, 1).coefficient({-2}) == d.scalar(6));
  CHECK(N(1, 0).coefficient({0}) == d.scalar(Rational(1, 2)));
  CHECK(N(1, 1).coefficient({0}).is_limited_zero());
  const auto& v = pf.vectors.at("v");
  REQUIRE(v.size() == 2);
  CHECK(v[0].coefficient({0}) == d.scalar(-4));
  CHECK(v[1].coefficient({0}) == d.scalar(7));
}

TEST_CASE("series literals round-trip through the problem format") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> ex(-6, 6), co(-500, 500), vv(-3, 4), nterms(0, 5);
  for (int t = 0; t < 100; ++t) {
    auto pf0 = parse_problem(kHeader + "ring R multi-robba s,t lo=-6 hi=6\n");
    const auto& d = pf0.rings.at("R");
    RobbaElement x(d);
    for (long k = nterms(rng); k > 0; --k) {
      long c = co(rng);
      if (!c) continue;
      x.add_term({ex(rng), ex(rng)}, PadicApprox::from_parts(c % 3 ? c : c + 1, vv(rng), 20, 3));
    }
    auto pf = parse_problem(kHeader + "ring R multi-robba s,t lo=-6 hi=6\nseries f R " + to_records(x) + "\n");
    const auto& y = pf.series.at("f");
    CHECK(to_records(y) == to_records(x));
    CHECK(y.terms() == x.terms());
  }
}

TEST_CASE("run_command: documented command examples") {
  auto push = parse_problem(kHeader +
                            "ring A dagger-fringe x\n"
                            "module O dagger A trivial=1\n"
                            "command pushforward module=O window=12\n");
  auto r = run_command(push, "pushforward");
  CHECK(field(r, "pushforward.dims(r0f,r1f,r0loc,r1loc,r1shriek,r2shriek)") == "(1,0,1,1,0,1)");
  CHECK(field(r, "snake.pass") == "yes");
  CHECK(r.success);

  auto fac = parse_problem(kHeader + "ring R robba t lo=-10 hi=10\nmatrix U R [[3, 0], [0, 1]]\ncommand factor matrix=U\n");
  auto f = run_command(fac, "factor");
  CHECK(field(f, "factor.V[0,0]") == "[[0,\"1*3^0@20\"]]");
  CHECK(field(f, "factor.V[0,1]") == "[]");
  CHECK(field(f, "factor.V[1,0]") == "[]");
  CHECK(field(f, "factor.V[1,1]") == "[[0,\"1*3^0@20\"]]");
  CHECK(field(f, "factor.W[0,0]") == "[[0,\"1*3^1@20\"]]");
  CHECK(field(f, "factor.W[1,1]") == "[[0,\"1*3^0@20\"]]");
  CHECK(field(f, "factor.steps") == "1");

  auto coh = run_command(parse_problem(trivial_line()), "cohomology");
  CHECK(field(coh, "cohomology.dims") == "(1,0)");
  CHECK(coh.precision_floor.has_value());
}

TEST_CASE("run_command: errors") {
  auto pf = parse_problem(trivial_line());
  CHECK_THROWS_AS(run_command(pf, "factor"), ParseError);
  CHECK_THROWS_AS(run_command(pf, "nonsense"), ParseError);
  auto sing = parse_problem(kHeader + "ring R robba t\nmatrix U R [[1, 1], [1, 1]]\ncommand factor matrix=U\n");
  try {
    run_command(sing, "factor");
    CHECK(false);
  } catch (const ParseError&) {
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code().find('.') != std::string::npos);
  }
}

TEST_CASE("emit_report is deterministic and structured reports round-trip") {
  auto pf = parse_problem(kHeader +
                          "ring A dagger-fringe x,y\n"
                          "module O dagger A trivial=1\n"
                          "command compact-supports module=O window=6\n");
  auto a = run_command(pf, "compact-supports");
  auto b = run_command(pf, "compact-supports");
  for (auto fmt : {ReportFormat::Text, ReportFormat::Structured}) CHECK(emit_report(a, fmt) == emit_report(b, fmt));

  const std::string text = emit_report(a, ReportFormat::Text);
  CHECK(text.find("\nprecision floor: ") != std::string::npos);
  CHECK(text.find("\ntruncation: ") != std::string::npos);
  CHECK(text.find("wall") == std::string::npos);

  auto kv = parse_structured(emit_report(a, ReportFormat::Structured));
  CHECK(kv.at("format") == "ovc-report-1");
  CHECK(kv.at("status") == "ok");
  CHECK(kv.at("precision_floor") == std::to_string(*a.precision_floor));
  CHECK(kv.at("compact.dims") == "(0,0,0,0,1)");
  for (size_t k = 0; k < 5; ++k) CHECK(kv.at("compact.H" + std::to_string(k) + ".dim") == (k == 4 ? "1" : "0"));
  size_t fields = 0;
  for (const auto& s : a.sections)
    for (const auto& [k, v] : s.fields) {
      CHECK(kv.at(s.id + "." + k) == v);
      ++fields;
    }
  CHECK(fields > 10);
}

TEST_CASE("ovc command line") {
  const std::string dir = OVC_PROBLEMS;
  CHECK(run_cli("cohomology " + dir + "/trivial_line.ovc") == 0);
  CHECK(run_cli("pushforward " + dir + "/pushforward_trivial.ovc --format structured") == 0);
  CHECK(run_cli("factor " + dir + "/trivial_line.ovc") == 2);  // command mismatch
  CHECK(run_cli("cohomology /nonexistent/problem.ovc") == 2);
  CHECK(run_cli("cohomology") == 2);
  CHECK(run_cli("integrate " + dir + "/trivial_line.ovc") == 2);
  CHECK(run_cli("cohomology " + dir + "/trivial_line.ovc --format yaml") == 2);

  const std::string tmp = "ovc_cli_test";
  {
    std::ofstream o(tmp + "_bad.ovc");
    o << kHeader << "window 1000000\n";
  }
  CHECK(run_cli("cohomology " + tmp + "_bad.ovc") == 2);
  {
    std::ofstream o(tmp + "_sing.ovc");
    o << kHeader << "ring R robba t\nmatrix U R [[1, 1], [1, 1]]\ncommand factor matrix=U\n";
  }
  CHECK(run_cli("factor " + tmp + "_sing.ovc") == 1);

  // --out matches the library's bytes, independent of OVC_THREADS
  const std::string file = dir + "/compact_plane.ovc";
  REQUIRE(run_cli("compact-supports " + file + " --format structured --out " + tmp + "_1.txt", "OVC_THREADS=1") == 0);
  REQUIRE(run_cli("compact-supports " + file + " --format structured --out " + tmp + "_4.txt", "OVC_THREADS=4") == 0);
  const std::string one = read_file(tmp + "_1.txt");
  CHECK(one == read_file(tmp + "_4.txt"));
  auto pf = parse_problem(read_file(file));
  CHECK(one == emit_report(run_command(pf, "compact-supports"), ReportFormat::Structured));
  for (const char* suffix : {"_bad.ovc", "_sing.ovc", "_1.txt", "_4.txt"}) std::remove((tmp + suffix).c_str());
}
