#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ovc/run.hpp"

namespace {

int parse_failure(const std::string& file, const ovc::ParseError& e) {
  std::cerr << "ovc: " << file << ":" << e.line() << ":" << e.column() << ": error: " << e.what() << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overconvergent cohomology toolkit"};
  app.set_version_flag("--version", "ovc 1.0");
  std::string command, file, format = "text", out;
  app.add_option("command", command, "operation to run")->required()->check(CLI::IsMember(ovc::command_names()));
  app.add_option("problem-file", file, "problem file (optional for selftest)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "structured"}));
  app.add_option("--out", out, "write the report here instead of stdout");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ovc::ProblemFile problem;
  try {
    if (file.empty()) {
      if (command != "selftest") {
        std::cerr << "ovc: error: " << command << " needs a problem file\n";
        return 2;
      }
    } else {
      std::ifstream in(file, std::ios::binary);
      if (!in) {
        std::cerr << "ovc: " << file << ": error: cannot read problem file\n";
        return 2;
      }
      std::ostringstream text;
      text << in.rdbuf();
      problem = ovc::parse_problem(text.str());
    }
  } catch (const ovc::ParseError& e) {
    return parse_failure(file, e);
  }

  ovc::RunReport report;
  try {
    report = ovc::run_command(problem, command);
  } catch (const ovc::ParseError& e) {
    return parse_failure(file, e);
  } catch (const ovc::Error& e) {
    std::cerr << "ovc: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ovc: error: internal: " << e.what() << "\n";
    return 1;
  }

  const auto fmt = format == "structured" ? ovc::ReportFormat::Structured : ovc::ReportFormat::Text;
  const std::string bytes = ovc::emit_report(report, fmt);
  if (out.empty()) {
    std::cout << bytes;
  } else {
    std::ofstream o(out, std::ios::binary);
    if (!(o << bytes)) {
      std::cerr << "ovc: " << out << ": error: cannot write report\n";
      return 1;
    }
  }
  if (fmt == ovc::ReportFormat::Text) std::cerr << "wall-time: " << report.wall_seconds << " s\n";
  return report.success ? 0 : 1;
}
