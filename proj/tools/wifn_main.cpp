// wifn — static secrecy analyzer for protocol narrations.
//
//   wifn analyze --context nsl.ctx --protocol nsl.prot [--roles nsl.roles]
//        [--variant max|ek|n] [--theory empty|homomorphic]
//        [--format text|json] [--out report.txt]
//
// Exit codes: 0 the protocol is increasing, 1 it is not, 2 input error.
// Set WIFN_COLOR=0 to disable verdict-glyph coloring.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wifn/analyze.hpp"

#if defined(_WIN32)
#define WIFN_ISATTY() false
#else
#include <unistd.h>
#define WIFN_ISATTY() (isatty(1) == 1)
#endif

int main(int argc, char** argv) {
  CLI::App app{"witness-function secrecy analyzer"};
  app.require_subcommand(1);

  auto* an = app.add_subcommand("analyze", "analyze a protocol narration");
  std::string context_path, protocol_path, roles_path, variant = "max", theory, format = "text",
              out_path;
  an->add_option("--context", context_path, "context file")->required();
  an->add_option("--protocol", protocol_path, "protocol narration file")->required();
  an->add_option("--roles", roles_path, "explicit generalized-role file (skips projection)");
  an->add_option("--variant", variant, "selection variant")
      ->check(CLI::IsMember({"max", "ek", "n"}));
  an->add_option("--theory", theory, "override the context's equational theory")
      ->check(CLI::IsMember({"empty", "homomorphic"}));
  an->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));
  an->add_option("--out", out_path, "write the report to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help exits 0, anything else is an input error
  }

  try {
    wifn::SelectionVariant v = variant == "ek"  ? wifn::SelectionVariant::Ek
                               : variant == "n" ? wifn::SelectionVariant::N
                                                : wifn::SelectionVariant::Max;
    std::optional<wifn::TheoryTag> th;
    if (theory == "empty") th = wifn::TheoryTag::Empty;
    if (theory == "homomorphic") th = wifn::TheoryTag::Homomorphic;
    std::optional<std::string> roles;
    if (!roles_path.empty()) roles = roles_path;

    wifn::Report report = wifn::analyze_files(context_path, protocol_path, roles, v, th);

    const char* env = std::getenv("WIFN_COLOR");
    bool color = WIFN_ISATTY() && !(env && std::string(env) == "0");
    std::string rendered =
        format == "json" ? wifn::render_json(report) : wifn::render_text(report, color && out_path.empty());

    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 2;
      }
      out << rendered;
    } else {
      std::cout << rendered;
    }
    return wifn::exit_code(report);
  } catch (const wifn::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wifn::analysis_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
