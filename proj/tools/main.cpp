#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "traction_cli/commands.hpp"

namespace {

std::string csv_help() {
  std::string text = "report.csv columns:\n";
  for (const auto& s : traction::cli::subcommands())
    if (!s.csv_columns.empty()) text += "  " + s.name + ": " + s.csv_columns + "\n";
  text +=
      "Exit codes: 0 success, 1 usage, 2 invalid config, 3 solver error, 4 certification check failed.\n"
      "Every run writes report.json and timing.json into --out.";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace traction::cli;
  CLI::App app{"Linear vs limit energies for pure-traction elasticity", "traction-gap"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.footer(csv_help());

  std::string config_path, out_dir = ".";
  RunOptions opts;
  for (const auto& info : subcommands()) {
    CLI::App* sub = app.add_subcommand(info.name, info.description);
    sub->add_option("--config", config_path, "JSON config; defaults apply when omitted")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    if (info.name == "solve-linear" || info.name == "solve-limit")
      sub->add_flag("--incompressible", opts.incompressible, "use the divergence-free space");
    if (!info.csv_columns.empty()) sub->footer("report.csv columns: " + info.csv_columns);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return run(name, config_path, out_dir, opts, std::cout, std::cerr);
}
