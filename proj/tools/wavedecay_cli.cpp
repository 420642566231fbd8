// wavedecay: scenario runner.
//
//   wavedecay <eigen|synthesize|simulate|verify|compare> --scenario s.json [--out-dir dir] [--modes M] [--no-timings]
//
// Exit codes: 0 ok, 2 invalid input or failed precondition, 3 synthesized
// data failed the decay test (verify), 1 anything else.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wavedecay/scenario.hpp"

namespace {

using wavedecay::scenario::json;

int report_error(const std::string& kind, const std::string& command, const std::string& scenario,
                 const std::string& message, int code) {
  const json err = {{"error", {{"kind", kind}, {"command", command}, {"scenario", scenario}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forced wave equation: eigenbases, decaying initial data, modal and finite-difference solvers"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::size_t modes = 0;
  bool no_timings = false;

  for (const char* name : {"eigen", "synthesize", "simulate", "verify", "compare"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Directory for output files");
    sub->add_option("--modes", modes, "Override the scenario's mode count")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timings", no_timings, "Omit wall-clock timings from reports");
  }
  app.get_subcommand("eigen")->description("Eigenbasis JSON and eigenvalue table");
  app.get_subcommand("synthesize")->description("Initial data whose solution decays");
  app.get_subcommand("simulate")->description("Modal trajectory CSV and run report");
  app.get_subcommand("verify")->description("Decay verdicts for synthesized and perturbed data");
  app.get_subcommand("compare")->description("Modal solver against the finite-difference solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", "", scenario_path, e.what(), 2);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  namespace sc = wavedecay::scenario;
  try {
    const auto scenario = sc::load_scenario(scenario_path);
    const sc::RunOptions opt{modes, !no_timings};
    sc::CommandResult result;
    if (command == "eigen") {
      result = sc::cmd_eigen(scenario, opt);
    } else if (command == "synthesize") {
      result = sc::cmd_synthesize(scenario, opt);
    } else if (command == "simulate") {
      result = sc::cmd_simulate(scenario, opt);
    } else if (command == "verify") {
      result = sc::cmd_verify(scenario, opt);
    } else {
      result = sc::cmd_compare(scenario, opt);
    }
    for (const auto& [name, contents] : result.files) {
      wavedecay::io::write_atomic(std::filesystem::path(out_dir) / name, contents);
    }
    std::cout << result.summary.dump(2) << '\n';
    return result.exit_code;
  } catch (const wavedecay::PreconditionError& e) {
    return report_error("precondition", command, scenario_path, e.what(), 2);
  } catch (const wavedecay::ConvergenceError& e) {
    return report_error("convergence", command, scenario_path, e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("runtime", command, scenario_path, e.what(), 1);
  }
}
