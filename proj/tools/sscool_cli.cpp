// Command-line entry point: run, validate and list cooling scenarios.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "sscool/sscool.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitTruncation = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sscool::ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path output_path(const sscool::ScenarioConfig& cfg, const std::string& flag) {
  std::filesystem::path p = !flag.empty() ? flag : !cfg.output.empty() ? cfg.output : sscool::to_string(cfg.scenario) + ".csv";
  if (const char* dir = std::getenv("SSCOOL_OUTPUT_DIR"); dir && *dir && p.is_relative()) p = std::filesystem::path(dir) / p;
  return p;
}

void print_config_errors(const sscool::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& msg : e.errors()) std::cerr << "  " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stark-shift-gate cooling simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write its CSV table");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("-o,--out", out_flag, "Output CSV path (env SSCOOL_OUTPUT_DIR prefixes relative paths)");
  auto* seed_opt = run->add_option("-s,--seed", seed, "Master seed, overrides run.master_seed");
  auto* threads_opt = run->add_option("-j,--threads", threads, "Worker threads (0: all cores)");

  auto* validate = app.add_subcommand("validate", "Check a config and print its resolved form");
  validate->add_option("config", config_path, "Scenario config file")->required();

  app.add_subcommand("list-scenarios", "List the available scenario names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-scenarios")) {
      for (const auto& [kind, name] : sscool::scenario_names()) std::cout << name << "\n";
      return kExitOk;
    }
    sscool::ScenarioConfig cfg = sscool::validate_config(read_file(config_path));
    if (app.got_subcommand("validate")) {
      std::cout << sscool::dump_config(cfg);
      return kExitOk;
    }
    if (*seed_opt) cfg.master_seed = seed;
    if (*threads_opt) cfg.solver.threads = threads;
    const std::filesystem::path path = output_path(cfg, out_flag);
    const sscool::ResultTable table = sscool::run_scenario(cfg);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << path << "\n";
      return kExitSolver;
    }
    sscool::write_csv(out, cfg, table);
    std::cout << "wrote " << table.rows.size() << " rows to " << path.string() << "\n";
    return kExitOk;
  } catch (const sscool::ConfigError& e) {
    print_config_errors(e);
    return kExitConfig;
  } catch (const sscool::TruncationError& e) {
    std::cerr << "truncation: " << e.what() << "\n";
    return kExitTruncation;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
