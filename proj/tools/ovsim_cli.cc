#include "ovsim/scenario.h"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int k_exit_ok     = 0;
constexpr int k_exit_failed = 1;
constexpr int k_exit_config = 2;

void write_to(const std::string& path, const std::string& text)
{
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"ovsim: LTE overshadowing attack simulator"};
  app.require_subcommand(1);

  std::string                  config_path;
  std::optional<std::uint64_t> seed;
  std::string                  log_path;
  std::string                  metrics_path;
  bool                         quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario and evaluate its assertions");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--log", log_path, "Write the event log here ('-' for stdout)");
  run->add_option("--metrics", metrics_path, "Write metrics here ('-' for stdout)");
  run->add_flag("-q,--quiet", quiet, "Only print failing assertions");

  std::string log_in;
  auto*       replay = app.add_subcommand("replay", "Print per-connection message ladders from a log");
  replay->add_option("log", log_in, "Event log file")->required();

  std::string param;
  std::string values;
  bool        csv = false;
  auto*       sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep->add_option("config", config_path, "Scenario config file")->required();
  sweep->add_option("--param", param, "section.key to vary, e.g. attacker.evil.tx_power_dbm")->required();
  sweep->add_option("--values", values, "Comma list or start:stop:step")->required();
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_flag("--csv", csv, "CSV output for plotting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? k_exit_ok : k_exit_config;
  }

  try {
    if (*run) {
      const auto cfg    = ovsim::load_config_file(config_path);
      const auto result = ovsim::run_scenario(cfg, seed);
      if (!log_path.empty()) {
        write_to(log_path, result.log_text);
      }
      if (!metrics_path.empty()) {
        write_to(metrics_path, result.render_metrics());
      }
      for (const auto& a : result.assertions) {
        if (!quiet || a.status == ovsim::assertion_status::fail) {
          std::cerr << ovsim::to_string(a.status) << " " << a.name << (a.detail.empty() ? "" : ": " + a.detail)
                    << "\n";
        }
      }
      return result.passed() ? k_exit_ok : k_exit_failed;
    }
    if (*replay) {
      std::cout << ovsim::replay_log(ovsim::parse_log(ovsim::read_file(log_in)));
      return k_exit_ok;
    }
    if (*sweep) {
      const auto raw  = ovsim::parse_raw_config(ovsim::read_file(config_path));
      const auto rows = ovsim::run_sweep(raw, param, ovsim::parse_sweep_values(values), seed);
      ovsim::write_sweep_table(std::cout, param, rows, csv);
      for (const auto& r : rows) {
        if (!r.result.passed()) {
          return k_exit_failed;
        }
      }
      return k_exit_ok;
    }
  } catch (const ovsim::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return k_exit_config;
  } catch (const ovsim::log_format_error& e) {
    std::cerr << "malformed log: " << e.what() << "\n";
    return k_exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return k_exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return k_exit_config;
  }
  return k_exit_ok;
}
