#pragma once

// Scenario runner: wires a scenario_config into a simulator, runs it to the
// horizon and evaluates the configured assertions over the event log.

#include "ovsim/config.h"

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ovsim {

enum class assertion_status : std::uint8_t { pass, fail, skipped };
const char* to_string(assertion_status s);

struct assertion_result {
  std::string      name;
  assertion_status status = assertion_status::skipped;
  std::string      detail;
};

/// Evaluates one assertion over a finished log. `horizon` bounds state_at.
assertion_result evaluate_assertion(const assertion_spec& a, const std::vector<event>& log);

/// State of a UE at `tti`, reconstructed from its ue_state events.
ue_state state_at(const std::vector<event>& log, const std::string& ue, std::uint64_t tti);

struct scenario_result {
  std::uint64_t                               seed    = 0;
  std::uint64_t                               end_tti = 0;
  std::string                                 log_text;
  std::vector<event>                          events;
  std::vector<assertion_result>               assertions;
  std::vector<std::pair<std::string, double>> metrics;

  bool        passed() const; ///< no failed assertion
  std::string render_metrics() const;
  std::string render_assertions() const;
};

class scenario
{
public:
  /// Builds every node. Throws config_error for unresolvable references.
  explicit scenario(const scenario_config& cfg, std::optional<std::uint64_t> seed_override = std::nullopt);
  ~scenario();
  scenario(const scenario&)            = delete;
  scenario& operator=(const scenario&) = delete;

  /// Runs to the configured horizon (or stops early on request).
  void run();
  void run_until(std::uint64_t tti);

  scenario_result result() const;

  simulator&     sim() { return *sim_; }
  enb_node&      enb() { return *enb_; }
  ue_node*       ue(const std::string& name);
  attacker_node* attacker(const std::string& name);

private:
  scenario_config            cfg_;
  std::uint64_t              seed_;
  std::unique_ptr<simulator> sim_;
  enb_node*                  enb_ = nullptr;
};

/// Builds, runs and evaluates in one call. Horizon 0 skips the run entirely.
scenario_result run_scenario(const scenario_config& cfg, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Human-readable per-connection message ladders from a log.
std::string replay_log(const std::vector<event>& log);

struct sweep_row {
  std::string     value;
  scenario_result result;
};

/// Values: "a,b,c", "x1,y1;x2,y2" or "start:stop:step" (inclusive).
std::vector<std::string> parse_sweep_values(const std::string& spec);
std::vector<sweep_row>   run_sweep(const raw_config& base, const std::string& param,
                                   const std::vector<std::string>& values, std::optional<std::uint64_t> seed = {});
void write_sweep_table(std::ostream& os, const std::string& param, const std::vector<sweep_row>& rows, bool csv);

} // namespace ovsim
