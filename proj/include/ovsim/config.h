#pragma once

// Scenario configuration. Plain text, '#' comments, top-level keys followed by
// [section] blocks of key = value lines:
//
//   seed = 7
//   horizon = 2min
//   [ue.victim]
//   imsi = 001010123456789
//   position = 100,0
//
// Unknown sections and keys are rejected with their line number.

#include "ovsim/attacker.h"
#include "ovsim/event_log.h"
#include "ovsim/network.h"
#include "ovsim/ue.h"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ovsim {

class config_error : public std::runtime_error
{
public:
  config_error(const std::string& msg, int line, std::string field);
  int                line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  int         line_;
  std::string field_;
};

struct raw_entry {
  std::string key;
  std::string value;
  int         line = 0;
};

struct raw_section {
  std::string            name; ///< "" for the top-level block
  int                    line = 0;
  std::vector<raw_entry> entries;

  const raw_entry* find(std::string_view key) const;
};

struct raw_config {
  std::vector<raw_section> sections;

  /// Sets `section.key` (or a top-level `key`); the section must exist.
  void        set(const std::string& path, const std::string& value);
  std::string render() const;
};

raw_config parse_raw_config(std::string_view text);

/// "250", "250ms", "30s", "5min", "12h" -> milliseconds. Throws std::invalid_argument.
sim_ms parse_duration(std::string_view s);

/// Event matcher: "kind key=value key>=n key<=n key!=value key~substr ...". A kind of
/// '*' matches any event; "node=" compares the emitting node.
class event_filter
{
public:
  event_filter() = default;
  static event_filter parse(std::string_view text); ///< throws std::invalid_argument

  bool               matches(const event& e) const;
  const std::string& text() const { return text_; }

private:
  enum class op : std::uint8_t { eq, ne, ge, le, gt, lt, contains };
  struct condition {
    std::string key;
    op          o = op::eq;
    std::string value;
  };

  std::string            text_;
  std::string            kind_ = "*";
  std::vector<condition> conds_;
};

struct ue_spec {
  std::string   name;
  phy::position pos;
  ue_config     cfg;
  sim_ms        power_on_at = 1;
  bool          subscribed  = true;
};

struct attacker_spec {
  std::string   name;
  phy::position pos;
  attack_plan   plan;
};

enum class action_type : std::uint8_t { power_on, user_reset, start_data, send_sms };

struct action_spec {
  std::string name;
  sim_ms      at = 0;
  action_type type = action_type::power_on;
  std::string target; ///< UE name
  bool        silent = true;
  int         line   = 0;
};

enum class assertion_type : std::uint8_t { state_at, event_exists, event_absent, event_count, delay_between };

struct assertion_spec {
  std::string    name;
  assertion_type type = assertion_type::event_exists;
  int            line = 0;

  // state_at
  std::string              ue;
  sim_ms                   at = 0;
  std::vector<std::string> states;

  // event_* and delay_between
  event_filter          match;
  event_filter          from;
  event_filter          to;
  std::optional<double> min;
  std::optional<double> max;
};

struct scenario_config {
  std::uint64_t                                seed    = 0;
  sim_ms                                       horizon = 0;
  phy::channel_model                           channel;
  phy::position                                enb_pos;
  enb_config                                   enb;
  mme_config                                   mme;
  std::vector<ue_spec>                         ues;
  std::vector<attacker_spec>                   attackers;
  std::vector<action_spec>                     actions;
  std::vector<assertion_spec>                  assertions;
  bool                                         log_phy = false;
  std::vector<std::pair<std::string, event_filter>> metrics;
};

/// Throws config_error.
scenario_config build_config(const raw_config& raw);
scenario_config load_config(std::string_view text);
scenario_config load_config_file(const std::string& path);
std::string     read_file(const std::string& path); ///< throws std::runtime_error

} // namespace ovsim
