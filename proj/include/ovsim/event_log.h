#pragma once

// Structured scenario log. One line per event:
//   t=<ms> f=<frame> sf=<subframe> node=<name> kind=<kind> key=value ...
// Values are percent-escaped (space, '=', '%', control bytes) so a line
// splits on spaces unambiguously.

#include "ovsim/time.h"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ovsim {

class log_format_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct event {
  std::uint64_t                                    tti = 0;
  std::string                                      node;
  std::string                                      kind;
  std::vector<std::pair<std::string, std::string>> fields;

  std::optional<std::string_view> get(std::string_view key) const;
  /// Numeric field (decimal or 0x-hex); nullopt when absent or not numeric.
  std::optional<double> number(std::string_view key) const;
  subframe_time         at() const { return subframe_time::from_index(tti); }
};

std::string escape_value(std::string_view v);
std::string unescape_value(std::string_view v);

std::string format_event(const event& e);
/// Throws log_format_error on a line missing t/node/kind or with a bad token.
event              parse_event_line(std::string_view line);
std::vector<event> parse_log(std::string_view text);

class event_log
{
public:
  class builder
  {
  public:
    builder(event_log& log, std::size_t index) : log_(log), index_(index) {}
    builder& add(std::string key, std::string value);
    builder& add(std::string key, const char* value) { return add(std::move(key), std::string(value)); }
    builder& add(std::string key, bool value) { return add(std::move(key), std::string(value ? "1" : "0")); }
    builder& add(std::string key, double value);
    template <typename T, typename = std::enable_if_t<std::is_integral_v<T>>>
    builder& add(std::string key, T value)
    {
      return add(std::move(key), std::to_string(value));
    }
    builder& hex(std::string key, std::uint64_t value, int width = 8);

  private:
    event_log&  log_;
    std::size_t index_;
  };

  builder emit(std::uint64_t tti, std::string node, std::string kind);

  const std::vector<event>& events() const { return events_; }
  std::size_t               size() const { return events_.size(); }
  std::string               render() const;

  /// Per-slot PHY outcomes are verbose; off unless requested.
  bool phy_enabled = false;

private:
  std::vector<event> events_;
};

/// Fixed-precision rendering used for all floating-point log values.
std::string format_double(double v, int decimals = 2);

} // namespace ovsim
