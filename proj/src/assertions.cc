#include "ovsim/scenario.h"

#include <algorithm>

namespace ovsim {

const char* to_string(assertion_status s)
{
  switch (s) {
  case assertion_status::pass: return "PASS";
  case assertion_status::fail: return "FAIL";
  case assertion_status::skipped: return "SKIP";
  }
  return "?";
}

ue_state state_at(const std::vector<event>& log, const std::string& ue, std::uint64_t tti)
{
  std::string_view last = to_string(ue_state::powered_off);
  for (const auto& e : log) {
    if (e.tti > tti) {
      break;
    }
    if (e.node == ue && e.kind == "ue_state") {
      if (auto s = e.get("state")) {
        last = *s;
      }
    }
  }
  for (int i = 0; i <= static_cast<int>(ue_state::retry_backoff); ++i) {
    if (last == to_string(static_cast<ue_state>(i))) {
      return static_cast<ue_state>(i);
    }
  }
  throw log_format_error("unknown UE state '" + std::string(last) + "' in log");
}

namespace {

std::string where(const event& e)
{
  return "t=" + std::to_string(e.tti) + " node=" + e.node + " kind=" + e.kind;
}

bool within(double v, const assertion_spec& a)
{
  return (!a.min || v >= *a.min) && (!a.max || v <= *a.max);
}

std::string bounds(const assertion_spec& a)
{
  std::string s = "[";
  s += a.min ? format_double(*a.min) : "-inf";
  s += ", ";
  s += a.max ? format_double(*a.max) : "inf";
  return s + "]";
}

} // namespace

assertion_result evaluate_assertion(const assertion_spec& a, const std::vector<event>& log)
{
  assertion_result r{a.name, assertion_status::fail, ""};
  auto set = [&](bool ok, std::string detail) {
    r.status = ok ? assertion_status::pass : assertion_status::fail;
    r.detail = std::move(detail);
    return r;
  };

  switch (a.type) {
  case assertion_type::state_at: {
    const auto st = to_string(state_at(log, a.ue, static_cast<std::uint64_t>(a.at)));
    const bool ok = std::find(a.states.begin(), a.states.end(), st) != a.states.end();
    return set(ok, a.ue + " at t=" + std::to_string(a.at) + " was " + st);
  }
  case assertion_type::event_exists:
  case assertion_type::event_absent: {
    const auto it     = std::find_if(log.begin(), log.end(), [&](const event& e) { return a.match.matches(e); });
    const bool found  = it != log.end();
    const bool wanted = a.type == assertion_type::event_exists;
    return set(found == wanted, found ? "first match " + where(*it) : "no match for '" + a.match.text() + "'");
  }
  case assertion_type::event_count: {
    const auto n = std::count_if(log.begin(), log.end(), [&](const event& e) { return a.match.matches(e); });
    return set(within(static_cast<double>(n), a), std::to_string(n) + " matches, expected " + bounds(a));
  }
  case assertion_type::delay_between: {
    const auto from = std::find_if(log.begin(), log.end(), [&](const event& e) { return a.from.matches(e); });
    if (from == log.end()) {
      return set(false, "no event matches '" + a.from.text() + "'");
    }
    const auto to = std::find_if(from + 1, log.end(), [&](const event& e) { return a.to.matches(e); });
    if (to == log.end()) {
      return set(false, "no event matches '" + a.to.text() + "' after t=" + std::to_string(from->tti));
    }
    const auto delay = static_cast<double>(to->tti - from->tti);
    return set(within(delay, a), "delay " + format_double(delay) + " ms, expected " + bounds(a));
  }
  }
  return r;
}

} // namespace ovsim
