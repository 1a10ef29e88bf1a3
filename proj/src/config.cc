#include "ovsim/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ovsim {

config_error::config_error(const std::string& msg, int line, std::string field) :
  std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + (field.empty() ? "" : field + ": ") + msg
                              : (field.empty() ? "" : field + ": ") + msg),
  line_(line),
  field_(std::move(field))
{
}

namespace {

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_list(std::string_view s, char sep = ',')
{
  std::vector<std::string> out;
  if (trim(s).empty()) {
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s)
{
  s = trim(s);
  std::string tmp(s);
  std::size_t used = 0;
  double      v    = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + tmp + "'");
  }
  if (used != tmp.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + tmp + "'");
  }
  return v;
}

std::uint64_t to_uint(std::string_view s)
{
  s = trim(s);
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v   = 0;
  const auto    res = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

template <typename T>
T to_bounded(std::string_view s, std::uint64_t max)
{
  const auto v = to_uint(s);
  if (v > max) {
    throw std::invalid_argument("value " + std::to_string(v) + " exceeds " + std::to_string(max));
  }
  return static_cast<T>(v);
}

bool to_bool(std::string_view s)
{
  s = trim(s);
  if (s == "true" || s == "yes" || s == "on" || s == "1") {
    return true;
  }
  if (s == "false" || s == "no" || s == "off" || s == "0") {
    return false;
  }
  throw std::invalid_argument("expected a boolean, got '" + std::string(s) + "'");
}

phy::position to_position(std::string_view s)
{
  const auto parts = split_list(s);
  if (parts.size() == 1) {
    return {to_double(parts[0]), 0.0}; // on the x axis, handy for sweeps
  }
  if (parts.size() != 2) {
    throw std::invalid_argument("expected 'x,y' in metres");
  }
  return {to_double(parts[0]), to_double(parts[1])};
}

std::string to_imsi(std::string_view s)
{
  std::string v(trim(s));
  if (!codec::is_valid_imsi(v)) {
    throw std::invalid_argument("IMSI must be 15 decimal digits");
  }
  return v;
}

using setter = std::function<void(const std::string&)>;

void apply(const raw_section& sec, const std::map<std::string, setter>& schema)
{
  for (const auto& e : sec.entries) {
    auto it = schema.find(e.key);
    if (it == schema.end()) {
      throw config_error("unknown key", e.line, sec.name.empty() ? e.key : sec.name + "." + e.key);
    }
    try {
      it->second(e.value);
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& ex) {
      throw config_error(ex.what(), e.line, sec.name.empty() ? e.key : sec.name + "." + e.key);
    }
  }
}

void require(const raw_section& sec, std::initializer_list<const char*> keys)
{
  for (const char* k : keys) {
    if (sec.find(k) == nullptr) {
      throw config_error("missing required key", sec.line, sec.name + "." + k);
    }
  }
}

// Counts are plain numbers; delays may carry a duration unit.
double to_bound(const std::string& v)
{
  if (v.find_first_not_of("0123456789.-") == std::string::npos) {
    return to_double(v);
  }
  return static_cast<double>(parse_duration(v));
}

std::optional<ue_state> parse_state(std::string_view s)
{
  for (int i = 0; i <= static_cast<int>(ue_state::retry_backoff); ++i) {
    const auto st = static_cast<ue_state>(i);
    if (s == to_string(st)) {
      return st;
    }
  }
  return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------
// Raw layer

const raw_entry* raw_section::find(std::string_view key) const
{
  for (const auto& e : entries) {
    if (e.key == key) {
      return &e;
    }
  }
  return nullptr;
}

raw_config parse_raw_config(std::string_view text)
{
  raw_config cfg;
  cfg.sections.push_back(raw_section{"", 0, {}});
  std::set<std::string> seen{""};
  int                   line_no = 0;
  std::size_t           pos     = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    auto       l   = text.substr(pos, end - pos);
    pos            = end + 1;
    ++line_no;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) {
      l = l.substr(0, hash);
    }
    l = trim(l);
    if (l.empty()) {
      if (end == text.size()) {
        break;
      }
      continue;
    }
    if (l.front() == '[') {
      if (l.back() != ']') {
        throw config_error("unterminated section header", line_no, "");
      }
      std::string name(trim(l.substr(1, l.size() - 2)));
      if (name.empty()) {
        throw config_error("empty section name", line_no, "");
      }
      if (!seen.insert(name).second) {
        throw config_error("duplicate section", line_no, name);
      }
      cfg.sections.push_back(raw_section{name, line_no, {}});
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("expected 'key = value'", line_no, "");
    }
    raw_entry e{std::string(trim(l.substr(0, eq))), std::string(trim(l.substr(eq + 1))), line_no};
    if (e.key.empty()) {
      throw config_error("empty key", line_no, "");
    }
    auto& sec = cfg.sections.back();
    if (sec.find(e.key) != nullptr) {
      throw config_error("duplicate key", line_no, sec.name.empty() ? e.key : sec.name + "." + e.key);
    }
    sec.entries.push_back(std::move(e));
  }
  return cfg;
}

void raw_config::set(const std::string& path, const std::string& value)
{
  std::string section;
  std::string key = path;
  if (const auto dot = path.rfind('.'); dot != std::string::npos) {
    section = path.substr(0, dot);
    key     = path.substr(dot + 1);
  }
  for (auto& s : sections) {
    if (s.name != section) {
      continue;
    }
    for (auto& e : s.entries) {
      if (e.key == key) {
        e.value = value;
        return;
      }
    }
    s.entries.push_back(raw_entry{key, value, 0});
    return;
  }
  throw config_error("no such section", 0, section);
}

std::string raw_config::render() const
{
  std::ostringstream os;
  for (const auto& s : sections) {
    if (!s.name.empty()) {
      os << "\n[" << s.name << "]\n";
    }
    for (const auto& e : s.entries) {
      os << e.key << " = " << e.value << "\n";
    }
  }
  return os.str();
}

sim_ms parse_duration(std::string_view s)
{
  s = trim(s);
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
    ++i;
  }
  if (i == 0) {
    throw std::invalid_argument("expected a duration, got '" + std::string(s) + "'");
  }
  const double v    = to_double(s.substr(0, i));
  const auto   unit = trim(s.substr(i));
  double       ms   = 0.0;
  if (unit.empty() || unit == "ms") {
    ms = v;
  } else if (unit == "s") {
    ms = v * k_second_ms;
  } else if (unit == "min") {
    ms = v * k_minute_ms;
  } else if (unit == "h") {
    ms = v * k_hour_ms;
  } else {
    throw std::invalid_argument("unknown duration unit '" + std::string(unit) + "'");
  }
  if (ms != std::floor(ms)) {
    throw std::invalid_argument("duration must be a whole number of milliseconds");
  }
  return static_cast<sim_ms>(ms);
}

// ---------------------------------------------------------------------------
// Event filters

event_filter event_filter::parse(std::string_view text)
{
  event_filter f;
  f.text_ = std::string(trim(text));
  std::istringstream is(f.text_);
  std::string        tok;
  if (!(is >> tok)) {
    throw std::invalid_argument("empty event filter");
  }
  if (tok.find_first_of("=<>!~") != std::string::npos) {
    throw std::invalid_argument("event filter must start with an event kind");
  }
  f.kind_ = tok;
  while (is >> tok) {
    static const std::pair<const char*, op> ops[] = {{">=", op::ge}, {"<=", op::le}, {"!=", op::ne},
                                                     {"=", op::eq},  {"~", op::contains}, {">", op::gt},
                                                     {"<", op::lt}};
    bool ok = false;
    for (const auto& [sym, o] : ops) {
      const auto p = tok.find(sym);
      if (p == std::string::npos || p == 0) {
        continue;
      }
      condition c{tok.substr(0, p), o, unescape_value(tok.substr(p + std::char_traits<char>::length(sym)))};
      if (c.key.find_first_of("=<>!~") != std::string::npos) {
        continue;
      }
      if (o != op::eq && o != op::ne && o != op::contains) {
        to_double(c.value);
      }
      f.conds_.push_back(std::move(c));
      ok = true;
      break;
    }
    if (!ok) {
      throw std::invalid_argument("bad filter condition '" + tok + "'");
    }
  }
  return f;
}

bool event_filter::matches(const event& e) const
{
  if (kind_ != "*" && e.kind != kind_) {
    return false;
  }
  for (const auto& c : conds_) {
    std::optional<std::string_view> v;
    if (c.key == "node") {
      v = e.node;
    } else if (c.key == "t") {
      static thread_local std::string t;
      t = std::to_string(e.tti);
      v = t;
    } else if (c.key == "sf") {
      static thread_local std::string sf;
      sf = std::to_string(e.tti % 10);
      v  = sf;
    } else {
      v = e.get(c.key);
    }
    if (c.o == op::eq || c.o == op::ne) {
      const bool eq = v && *v == c.value;
      if ((c.o == op::eq) != eq) {
        return false;
      }
      continue;
    }
    if (!v) {
      return false;
    }
    if (c.o == op::contains) {
      if (v->find(c.value) == std::string_view::npos) {
        return false;
      }
      continue;
    }
    event probe{0, "", "", {{"v", std::string(*v)}}};
    const auto num = probe.number("v");
    if (!num) {
      return false;
    }
    const double rhs = std::stod(c.value);
    const bool   ok  = (c.o == op::ge && *num >= rhs) || (c.o == op::le && *num <= rhs) ||
                    (c.o == op::gt && *num > rhs) || (c.o == op::lt && *num < rhs);
    if (!ok) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Typed layer

scenario_config build_config(const raw_config& raw)
{
  scenario_config cfg;
  bool            have_seed = false;
  std::set<std::string> names;
  auto claim = [&](const std::string& name, int line) {
    if (!names.insert(name).second) {
      throw config_error("node name already used", line, name);
    }
  };

  for (const auto& sec : raw.sections) {
    const auto dot    = sec.name.find('.');
    const auto prefix = sec.name.substr(0, dot);
    const auto name   = dot == std::string::npos ? std::string() : sec.name.substr(dot + 1);
    const bool named  = dot != std::string::npos;
    if (named && name.empty()) {
      throw config_error("section needs a name after '.'", sec.line, sec.name);
    }

    if (sec.name.empty()) {
      apply(sec, {
                     {"seed", [&](const std::string& v) { cfg.seed = to_uint(v); have_seed = true; }},
                     {"horizon", [&](const std::string& v) { cfg.horizon = parse_duration(v); }},
                 });
    } else if (sec.name == "channel") {
      auto& c = cfg.channel;
      apply(sec, {
                     {"path_loss_exponent", [&](const std::string& v) { c.path_loss_exponent = to_double(v); }},
                     {"reference_loss_db", [&](const std::string& v) { c.reference_loss_db = to_double(v); }},
                     {"capture_margin_db", [&](const std::string& v) { c.capture_margin_db = to_double(v); }},
                     {"timing_tolerance_us", [&](const std::string& v) { c.timing_tolerance_us = to_double(v); }},
                     {"prach_window_us", [&](const std::string& v) { c.prach_window_us = to_double(v); }},
                 });
    } else if (sec.name == "enb") {
      auto& e = cfg.enb;
      apply(sec, {
                     {"position", [&](const std::string& v) { cfg.enb_pos = to_position(v); }},
                     {"tx_power_dbm", [&](const std::string& v) { e.tx_power_dbm = to_double(v); }},
                     {"target_rx_dbm", [&](const std::string& v) { e.target_rx_dbm = to_double(v); }},
                     {"grant_period", [&](const std::string& v) { e.grant_period = parse_duration(v); }},
                     {"grant_bytes", [&](const std::string& v) { e.grant_bytes = to_bounded<std::uint16_t>(v, 0xffff); }},
                     {"inactivity", [&](const std::string& v) { e.inactivity = parse_duration(v); }},
                     {"msg3_timeout", [&](const std::string& v) { e.msg3_timeout = parse_duration(v); }},
                     {"rnti_first", [&](const std::string& v) { e.rnti_first = to_bounded<std::uint16_t>(v, 0xffff); }},
                     {"rnti_last", [&](const std::string& v) { e.rnti_last = to_bounded<std::uint16_t>(v, 0xffff); }},
                     {"ta_loop", [&](const std::string& v) { e.ta_loop = to_bool(v); }},
                     {"background_paging_rate", [&](const std::string& v) { e.background_paging_rate = to_double(v); }},
                     {"background_population",
                      [&](const std::string& v) { e.background_population = to_bounded<std::uint32_t>(v, 0xffffffffu); }},
                 });
    } else if (sec.name == "mme") {
      auto& m = cfg.mme;
      apply(sec, {
                     {"blocked_imsis", [&](const std::string& v) { m.blocked_imsis = split_list(v); }},
                     {"tmsi_reallocation",
                      [&](const std::string& v) {
                        if (v == "never") {
                          m.tmsi_reallocation = tmsi_policy::never;
                        } else if (v == "on_attach") {
                          m.tmsi_reallocation = tmsi_policy::on_attach;
                        } else {
                          throw std::invalid_argument("expected never or on_attach");
                        }
                      }},
                     {"sms_latency_min", [&](const std::string& v) { m.sms_latency_min = parse_duration(v); }},
                     {"sms_latency_max", [&](const std::string& v) { m.sms_latency_max = parse_duration(v); }},
                     {"extra_subscribers",
                      [&](const std::string& v) {
                        for (const auto& imsi : split_list(v)) {
                          subscriber_config s;
                          s.imsi = to_imsi(imsi);
                          m.subscribers.push_back(s);
                        }
                      }},
                 });
    } else if (sec.name == "hardening") {
      auto& h = cfg.mme.hardening;
      apply(sec, {
                     {"establishment_cause_check", [&](const std::string& v) { h.establishment_cause_check = to_bool(v); }},
                     {"silent_drop_invalid_service_mac",
                      [&](const std::string& v) { h.silent_drop_invalid_service_mac = to_bool(v); }},
                     {"decoy_trap", [&](const std::string& v) { h.decoy_trap = to_bool(v); }},
                     {"never_send_persistent_rejects",
                      [&](const std::string& v) { h.never_send_persistent_rejects = to_bool(v); }},
                     {"decoy_start", [&](const std::string& v) { h.decoy_start = parse_duration(v); }},
                     {"decoy_interval", [&](const std::string& v) { h.decoy_interval = parse_duration(v); }},
                     {"decoy_window", [&](const std::string& v) { h.decoy_window = parse_duration(v); }},
                 });
      if (h.decoy_interval <= 0 || h.decoy_window <= 0) {
        throw config_error("decoy interval and window must be positive", sec.line, sec.name);
      }
    } else if (prefix == "ue" && named) {
      claim(name, sec.line);
      require(sec, {"imsi"});
      ue_spec u;
      u.name = name;
      auto& c = u.cfg;
      apply(sec, {
                     {"imsi", [&](const std::string& v) { c.imsi = to_imsi(v); }},
                     {"profile", [&](const std::string& v) { find_profile(v); c.profile = v; }},
                     {"position", [&](const std::string& v) { u.pos = to_position(v); }},
                     {"capabilities", [&](const std::string& v) { c.capabilities = to_bounded<std::uint32_t>(v, 0xffffffffu); }},
                     {"tmsi", [&](const std::string& v) { c.tmsi = to_bounded<std::uint32_t>(v, 0xffffffffu); }},
                     {"registered", [&](const std::string& v) { c.registered = to_bool(v); }},
                     {"subscribed", [&](const std::string& v) { u.subscribed = to_bool(v); }},
                     {"power_on",
                      [&](const std::string& v) {
                        u.power_on_at = v == "never" ? -1 : parse_duration(v);
                      }},
                     {"target_rx_dbm", [&](const std::string& v) { c.target_rx_dbm = to_double(v); }},
                     {"p_max_dbm", [&](const std::string& v) { c.p_max_dbm = to_double(v); }},
                     {"pl_error_db", [&](const std::string& v) { c.pl_error_db = to_double(v); }},
                     {"max_prach_attempts", [&](const std::string& v) { c.max_prach_attempts = to_bounded<unsigned>(v, 100); }},
                     {"rar_window", [&](const std::string& v) { c.rar_window = parse_duration(v); }},
                     {"contention_window", [&](const std::string& v) { c.contention_window = parse_duration(v); }},
                     {"t3410", [&](const std::string& v) { c.t3410 = parse_duration(v); }},
                     {"t3411", [&](const std::string& v) { c.t3411 = parse_duration(v); }},
                     {"t3402", [&](const std::string& v) { c.t3402 = parse_duration(v); }},
                     {"t3417", [&](const std::string& v) { c.t3417 = parse_duration(v); }},
                     {"max_attach_attempts", [&](const std::string& v) { c.max_attach_attempts = to_bounded<unsigned>(v, 100); }},
                 });
      if (c.registered && !c.tmsi) {
        throw config_error("registered UE needs a tmsi", sec.line, sec.name);
      }
      try {
        c.validate();
      } catch (const std::invalid_argument& e) {
        throw config_error(e.what(), sec.line, sec.name);
      }
      cfg.ues.push_back(std::move(u));
    } else if (prefix == "attacker" && named) {
      claim(name, sec.line);
      require(sec, {"kind"});
      attacker_spec a;
      a.name      = name;
      auto& p     = a.plan;
      auto& inter = p.intersection;
      apply(sec, {
                     {"kind",
                      [&](const std::string& v) {
                        const auto k = parse_attack_kind(v);
                        if (!k) {
                          throw std::invalid_argument("unknown attack kind '" + v + "'");
                        }
                        p.kind = *k;
                      }},
                     {"position", [&](const std::string& v) { a.pos = to_position(v); }},
                     {"targets", [](const std::string&) {}},
                     {"whitelist", [](const std::string&) {}},
                     {"tx_power_dbm", [&](const std::string& v) { p.tx_power_dbm = to_double(v); }},
                     {"static_ta_us", [&](const std::string& v) { p.static_ta_us = to_double(v); }},
                     {"timing_offset_us", [&](const std::string& v) { p.timing_offset_us = to_double(v); }},
                     {"rlc_delta_max", [&](const std::string& v) { p.rlc_delta_max = to_bounded<unsigned>(v, 1023); }},
                     {"blocked_imsi", [&](const std::string& v) { p.blocked_imsi = to_imsi(v); }},
                     {"stacks", [&](const std::string& v) { p.stacks = to_bounded<unsigned>(v, 1024); }},
                     {"service_reject_cause",
                      [&](const std::string& v) { p.service_reject_cause = to_bounded<std::uint8_t>(v, 255); }},
                     {"dos_duration", [&](const std::string& v) { p.dos_duration = parse_duration(v); }},
                     {"stack_hold", [&](const std::string& v) { p.stack_hold = parse_duration(v); }},
                     {"max_tracked", [&](const std::string& v) { p.max_tracked = to_bounded<unsigned>(v, 65535); }},
                     {"phone_target", [&](const std::string& v) { inter.phone_target = v; }},
                     {"max_sms", [&](const std::string& v) { inter.max_sms = to_bounded<unsigned>(v, 10000); }},
                     {"sms_gap_min", [&](const std::string& v) { inter.gap_min = parse_duration(v); }},
                     {"sms_gap_max", [&](const std::string& v) { inter.gap_max = parse_duration(v); }},
                     {"window_start", [&](const std::string& v) { inter.window_start = parse_duration(v); }},
                     {"window_end", [&](const std::string& v) { inter.window_end = parse_duration(v); }},
                     {"margin", [&](const std::string& v) { inter.margin = to_bounded<unsigned>(v, 10000); }},
                     {"start", [&](const std::string& v) { inter.start = parse_duration(v); }},
                     {"stop_when_done", [&](const std::string& v) { inter.stop_when_done = to_bool(v); }},
                 });
      // TMSI lists may name UEs; they are resolved once every UE section is read.
      cfg.attackers.push_back(std::move(a));
    } else if (prefix == "action" && named) {
      require(sec, {"at", "type", "target"});
      action_spec a;
      a.name = name;
      a.line = sec.line;
      apply(sec, {
                     {"at", [&](const std::string& v) { a.at = parse_duration(v); }},
                     {"type",
                      [&](const std::string& v) {
                        if (v == "power_on") {
                          a.type = action_type::power_on;
                        } else if (v == "user_reset") {
                          a.type = action_type::user_reset;
                        } else if (v == "start_data") {
                          a.type = action_type::start_data;
                        } else if (v == "send_sms") {
                          a.type = action_type::send_sms;
                        } else {
                          throw std::invalid_argument("unknown action type '" + v + "'");
                        }
                      }},
                     {"target", [&](const std::string& v) { a.target = v; }},
                     {"silent", [&](const std::string& v) { a.silent = to_bool(v); }},
                 });
      cfg.actions.push_back(std::move(a));
    } else if (prefix == "assert" && named) {
      require(sec, {"type"});
      assertion_spec a;
      a.name = name;
      a.line = sec.line;
      apply(sec, {
                     {"type",
                      [&](const std::string& v) {
                        static const std::map<std::string, assertion_type> types = {
                            {"state_at", assertion_type::state_at},
                            {"event_exists", assertion_type::event_exists},
                            {"event_absent", assertion_type::event_absent},
                            {"event_count", assertion_type::event_count},
                            {"delay_between", assertion_type::delay_between}};
                        auto it = types.find(v);
                        if (it == types.end()) {
                          throw std::invalid_argument("unknown assertion type '" + v + "'");
                        }
                        a.type = it->second;
                      }},
                     {"ue", [&](const std::string& v) { a.ue = v; }},
                     {"at", [&](const std::string& v) { a.at = parse_duration(v); }},
                     {"state",
                      [&](const std::string& v) {
                        a.states = split_list(v, '|');
                        for (const auto& s : a.states) {
                          if (!parse_state(s)) {
                            throw std::invalid_argument("unknown UE state '" + s + "'");
                          }
                        }
                      }},
                     {"match", [&](const std::string& v) { a.match = event_filter::parse(v); }},
                     {"from", [&](const std::string& v) { a.from = event_filter::parse(v); }},
                     {"to", [&](const std::string& v) { a.to = event_filter::parse(v); }},
                     {"min", [&](const std::string& v) { a.min = to_bound(v); }},
                     {"max", [&](const std::string& v) { a.max = to_bound(v); }},
                 });
      switch (a.type) {
      case assertion_type::state_at: require(sec, {"ue", "at", "state"}); break;
      case assertion_type::event_exists:
      case assertion_type::event_absent: require(sec, {"match"}); break;
      case assertion_type::event_count:
        require(sec, {"match"});
        if (!a.min && !a.max) {
          throw config_error("event_count needs min and/or max", sec.line, sec.name);
        }
        break;
      case assertion_type::delay_between:
        require(sec, {"from", "to"});
        if (!a.min && !a.max) {
          throw config_error("delay_between needs min and/or max", sec.line, sec.name);
        }
        break;
      }
      cfg.assertions.push_back(std::move(a));
    } else if (sec.name == "log") {
      apply(sec, {{"phy", [&](const std::string& v) { cfg.log_phy = to_bool(v); }}});
    } else if (sec.name == "metrics") {
      for (const auto& e : sec.entries) {
        try {
          cfg.metrics.emplace_back(e.key, event_filter::parse(e.value));
        } catch (const std::invalid_argument& ex) {
          throw config_error(ex.what(), e.line, "metrics." + e.key);
        }
      }
    } else {
      throw config_error("unknown section", sec.line, sec.name);
    }
  }

  if (!have_seed) {
    throw config_error("missing required key", 1, "seed");
  }
  if (cfg.horizon < 0) {
    throw config_error("horizon must be non-negative", 1, "horizon");
  }
  try {
    cfg.channel.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what(), 0, "channel");
  }

  // Resolve names used by attackers, actions and assertions.
  auto find_ue = [&](const std::string& n) -> const ue_spec* {
    for (const auto& u : cfg.ues) {
      if (u.name == n) {
        return &u;
      }
    }
    return nullptr;
  };
  auto resolve_tmsis = [&](const std::string& list, const std::string& field, int line) {
    std::set<std::uint32_t> out;
    for (const auto& t : split_list(list)) {
      if (const auto* u = find_ue(t)) {
        if (!u->cfg.tmsi) {
          throw config_error("UE '" + t + "' has no configured tmsi", line, field);
        }
        out.insert(*u->cfg.tmsi);
        continue;
      }
      try {
        out.insert(to_bounded<std::uint32_t>(t, 0xffffffffu));
      } catch (const std::invalid_argument&) {
        throw config_error("expected a UE name or TMSI, got '" + t + "'", line, field);
      }
    }
    return out;
  };
  for (std::size_t i = 0; i < cfg.attackers.size(); ++i) {
    auto&       a   = cfg.attackers[i];
    const auto* sec = [&]() -> const raw_section* {
      for (const auto& s : raw.sections) {
        if (s.name == "attacker." + a.name) {
          return &s;
        }
      }
      return nullptr;
    }();
    if (const auto* t = sec->find("targets"); t && t->value != "all") {
      a.plan.targets = resolve_tmsis(t->value, sec->name + ".targets", t->line);
    }
    if (const auto* w = sec->find("whitelist")) {
      a.plan.whitelist = resolve_tmsis(w->value, sec->name + ".whitelist", w->line);
    }
    if (a.plan.kind == attack_kind::tmsi_intersection) {
      if (const auto* u = find_ue(a.plan.intersection.phone_target)) {
        a.plan.intersection.phone_target = u->cfg.imsi;
      }
    }
    try {
      a.plan.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what(), sec->line, sec->name);
    }
  }
  for (const auto& a : cfg.actions) {
    if (find_ue(a.target) == nullptr) {
      throw config_error("unknown UE '" + a.target + "'", a.line, "action." + a.name + ".target");
    }
  }
  for (const auto& a : cfg.assertions) {
    if (a.type == assertion_type::state_at && find_ue(a.ue) == nullptr) {
      throw config_error("unknown UE '" + a.ue + "'", a.line, "assert." + a.name + ".ue");
    }
  }

  for (const auto& u : cfg.ues) {
    if (!u.subscribed) {
      continue;
    }
    subscriber_config s;
    s.imsi         = u.cfg.imsi;
    s.capabilities = u.cfg.capabilities;
    s.key          = u.cfg.key;
    if (u.cfg.registered) {
      s.tmsi = u.cfg.tmsi;
    }
    cfg.mme.subscribers.push_back(s);
  }
  return cfg;
}

scenario_config load_config(std::string_view text)
{
  return build_config(parse_raw_config(text));
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

scenario_config load_config_file(const std::string& path)
{
  return load_config(read_file(path));
}

} // namespace ovsim
