#include "ovsim/event_log.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ovsim {

namespace {

bool needs_escape(char c)
{
  return c == ' ' || c == '=' || c == '%' || static_cast<unsigned char>(c) < 0x20 || c == 0x7f;
}

std::optional<std::uint64_t> parse_u64(std::string_view s)
{
  std::uint64_t v   = 0;
  auto [ptr, ec]    = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

} // namespace

std::optional<std::string_view> event::get(std::string_view key) const
{
  for (const auto& [k, v] : fields) {
    if (k == key) {
      return std::string_view(v);
    }
  }
  return std::nullopt;
}

std::optional<double> event::number(std::string_view key) const
{
  auto v = get(key);
  if (!v || v->empty()) {
    return std::nullopt;
  }
  std::string s(*v);
  char*       end = nullptr;
  double      d   = 0.0;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    d = static_cast<double>(std::strtoull(s.c_str() + 2, &end, 16));
  } else {
    d = std::strtod(s.c_str(), &end);
  }
  if (end != s.c_str() + s.size()) {
    return std::nullopt;
  }
  return d;
}

std::string escape_value(std::string_view v)
{
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    if (needs_escape(c)) {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned char>(c));
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_value(std::string_view v)
{
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '%') {
      out.push_back(v[i]);
      continue;
    }
    if (i + 2 >= v.size()) {
      throw log_format_error("truncated escape in value");
    }
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(v.data() + i + 1, v.data() + i + 3, value, 16);
    if (ec != std::errc() || ptr != v.data() + i + 3) {
      throw log_format_error("bad escape in value");
    }
    out.push_back(static_cast<char>(value));
    i += 2;
  }
  return out;
}

std::string format_double(double v, int decimals)
{
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0" || s == "-0") {
    s.erase(0, 1);
  }
  return s;
}

std::string format_event(const event& e)
{
  const auto  t = e.at();
  std::string line;
  line.reserve(64 + e.fields.size() * 16);
  line += "t=" + std::to_string(e.tti);
  line += " f=" + std::to_string(t.frame);
  line += " sf=" + std::to_string(t.subframe);
  line += " node=" + escape_value(e.node);
  line += " kind=" + escape_value(e.kind);
  for (const auto& [k, v] : e.fields) {
    line += ' ';
    line += k;
    line += '=';
    line += escape_value(v);
  }
  return line;
}

event parse_event_line(std::string_view line)
{
  event ev;
  bool  have_t = false, have_node = false, have_kind = false;
  while (!line.empty()) {
    const auto sp    = line.find(' ');
    const auto token = line.substr(0, sp);
    line             = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    if (token.empty()) {
      continue;
    }
    const auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw log_format_error("token without key=value: '" + std::string(token) + "'");
    }
    const auto key   = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "t") {
      auto v = parse_u64(value);
      if (!v) {
        throw log_format_error("bad time value '" + std::string(value) + "'");
      }
      ev.tti = *v;
      have_t = true;
    } else if (key == "f" || key == "sf") {
      // Derived from t; accepted and ignored.
    } else if (key == "node") {
      ev.node   = unescape_value(value);
      have_node = true;
    } else if (key == "kind") {
      ev.kind   = unescape_value(value);
      have_kind = true;
    } else {
      ev.fields.emplace_back(std::string(key), unescape_value(value));
    }
  }
  if (!have_t || !have_node || !have_kind) {
    throw log_format_error("event line lacks t=, node= or kind=");
  }
  return ev;
}

std::vector<event> parse_log(std::string_view text)
{
  std::vector<event> out;
  std::size_t        line_no = 0;
  while (!text.empty()) {
    const auto nl   = text.find('\n');
    auto       line = text.substr(0, nl);
    text            = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    try {
      out.push_back(parse_event_line(line));
    } catch (const log_format_error& e) {
      throw log_format_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

event_log::builder& event_log::builder::add(std::string key, std::string value)
{
  log_.events_[index_].fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

event_log::builder& event_log::builder::add(std::string key, double value)
{
  return add(std::move(key), format_double(value));
}

event_log::builder& event_log::builder::hex(std::string key, std::uint64_t value, int width)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%0*llx", width, static_cast<unsigned long long>(value));
  return add(std::move(key), std::string(buf));
}

event_log::builder event_log::emit(std::uint64_t tti, std::string node, std::string kind)
{
  events_.push_back(event{tti, std::move(node), std::move(kind), {}});
  return builder(*this, events_.size() - 1);
}

std::string event_log::render() const
{
  std::string out;
  for (const auto& e : events_) {
    out += format_event(e);
    out += '\n';
  }
  return out;
}

} // namespace ovsim
