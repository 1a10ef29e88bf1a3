#pragma once

// Helpers for tests that drive whole scenarios from inline config text.

#include "ovsim/scenario.h"

#include <optional>
#include <string_view>

namespace testutil {

inline ovsim::scenario_result run(std::string_view cfg, std::optional<std::uint64_t> seed = std::nullopt)
{
  return ovsim::run_scenario(ovsim::load_config(cfg), seed);
}

inline std::vector<ovsim::event> select(const std::vector<ovsim::event>& log, std::string_view filter)
{
  const auto                 f = ovsim::event_filter::parse(filter);
  std::vector<ovsim::event> out;
  for (const auto& e : log) {
    if (f.matches(e)) {
      out.push_back(e);
    }
  }
  return out;
}

inline std::size_t count(const std::vector<ovsim::event>& log, std::string_view filter)
{
  return select(log, filter).size();
}

inline std::optional<ovsim::event> first(const std::vector<ovsim::event>& log, std::string_view filter)
{
  auto v = select(log, filter);
  if (v.empty()) {
    return std::nullopt;
  }
  return v.front();
}

} // namespace testutil
