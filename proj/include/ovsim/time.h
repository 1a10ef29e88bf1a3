#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ovsim {

/// Simulated duration in milliseconds (one subframe = 1 ms).
using sim_ms = std::int64_t;

constexpr sim_ms k_second_ms = 1000;
constexpr sim_ms k_minute_ms = 60 * k_second_ms;
constexpr sim_ms k_hour_ms = 60 * k_minute_ms;

/// LTE subframe clock: frames of ten 1 ms subframes. The frame counter does
/// not wrap (no 1024-frame SFN cycle), so the clock is a total order.
struct subframe_time {
  std::uint64_t frame = 0;
  std::uint8_t subframe = 0;

  static constexpr subframe_time from_index(std::uint64_t ms)
  {
    return {ms / 10, static_cast<std::uint8_t>(ms % 10)};
  }

  constexpr std::uint64_t index() const { return frame * 10 + subframe; }

  constexpr subframe_time next() const
  {
    return subframe == 9 ? subframe_time{frame + 1, 0}
                         : subframe_time{frame, static_cast<std::uint8_t>(subframe + 1)};
  }

  /// Shift by a (possibly negative) number of subframes, clamped at zero.
  constexpr subframe_time plus(sim_ms ms) const
  {
    const std::int64_t idx = static_cast<std::int64_t>(index()) + ms;
    return from_index(idx < 0 ? 0 : static_cast<std::uint64_t>(idx));
  }

  friend constexpr auto operator<=>(const subframe_time&, const subframe_time&) = default;
};

inline std::string to_string(subframe_time t)
{
  return std::to_string(t.frame) + "." + std::to_string(t.subframe);
}

} // namespace ovsim
