#include "ovsim/intersection.h"

#include <algorithm>
#include <stdexcept>

namespace ovsim {

intersection_ledger::intersection_ledger(sim_ms window_start, sim_ms window_end) :
  window_start_(window_start), window_end_(window_end)
{
  if (window_start < 0 || window_end < window_start) {
    throw std::invalid_argument("correlation window must satisfy 0 <= start <= end");
  }
}

void intersection_ledger::sms_sent(std::uint64_t tti)
{
  if (!sends_.empty() && tti < sends_.back()) {
    throw std::invalid_argument("SMS send times must be non-decreasing");
  }
  sends_.push_back(tti);
}

std::optional<std::uint64_t> intersection_ledger::window_closes() const
{
  if (sends_.empty()) {
    return std::nullopt;
  }
  return sends_.back() + static_cast<std::uint64_t>(window_end_);
}

void intersection_ledger::page_seen(std::uint64_t tti, std::uint32_t tmsi)
{
  for (unsigned i = 0; i < sends_.size(); ++i) {
    if (tti < sends_[i]) {
      break;
    }
    const auto delay = static_cast<sim_ms>(tti - sends_[i]);
    if (delay < window_start_ || delay > window_end_) {
      continue;
    }
    auto& s = stats_[tmsi];
    if (std::find(s.sms.begin(), s.sms.end(), i) != s.sms.end()) {
      continue;
    }
    s.sms.push_back(i);
    s.delays.push_back(static_cast<double>(delay));
  }
}

std::vector<intersection_candidate> intersection_ledger::ranking() const
{
  std::vector<intersection_candidate> out;
  out.reserve(stats_.size());
  for (const auto& [tmsi, s] : stats_) {
    intersection_candidate c;
    c.tmsi = tmsi;
    c.hits = static_cast<unsigned>(s.sms.size());
    for (double d : s.delays) {
      c.mean_ms += d;
    }
    c.mean_ms /= static_cast<double>(s.delays.size());
    for (double d : s.delays) {
      c.var_ms2 += (d - c.mean_ms) * (d - c.mean_ms);
    }
    c.var_ms2 /= static_cast<double>(s.delays.size());
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.hits != b.hits) {
      return a.hits > b.hits;
    }
    if (a.var_ms2 != b.var_ms2) {
      return a.var_ms2 < b.var_ms2;
    }
    return a.tmsi < b.tmsi;
  });
  return out;
}

std::optional<std::uint32_t> intersection_ledger::decision(unsigned margin) const
{
  const auto r = ranking();
  if (r.empty()) {
    return std::nullopt;
  }
  if (r.size() == 1) {
    return r[0].hits >= 2 ? std::optional(r[0].tmsi) : std::nullopt;
  }
  if (r[0].hits >= r[1].hits + margin) {
    return r[0].tmsi;
  }
  return std::nullopt;
}

} // namespace ovsim
