#pragma once

// Silent-SMS paging correlation: which TMSI shows up after every SMS.

#include "ovsim/time.h"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace ovsim {

struct intersection_candidate {
  std::uint32_t tmsi      = 0;
  unsigned      hits      = 0;
  double        mean_ms   = 0.0;
  double        var_ms2   = 0.0; ///< population variance of the paging delay
};

class intersection_ledger
{
public:
  /// Pages seen in [send + window_start, send + window_end] count as hits.
  intersection_ledger(sim_ms window_start, sim_ms window_end);

  void sms_sent(std::uint64_t tti);
  void page_seen(std::uint64_t tti, std::uint32_t tmsi);

  /// Candidates by hits (descending), then delay variance (ascending), then TMSI.
  std::vector<intersection_candidate> ranking() const;

  /// Top candidate once it leads the runner-up by `margin` hits, or is the
  /// only candidate with at least two hits.
  std::optional<std::uint32_t> decision(unsigned margin) const;

  unsigned sms_count() const { return static_cast<unsigned>(sends_.size()); }
  /// Latest time at which a page can still count for a sent SMS.
  std::optional<std::uint64_t> window_closes() const;

private:
  struct stats {
    std::vector<unsigned> sms; ///< indices of the SMS this TMSI answered
    std::vector<double>   delays;
  };

  sim_ms                               window_start_;
  sim_ms                               window_end_;
  std::vector<std::uint64_t>           sends_;
  std::map<std::uint32_t, stats>       stats_;
};

} // namespace ovsim
