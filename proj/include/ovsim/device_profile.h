#pragma once

// Per-handset reaction to persistent attach rejects (#3/#8), as observed on
// commercial phones: a list of retry batches followed by a long block.

#include "ovsim/time.h"

#include <string>
#include <string_view>
#include <vector>

namespace ovsim {

struct retry_batch {
  sim_ms   min_delay = 0;
  sim_ms   max_delay = 0;
  unsigned count     = 0;
};

struct device_profile {
  std::string              name;  ///< config key, e.g. "oneplus_9_pro"
  std::string              model; ///< display name
  std::vector<retry_batch> retries;
  sim_ms                   block_duration   = 12 * k_hour_ms;
  bool                     implements_t3247 = false;

  /// Throws std::invalid_argument for an empty name, inverted ranges or a
  /// block shorter than 12 h.
  void validate() const;

  unsigned total_retries() const;
  /// Batch governing the retry after the n-th reject (1-based); nullptr once
  /// the retries are exhausted and the block applies.
  const retry_batch* batch_after_reject(unsigned n) const;
};

const std::vector<device_profile>& builtin_profiles();
/// Throws std::invalid_argument for unknown names.
const device_profile& find_profile(std::string_view name);

} // namespace ovsim
