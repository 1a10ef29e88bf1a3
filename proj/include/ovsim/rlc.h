#pragma once

// Per-bearer RLC state shared by the UE, eNodeB and attacker stacks.

#include "ovsim/codec.h"

#include <deque>
#include <map>
#include <optional>

namespace ovsim {

/// Receive side: buffers segments, hands out complete SDUs in order and
/// tracks the highest in-sequence SN for status reports.
class rlc_rx
{
public:
  /// Returns every SDU completed by this segment (usually zero or one).
  std::vector<codec::bytes> push(const codec::rlc_segment& seg);

  /// Highest SN such that every SN up to it has arrived.
  std::optional<std::uint16_t> highest_contiguous() const { return highest_; }
  void                         reset() { *this = rlc_rx{}; }

private:
  std::map<std::uint16_t, codec::rlc_segment> pending_;
  std::uint16_t                               sdu_start_ = 0; ///< first SN of the SDU being assembled
  std::optional<std::uint16_t>                highest_;
};

/// Transmit side: segments SDUs with a running SN and drains them into
/// grant-sized MAC payloads.
class rlc_tx
{
public:
  explicit rlc_tx(std::size_t segment_bytes = codec::k_default_segment_bytes) : segment_bytes_(segment_bytes) {}

  /// Queues an SDU; returns the SN of its last segment.
  std::uint16_t enqueue(const codec::bytes& sdu);

  /// Pops as many queued segments as fit into `budget` bytes of MAC payload
  /// (at least one if any are queued).
  std::vector<codec::rlc_segment> take(std::size_t budget);

  bool empty() const { return queue_.empty(); }
  void reset()
  {
    queue_.clear();
    next_sn_ = 0;
  }

private:
  std::size_t                    segment_bytes_;
  std::deque<codec::rlc_segment> queue_;
  std::uint16_t                  next_sn_ = 0;
};

/// Encoded size of a MAC payload PDU carrying `segs`.
std::size_t payload_pdu_size(const std::vector<codec::rlc_segment>& segs);

} // namespace ovsim
