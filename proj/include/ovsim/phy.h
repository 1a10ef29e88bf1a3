#pragma once

// Radio medium: log-distance path loss, capture-effect slot resolution,
// open-loop + TPC uplink power, and timing advance.

#include "ovsim/codec.h"
#include "ovsim/time.h"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ovsim::phy {

using node_id = std::uint32_t;

enum class direction : std::uint8_t { uplink, downlink };
const char* to_string(direction d);

/// Well-known RNTIs. C-RNTIs come from the eNodeB pool and never collide with these.
constexpr std::uint16_t k_ra_rnti     = 0x0002;
constexpr std::uint16_t k_paging_rnti = 0xfffe;

struct position {
  double x = 0.0;
  double y = 0.0;
};

class unknown_node_error : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Speed of light in m/us.
constexpr double k_light_m_per_us = 299.792458;

struct channel_model {
  std::map<node_id, position> positions;
  double                      path_loss_exponent  = 3.0;
  double                      reference_loss_db   = 38.0;
  double                      capture_margin_db   = 3.0;
  double                      timing_tolerance_us = 4.7;
  /// PRACH preambles are detected within the preamble cyclic prefix (format 0).
  double prach_window_us = 103.13;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;

  position position_of(node_id n) const;
};

double distance_m(const channel_model& model, node_id a, node_id b);

/// referenceLoss + 10 * exponent * log10(d). Throws unknown_node_error, and
/// std::domain_error for co-located nodes.
double path_loss_db(const channel_model& model, node_id a, node_id b);

/// One-way propagation delay in microseconds.
double propagation_delay_us(double distance_m);

/// Round-trip delay quantised to the 16*Ts timing-advance grid.
std::uint16_t ta_steps_for_distance(double distance_m);

double ue_tx_power_dbm(double target_rx_dbm, double path_loss_db, double tpc_accum_db, double p_max_dbm);

struct transmission {
  node_id       source = 0;
  direction     dir    = direction::uplink;
  std::uint16_t rnti   = 0; ///< C-RNTI, or the preamble index for PRACH
  subframe_time at;
  double        tx_power_dbm      = 0.0;
  double        timing_offset_us  = 0.0; ///< deliberate offset from the sender's frame timing
  double        timing_advance_us = 0.0; ///< TA applied by an uplink sender
  bool          prach             = false;
  codec::layer  layer             = codec::layer::mac;
  codec::bytes  payload;
};

/// Slot identity: transmissions only compete when all four components match.
struct slot_key {
  std::uint64_t tti   = 0;
  direction     dir   = direction::uplink;
  bool          prach = false;
  std::uint16_t rnti  = 0;

  friend auto operator<=>(const slot_key&, const slot_key&) = default;
};

slot_key key_of(const transmission& tx);

enum class outcome_kind : std::uint8_t { decoded, collision, silence };
const char* to_string(outcome_kind k);

struct slot_outcome {
  outcome_kind kind = outcome_kind::silence;
  /// Index into the candidate list of the strongest arrival (set unless silence).
  std::optional<std::size_t> winner;
  double                     rx_power_dbm      = 0.0;
  double                     arrival_offset_us = 0.0;
  double                     gap_db            = 0.0; ///< strongest minus runner-up; +inf if alone
  bool                       timing_miss       = false;
};

/// Received power of `tx` at `receiver`.
double rx_power_dbm(const channel_model& model, const transmission& tx, node_id receiver);

/// Arrival time relative to the receiver's slot boundary. Uplink arrivals
/// include the round trip minus the sender's applied timing advance; downlink
/// receivers are synchronised to the serving cell so only the deliberate
/// offset remains.
double arrival_offset_us(const channel_model& model, const transmission& tx, node_id receiver);

/// Capture-effect resolution over transmissions sharing one slot. Exact
/// margin ties collide.
slot_outcome resolve_slot(const std::vector<transmission>& txs, node_id receiver, const channel_model& model);

/// Same rule on precomputed values; exposed for boundary tests.
slot_outcome resolve_powers(const std::vector<double>& rx_dbm, const std::vector<double>& offsets_us,
                            double margin_db, double tolerance_us);

} // namespace ovsim::phy
