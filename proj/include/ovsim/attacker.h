#pragma once

// Overshadowing attacker: downlink sniffer and connection tracker, downlink
// DoS with forged grants/acks, uplink injection through a pool of UE stacks,
// and the silent-SMS TMSI intersection attack.

#include "ovsim/intersection.h"
#include "ovsim/network.h"
#include "ovsim/rlc.h"
#include "ovsim/simulator.h"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ovsim {

enum class attack_kind : std::uint8_t { sniffer, downlink_dos, uplink_dos, imsi_extractor, tmsi_intersection };
const char*                attack_kind_name(attack_kind k);
std::optional<attack_kind> parse_attack_kind(std::string_view s);

struct intersection_config {
  std::string phone_target; ///< IMSI handed to the SMS gateway
  unsigned    max_sms         = 20;
  sim_ms      gap_min         = 20 * k_second_ms;
  sim_ms      gap_max         = 30 * k_second_ms;
  sim_ms      window_start    = 500;
  sim_ms      window_end      = 5 * k_second_ms;
  unsigned    margin          = 3;
  sim_ms      start           = 1 * k_second_ms;
  bool        stop_when_done  = false;
};

struct attack_plan {
  attack_kind kind = attack_kind::sniffer;
  /// nullopt attacks every connection; otherwise only these TMSIs.
  std::optional<std::set<std::uint32_t>> targets;
  double                tx_power_dbm     = 30.0;
  std::optional<double> static_ta_us;   ///< default: round trip to the cell
  double                timing_offset_us = 0.0;
  unsigned              rlc_delta_max    = 4;
  std::set<std::uint32_t> whitelist;
  std::string           blocked_imsi;   ///< uplink DoS, attach variant
  unsigned              stacks           = 4;
  std::uint8_t          service_reject_cause = codec::reject_cause::all_services_forbidden;
  sim_ms                dos_duration     = 500;
  sim_ms                stack_hold       = 2 * k_second_ms;
  unsigned              max_tracked      = 50;
  intersection_config   intersection;

  /// Throws std::invalid_argument.
  void validate() const;
};

class attacker_node : public node
{
public:
  /// `core` is the SMS gateway; only the intersection attack needs it.
  attacker_node(simulator& sim, phy::node_id id, std::string name, attack_plan plan, phy::node_id cell,
                mme* core);

  bool interested(const phy::slot_key& key) const override;
  void on_receive(const delivery& d) override;
  void on_tx_result(const phy::transmission& tx, const node& receiver, const phy::slot_outcome& out,
                    bool won) override;
  void on_subframe(subframe_time now) override;
  bool busy() const override;

  const attack_plan&             plan() const { return plan_; }
  const std::set<std::uint32_t>& whitelist() const { return whitelist_; }
  std::size_t                    tracked() const { return conns_.size(); }
  std::size_t                    engaged_stacks() const;
  double                         static_ta_us() const { return ta_us_; }
  const intersection_ledger&     ledger() const { return ledger_; }
  std::optional<std::uint32_t>   identified_tmsi() const { return identified_; }

private:
  struct connection {
    std::uint16_t                              rnti  = 0;
    std::uint64_t                              since = 0;
    std::optional<codec::ue_identity>          identity;
    std::optional<codec::establishment_cause>  cause;
    std::optional<codec::bytes>                config;
    std::optional<unsigned>                    stack;
    rlc_rx                                     dl_ccch;
    rlc_rx                                     dl_srb1;
    bool                                       targeted = false;

    // downlink DoS
    bool          dl_active = false;
    std::uint64_t dl_start  = 0;
    std::uint64_t dl_end    = 0;
    std::uint64_t last_grant = 0;
    bool          granted   = false;
    int           last_rlc  = -1;

    // uplink injection
    bool ul_armed = false;
    bool ul_done  = false;

    std::optional<bool> last_overshadow;
  };

  bool uplink_kind() const;
  bool attach_procedure(const connection& c) const;
  void track(const codec::random_access_response& rar);
  void untrack(std::uint16_t rnti, const char* reason);
  void on_contention(connection& c, const codec::contention_resolution& cr);
  void on_setup(connection& c, const codec::bytes& config);
  void on_grant(connection& c, const codec::uplink_grant& g);
  void on_downlink_sdu(connection& c, const codec::bytes& sdu);
  void inject_uplink(connection& c, const codec::uplink_grant& g);
  void send_downlink_attack(connection& c, std::uint64_t tti);
  void on_uplink_sdu(std::uint64_t tti, std::uint16_t rnti, const codec::bytes& sdu);

  void send_next_sms();
  void evaluate_intersection();
  void on_paging(const codec::paging& p);

  attack_plan                          plan_;
  phy::node_id                         cell_;
  mme*                                 core_;
  rng                                  rng_;
  double                               ta_us_ = 0.0;
  std::map<std::uint16_t, connection>  conns_;
  std::vector<std::optional<std::uint16_t>> stacks_;
  std::set<std::uint32_t>              whitelist_;

  intersection_ledger                  ledger_;
  std::optional<std::uint32_t>         identified_;
  bool                                 intersection_done_ = false;
};

} // namespace ovsim
