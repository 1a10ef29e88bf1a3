#pragma once

// Victim UE: random access, RRC connection, NAS attach / service request,
// paging response, SMS handling, and profile-driven reject behaviour.

#include "ovsim/device_profile.h"
#include "ovsim/rlc.h"
#include "ovsim/simulator.h"

#include <map>
#include <optional>
#include <string>

namespace ovsim {

enum class ue_state : std::uint8_t {
  powered_off,
  deregistered,
  random_access,
  rrc_connecting,
  attaching,
  authenticating,
  security_mode,
  registered,
  idle,
  service_requesting,
  dos_blocked,
  retry_backoff,
};
const char* to_string(ue_state s);

struct ue_config {
  std::string                       imsi;
  std::string                       profile = "default";
  codec::capability_vector          capabilities{0xffffffffu};
  std::optional<codec::session_key> key; ///< defaults to codec::default_session_key(imsi)
  std::optional<std::uint32_t>      tmsi;
  /// Start in Idle with `tmsi` already registered at the MME.
  bool registered = false;

  double target_rx_dbm    = -100.0;
  double p_max_dbm        = 23.0;
  double pl_error_db      = 0.0;  ///< bias of the UE's path-loss estimate
  double tpc_limit_db     = 20.0;

  unsigned max_prach_attempts  = 4;
  sim_ms   rar_window          = 10;
  sim_ms   contention_window   = 8;
  sim_ms   t3410               = 15 * k_second_ms;
  sim_ms   t3411               = 10 * k_second_ms;
  sim_ms   t3402               = 12 * k_minute_ms;
  sim_ms   t3417               = 5 * k_second_ms;
  unsigned max_attach_attempts = 5;
  sim_ms   inactivity_guard    = 10 * k_second_ms;

  /// Throws std::invalid_argument on an invalid IMSI or unknown profile.
  void validate() const;
};

class ue_node : public node
{
public:
  ue_node(simulator& sim, phy::node_id id, std::string name, ue_config cfg, phy::node_id serving_cell);

  // Harness actions.
  void power_on();
  void user_reset();
  void start_data();

  bool interested(const phy::slot_key& key) const override;
  void on_receive(const delivery& d) override;

  ue_state                     state() const { return state_; }
  std::optional<std::uint32_t> tmsi() const { return tmsi_; }
  std::optional<std::uint16_t> rnti() const { return rnti_; }
  const std::string&           imsi() const { return cfg_.imsi; }
  const ue_config&             config() const { return cfg_; }
  const device_profile&        profile() const { return *profile_; }
  double                       tpc_accum_db() const { return tpc_accum_; }
  double                       timing_advance_us() const { return ta_us_; }
  double                       tx_power_dbm() const;
  unsigned                     persistent_rejects() const { return reject_count_; }
  std::optional<std::uint64_t> blocked_until() const;

private:
  enum class proc_kind : std::uint8_t { attach, service };

  struct procedure {
    proc_kind                         kind  = proc_kind::attach;
    codec::establishment_cause        cause = codec::establishment_cause::mo_signalling;
    std::optional<codec::connection_request> request;
    std::uint64_t                     contention_id = 0;
    unsigned                          prach_tries   = 0;
    unsigned                          restarts      = 0;
    bool                              contention_ok = false;
    bool                              setup_done    = false;
  };

  /// The uplink SDU whose delivery must be confirmed (HARQ + RLC) before
  /// downlink SRB1 traffic is accepted again.
  struct pending_request {
    bool                        active = false;
    std::uint16_t               last_sn = 0;
    std::optional<std::uint8_t> last_pid;
    bool                        harq_ok = false;
    bool                        rlc_ok  = false;
    bool                        discard_logged = false;
  };

  void set_state(ue_state s);
  void begin(proc_kind kind, codec::establishment_cause cause);
  void send_prach();
  void on_rar_timeout();
  void on_rar(const codec::random_access_response& rar);
  void abandon_contention(const char* reason);
  void handle_connection_tb(const std::vector<codec::mac_pdu>& pdus);
  void handle_paging(const codec::paging& p);
  void handle_sdu(const codec::bytes& sdu);
  void handle_nas(const codec::nas_message& msg);
  void handle_reject(const codec::reject_cause& cause, const char* msg_name);
  void send_nas(const codec::nas_message& msg);
  void transmit_on_grant(const codec::uplink_grant& g);
  void check_request_complete();
  void drop_connection(const char* reason);
  void on_nas_timer_expired();
  void enter_block();
  void retry_after(sim_ms delay, const char* reason);
  void arm_guard();

  void timer(const std::string& name, sim_ms delay, std::function<void()> fn);
  void stop_timer(const std::string& name);
  void stop_all_timers();

  ue_config             cfg_;
  const device_profile* profile_;
  codec::session_key    key_;
  phy::node_id          cell_;
  rng                   rng_;

  ue_state                     state_ = ue_state::powered_off;
  std::optional<std::uint32_t> tmsi_;
  bool                         registered_ = false;
  std::optional<std::uint16_t> rnti_;
  std::optional<std::uint8_t>  preamble_;
  procedure                    proc_;
  pending_request              request_;
  rlc_tx                       ul_srb1_;
  rlc_tx                       ul_ccch_;
  rlc_rx                       dl_srb1_;
  rlc_rx                       dl_ccch_;
  double                       tpc_accum_ = 0.0;
  double                       ta_us_     = 0.0;
  std::uint8_t                 service_seq_ = 0;
  unsigned                     attach_attempts_ = 0;
  unsigned                     reject_count_    = 0;
  std::uint64_t                last_rx_tti_     = 0;
  std::optional<std::uint64_t> blocked_until_;
  bool                         abort_after_send_ = false;
  std::map<std::string, simulator::timer_id> timers_;
};

} // namespace ovsim
