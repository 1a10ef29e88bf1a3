#pragma once

// Serving network: eNodeB scheduler (RNTIs, grants, HARQ/RLC acks, TPC, TA,
// paging, decoy trap) and the MME with its SMS gateway.

#include "ovsim/rlc.h"
#include "ovsim/simulator.h"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ovsim {

struct hardening_config {
  bool establishment_cause_check       = false;
  bool silent_drop_invalid_service_mac = false;
  bool decoy_trap                      = false;
  bool never_send_persistent_rejects   = false;

  sim_ms decoy_start    = 1 * k_second_ms;
  sim_ms decoy_interval = 10 * k_second_ms;
  sim_ms decoy_window   = 2 * k_second_ms;
};

enum class tmsi_policy : std::uint8_t { never, on_attach };

struct subscriber_config {
  std::string                       imsi;
  std::optional<std::uint32_t>      tmsi; ///< pre-registered TMSI
  codec::capability_vector          capabilities{0xffffffffu};
  std::optional<codec::session_key> key;
};

struct mme_config {
  std::vector<subscriber_config> subscribers;
  /// Exact IMSIs, or prefixes ending in '*'.
  std::vector<std::string> blocked_imsis;
  tmsi_policy              tmsi_reallocation = tmsi_policy::never;
  sim_ms                   sms_latency_min   = 1 * k_second_ms;
  sim_ms                   sms_latency_max   = 3 * k_second_ms;
  hardening_config         hardening;
};

struct enb_config {
  double        tx_power_dbm  = 46.0;
  double        target_rx_dbm = -100.0;
  sim_ms        grant_period  = 5;
  std::uint16_t grant_bytes   = 100;
  sim_ms        inactivity    = 1 * k_second_ms;
  sim_ms        msg3_timeout  = 20;
  std::uint16_t rnti_first    = 61;
  std::uint16_t rnti_last     = 0xfeff;
  bool          ta_loop       = true;
  /// Background paging load (pages per second over a population of TMSIs).
  double        background_paging_rate = 0.0;
  std::uint32_t background_population  = 1u << 20;
};

/// Closed-loop power control step for a measured error (received minus
/// target, dB): -1 above +1 dB, +3 below -3 dB, +1 below -1 dB, else 0.
std::int8_t tpc_step_for_error(double error_db);

constexpr std::uint16_t k_decoy_rnti_base = 0xff00;
constexpr std::uint8_t  k_decoy_preamble  = 63;

class enb_node;

class mme
{
public:
  mme(simulator& sim, enb_node& enb, mme_config cfg);

  // eNodeB -> MME
  void on_initial_nas(std::uint16_t rnti, const codec::connection_request& rrc, const codec::bytes& nas);
  void on_uplink_nas(std::uint16_t rnti, const codec::bytes& nas);
  void on_connection_released(std::uint16_t rnti);

  /// SMS gateway. Throws std::invalid_argument if the IMSI has no TMSI.
  void send_sms(const std::string& imsi, bool silent);

  bool is_blocked(const std::string& imsi) const;
  /// Draws random IMSIs under `prefix` until one is blocked; returns it and
  /// the number of trials, or nullopt after `max_trials`.
  std::optional<std::pair<std::string, unsigned>> search_blocked_imsi(const std::string& prefix, unsigned max_trials,
                                                                      rng& r) const;

  std::optional<std::uint32_t> tmsi_of(const std::string& imsi) const;
  const mme_config&            config() const { return cfg_; }

private:
  struct subscriber {
    std::string                  imsi;
    std::optional<std::uint32_t> tmsi;
    codec::capability_vector     capabilities;
    codec::session_key           key;
    bool                         registered = false;
    unsigned                     pending_sms = 0;
    bool                         pending_silent = true;
  };

  enum class stage : std::uint8_t { identity, authentication, security, accept, resumed };

  struct procedure {
    bool                       attach = true;
    codec::establishment_cause cause  = codec::establishment_cause::mo_signalling;
    std::string                imsi;
    codec::capability_vector   capabilities;
    codec::auth_rand           rand{};
    stage                      at = stage::identity;
  };

  subscriber* find_by_imsi(const std::string& imsi);
  subscriber* find_by_tmsi(std::uint32_t tmsi);
  void        handle_attach(std::uint16_t rnti, const codec::attach_request& req, codec::establishment_cause cause);
  void        handle_service(std::uint16_t rnti, const codec::service_request& req,
                             const codec::connection_request& rrc);
  void        start_authentication(std::uint16_t rnti, procedure& p);
  void        reject(std::uint16_t rnti, bool attach, std::uint8_t cause);
  void        detection(std::uint16_t rnti, const char* method);
  void        send(std::uint16_t rnti, const codec::nas_message& msg);
  void        abort(std::uint16_t rnti, const char* reason);
  void        deliver_pending_sms(std::uint16_t rnti, subscriber& s);
  std::uint32_t allocate_tmsi();

  simulator&                          sim_;
  enb_node&                           enb_;
  mme_config                          cfg_;
  rng                                 rng_;
  std::vector<subscriber>             subscribers_;
  std::map<std::uint32_t, std::size_t> by_tmsi_;
  std::map<std::uint16_t, procedure>  procs_;
};

class enb_node : public node
{
public:
  enb_node(simulator& sim, phy::node_id id, std::string name, enb_config cfg, mme_config mme_cfg);

  bool interested(const phy::slot_key& key) const override;
  void on_receive(const delivery& d) override;
  void on_subframe(subframe_time now) override;
  bool busy() const override;

  // MME -> eNodeB
  void send_nas(std::uint16_t rnti, const codec::bytes& nas);
  void release(std::uint16_t rnti);
  void page(std::uint32_t tmsi);

  class mme&        core() { return mme_; }
  const enb_config& config() const { return cfg_; }
  std::size_t       live_rntis() const { return ctx_.size(); }
  std::optional<double> tpc_error_db(std::uint16_t rnti) const;

private:
  struct pending_ack {
    std::uint64_t                due;
    std::uint8_t                 pid;
    std::optional<std::uint16_t> rlc_sn;
  };

  struct ue_ctx {
    std::uint16_t rnti    = 0;
    bool          decoy   = false;
    bool          connected = false;
    std::uint64_t created       = 0;
    std::uint64_t connected_at  = 0;
    std::uint64_t last_activity = 0;
    std::uint64_t decoy_end     = 0;
    std::optional<codec::connection_request> request;
    std::optional<std::uint64_t>             setup_due;
    rlc_rx                   ul_ccch;
    rlc_rx                   ul_srb1;
    rlc_tx                   dl_srb1;
    std::deque<pending_ack>  acks;
    std::uint64_t            dl_hold_until = 0;
    std::optional<std::int8_t> tpc;
    std::optional<std::int8_t> ta;
    std::uint64_t            ta_guard_until = 0;
    std::optional<double>    last_error_db;
    bool                     release_queued = false;
    bool                     free_after_tx  = false;
  };

  struct pending_rar {
    std::uint8_t  preamble;
    std::uint16_t rnti;
    std::uint16_t ta_steps;
  };

  std::optional<std::uint16_t> allocate_rnti();
  void handle_prach(const delivery& d);
  void handle_uplink(ue_ctx& ctx, const delivery& d);
  void handle_sdu(ue_ctx& ctx, std::uint8_t lcid, const codec::bytes& sdu);
  void build_downlink(ue_ctx& ctx, std::uint64_t tti, std::vector<codec::mac_pdu>& pdus);
  void start_decoy();
  void send_tb(std::uint16_t rnti, std::uint64_t tti, const std::vector<codec::mac_pdu>& pdus);
  std::uint32_t background_tmsi(std::uint64_t index) const;
  void          schedule_paging_wake(std::uint64_t tti);

  enb_config                         cfg_;
  class mme                          mme_;
  rng                                rng_;
  std::map<std::uint16_t, ue_ctx>    ctx_;
  std::uint16_t                      next_rnti_;
  std::vector<pending_rar>           rars_;
  std::uint64_t                      rar_due_ = 0;
  std::vector<std::uint32_t>         pages_;
  unsigned                           decoy_count_ = 0;
};

} // namespace ovsim
