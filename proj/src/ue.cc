#include "ovsim/ue.h"

#include <algorithm>

namespace ovsim {

const char* to_string(ue_state s)
{
  switch (s) {
    case ue_state::powered_off:
      return "powered_off";
    case ue_state::deregistered:
      return "deregistered";
    case ue_state::random_access:
      return "random_access";
    case ue_state::rrc_connecting:
      return "rrc_connecting";
    case ue_state::attaching:
      return "attaching";
    case ue_state::authenticating:
      return "authenticating";
    case ue_state::security_mode:
      return "security_mode";
    case ue_state::registered:
      return "registered";
    case ue_state::idle:
      return "idle";
    case ue_state::service_requesting:
      return "service_requesting";
    case ue_state::dos_blocked:
      return "dos_blocked";
    case ue_state::retry_backoff:
      return "retry_backoff";
  }
  return "?";
}

void ue_config::validate() const
{
  if (!codec::is_valid_imsi(imsi)) {
    throw std::invalid_argument("imsi must have exactly 15 digits: '" + imsi + "'");
  }
  find_profile(profile);
  if (registered && !tmsi) {
    throw std::invalid_argument("a pre-registered UE needs a tmsi");
  }
  if (max_prach_attempts == 0 || max_attach_attempts == 0) {
    throw std::invalid_argument("attempt limits must be positive");
  }
}

ue_node::ue_node(simulator& sim, phy::node_id id, std::string name, ue_config cfg, phy::node_id serving_cell) :
  node(sim, id, std::move(name)),
  cfg_(std::move(cfg)),
  profile_(&find_profile(cfg_.profile)),
  key_(cfg_.key ? *cfg_.key : codec::default_session_key(cfg_.imsi)),
  cell_(serving_cell),
  rng_(sim.derive_rng("ue." + this->name()))
{
  cfg_.validate();
  tmsi_ = cfg_.tmsi;
}

// ---------------------------------------------------------------------------
// Timers and state

void ue_node::timer(const std::string& tname, sim_ms delay, std::function<void()> fn)
{
  stop_timer(tname);
  timers_[tname] = sim_.schedule_in(delay, [this, tname, fn = std::move(fn)] {
    timers_.erase(tname);
    fn();
  });
}

void ue_node::stop_timer(const std::string& tname)
{
  auto it = timers_.find(tname);
  if (it != timers_.end()) {
    sim_.cancel(it->second);
    timers_.erase(it);
  }
}

void ue_node::stop_all_timers()
{
  for (const auto& [n, id] : timers_) {
    sim_.cancel(id);
  }
  timers_.clear();
}

void ue_node::set_state(ue_state s)
{
  if (s == state_) {
    return;
  }
  sim_.log().emit(sim_.tti(), name(), "ue_state").add("state", to_string(s)).add("prev", to_string(state_));
  state_ = s;
}

std::optional<std::uint64_t> ue_node::blocked_until() const
{
  return blocked_until_;
}

double ue_node::tx_power_dbm() const
{
  const double pl = phy::path_loss_db(sim_.channel(), cell_, id()) + cfg_.pl_error_db;
  return phy::ue_tx_power_dbm(cfg_.target_rx_dbm, pl, tpc_accum_, cfg_.p_max_dbm);
}

// ---------------------------------------------------------------------------
// Harness actions

void ue_node::power_on()
{
  if (state_ != ue_state::powered_off) {
    return;
  }
  if (cfg_.registered) {
    registered_ = true;
    set_state(ue_state::idle);
    return;
  }
  set_state(ue_state::deregistered);
  begin(proc_kind::attach, codec::establishment_cause::mo_signalling);
}

void ue_node::user_reset()
{
  sim_.log().emit(sim_.tti(), name(), "user_reset").add("state", to_string(state_));
  stop_all_timers();
  drop_connection("user_reset");
  blocked_until_.reset();
  reject_count_    = 0;
  attach_attempts_ = 0;
  registered_      = false;
  set_state(ue_state::deregistered);
  begin(proc_kind::attach, codec::establishment_cause::mo_signalling);
}

void ue_node::start_data()
{
  if (state_ != ue_state::idle || !tmsi_) {
    sim_.log().emit(sim_.tti(), name(), "action_ignored").add("action", "data").add("state", to_string(state_));
    return;
  }
  begin(proc_kind::service, codec::establishment_cause::mo_data);
}

// ---------------------------------------------------------------------------
// Random access and contention resolution

void ue_node::begin(proc_kind kind, codec::establishment_cause cause)
{
  if (state_ == ue_state::dos_blocked || state_ == ue_state::powered_off) {
    return;
  }
  const unsigned restarts = proc_.kind == kind ? proc_.restarts : 0;
  drop_connection("new_procedure");
  stop_timer("nas");
  proc_          = procedure{};
  proc_.kind     = kind;
  proc_.cause    = cause;
  proc_.restarts = restarts;

  auto ev = sim_.log().emit(sim_.tti(), name(), kind == proc_kind::attach ? "attach_start" : "service_start");
  ev.add("cause", codec::to_string(cause)).add("with_tmsi", tmsi_.has_value());
  set_state(ue_state::random_access);
  send_prach();
}

void ue_node::send_prach()
{
  preamble_ = static_cast<std::uint8_t>(rng_.uniform(0, 59));
  phy::transmission tx;
  tx.source       = id();
  tx.dir          = phy::direction::uplink;
  tx.prach        = true;
  tx.rnti         = *preamble_;
  tx.at           = sim_.now().plus(1);
  tx.tx_power_dbm = std::min(cfg_.p_max_dbm, cfg_.target_rx_dbm + phy::path_loss_db(sim_.channel(), cell_, id()) +
                                                 cfg_.pl_error_db);
  tx.payload      = {*preamble_};
  sim_.transmit(tx);
  sim_.log().emit(sim_.tti(), name(), "prach").add("preamble", *preamble_).add("try", proc_.prach_tries + 1);
  timer("rar", 1 + cfg_.rar_window, [this] { on_rar_timeout(); });
}

void ue_node::on_rar_timeout()
{
  ++proc_.prach_tries;
  if (proc_.prach_tries < cfg_.max_prach_attempts) {
    send_prach();
    return;
  }
  sim_.log().emit(sim_.tti(), name(), "access_failure").add("reason", "rar_timeout");
  preamble_.reset();
  if (proc_.kind == proc_kind::attach) {
    on_nas_timer_expired();
  } else {
    set_state(registered_ ? ue_state::idle : ue_state::deregistered);
  }
}

void ue_node::on_rar(const codec::random_access_response& rar)
{
  stop_timer("rar");
  preamble_.reset();
  rnti_        = rar.rnti;
  ta_us_       = rar.timing_advance_us();
  tpc_accum_   = 0.0;
  last_rx_tti_ = sim_.tti();

  codec::connection_request req;
  req.cause = proc_.cause;
  if (tmsi_) {
    req.identity = codec::tmsi_id{*tmsi_};
  } else {
    req.identity = codec::random_id{rng_.next_u64() & codec::k_random_id_mask};
  }
  proc_.request       = req;
  proc_.contention_id = codec::contention_id(req);
  ul_ccch_.enqueue(codec::encode(codec::rrc_message{req}));

  auto ev = sim_.log().emit(sim_.tti(), name(), "rrc_request");
  ev.add("rnti", *rnti_).add("identity", codec::describe(req.identity)).add("cause", codec::to_string(req.cause));
  ev.hex("contention_id", proc_.contention_id, 12);
  ev.add("ta_us", ta_us_);

  set_state(ue_state::rrc_connecting);
  transmit_on_grant(rar.grant);
  const auto wait = static_cast<sim_ms>(rar.grant.at.index()) - static_cast<sim_ms>(sim_.tti());
  timer("contention", std::max<sim_ms>(wait, 0) + cfg_.contention_window, [this] { abandon_contention("timeout"); });
}

void ue_node::abandon_contention(const char* reason)
{
  sim_.log().emit(sim_.tti(), name(), "contention").add("result", "abandon").add("reason", reason);
  const auto kind  = proc_.kind;
  const auto cause = proc_.cause;
  drop_connection("contention");
  if (++proc_.restarts > cfg_.max_prach_attempts) {
    sim_.log().emit(sim_.tti(), name(), "access_failure").add("reason", "contention");
    if (kind == proc_kind::attach) {
      on_nas_timer_expired();
    } else {
      set_state(registered_ ? ue_state::idle : ue_state::deregistered);
    }
    return;
  }
  timer("restart", 1, [this, kind, cause] { begin(kind, cause); });
}

void ue_node::drop_connection(const char* reason)
{
  if (rnti_) {
    sim_.log().emit(sim_.tti(), name(), "connection_drop").add("rnti", *rnti_).add("reason", reason);
  }
  rnti_.reset();
  preamble_.reset();
  stop_timer("rar");
  stop_timer("contention");
  stop_timer("guard");
  stop_timer("abort");
  request_ = pending_request{};
  ul_srb1_.reset();
  ul_ccch_.reset();
  dl_srb1_.reset();
  dl_ccch_.reset();
  abort_after_send_ = false;
  tpc_accum_        = 0.0;
  ta_us_            = 0.0;
}

// ---------------------------------------------------------------------------
// Air interface

bool ue_node::interested(const phy::slot_key& key) const
{
  if (key.dir != phy::direction::downlink) {
    return false;
  }
  if (key.rnti == phy::k_ra_rnti) {
    return state_ == ue_state::random_access && preamble_.has_value();
  }
  if (key.rnti == phy::k_paging_rnti) {
    return state_ == ue_state::idle && tmsi_.has_value();
  }
  return rnti_ && key.rnti == *rnti_;
}

void ue_node::on_receive(const delivery& d)
{
  std::vector<codec::mac_pdu> pdus;
  try {
    pdus = codec::decode_transport_block(d.tx->payload);
  } catch (const codec::codec_error& e) {
    sim_.log().emit(sim_.tti(), name(), "dl_malformed").add("rnti", d.tx->rnti).add("error", e.what());
    return;
  }

  if (d.tx->rnti == phy::k_ra_rnti) {
    for (const auto& pdu : pdus) {
      const auto* rar = std::get_if<codec::random_access_response>(&pdu);
      if (rar && preamble_ && rar->preamble == *preamble_ && state_ == ue_state::random_access) {
        on_rar(*rar);
        return;
      }
    }
    return;
  }
  if (d.tx->rnti == phy::k_paging_rnti) {
    for (const auto& pdu : pdus) {
      if (const auto* p = std::get_if<codec::payload>(&pdu)) {
        for (const auto& seg : p->segments) {
          try {
            auto msg = codec::decode_rrc(seg.data);
            if (const auto* pg = std::get_if<codec::paging>(&msg)) {
              handle_paging(*pg);
            }
          } catch (const codec::codec_error&) {
          }
        }
      }
    }
    return;
  }
  last_rx_tti_ = sim_.tti();
  handle_connection_tb(pdus);
}

void ue_node::handle_paging(const codec::paging& p)
{
  if (state_ != ue_state::idle || !tmsi_) {
    return;
  }
  if (std::find(p.tmsis.begin(), p.tmsis.end(), *tmsi_) == p.tmsis.end()) {
    return;
  }
  sim_.log().emit(sim_.tti(), name(), "paged").hex("tmsi", *tmsi_);
  begin(proc_kind::service, codec::establishment_cause::mt_access);
}

void ue_node::handle_connection_tb(const std::vector<codec::mac_pdu>& pdus)
{
  // MAC control elements first, so acknowledgements in this block already
  // count when its payload is judged.
  for (const auto& pdu : pdus) {
    if (!rnti_) {
      return;
    }
    if (const auto* cr = std::get_if<codec::contention_resolution>(&pdu)) {
      if (state_ == ue_state::rrc_connecting && !proc_.contention_ok) {
        if (cr->id == proc_.contention_id) {
          proc_.contention_ok = true;
          stop_timer("contention");
          sim_.log().emit(sim_.tti(), name(), "contention").add("result", "accept").add("rnti", *rnti_);
        } else {
          abandon_contention("mismatch");
          return;
        }
      }
    } else if (const auto* g = std::get_if<codec::uplink_grant>(&pdu)) {
      if (proc_.contention_ok && g->rnti == *rnti_) {
        transmit_on_grant(*g);
      }
    } else if (const auto* ack = std::get_if<codec::harq_ack>(&pdu)) {
      if (request_.active && request_.last_pid && *request_.last_pid == ack->process_id) {
        request_.harq_ok = true;
      }
    } else if (const auto* st = std::get_if<codec::rlc_status>(&pdu)) {
      if (st->lcid == codec::k_lcid_srb1 && request_.active && request_.last_pid && st->ack_sn >= request_.last_sn) {
        request_.rlc_ok = true;
      }
    } else if (const auto* tpc = std::get_if<codec::tpc_command>(&pdu)) {
      tpc_accum_ = std::clamp(tpc_accum_ + tpc->delta_db, -cfg_.tpc_limit_db, cfg_.tpc_limit_db);
    } else if (const auto* ta = std::get_if<codec::ta_command>(&pdu)) {
      ta_us_ = std::max(0.0, ta_us_ + ta->steps * codec::k_ta_step_us);
    }
  }
  check_request_complete();

  for (const auto& pdu : pdus) {
    const auto* p = std::get_if<codec::payload>(&pdu);
    if (p == nullptr || !rnti_) {
      continue;
    }
    if (p->lcid == codec::k_lcid_ccch) {
      if (!proc_.contention_ok) {
        continue;
      }
      for (const auto& seg : p->segments) {
        for (const auto& sdu : dl_ccch_.push(seg)) {
          handle_sdu(sdu);
        }
      }
    } else if (p->lcid == codec::k_lcid_srb1) {
      if (request_.active) {
        if (!request_.discard_logged && !p->segments.empty()) {
          request_.discard_logged = true;
          auto ev = sim_.log().emit(sim_.tti(), name(), "dl_discarded");
          ev.add("rnti", *rnti_).add("harq_ok", request_.harq_ok).add("rlc_ok", request_.rlc_ok);
        }
        continue;
      }
      for (const auto& seg : p->segments) {
        for (const auto& sdu : dl_srb1_.push(seg)) {
          handle_sdu(sdu);
          if (!rnti_) {
            return;
          }
        }
      }
    }
  }
}

void ue_node::check_request_complete()
{
  if (request_.active && request_.harq_ok && request_.rlc_ok) {
    request_ = pending_request{};
  }
}

void ue_node::transmit_on_grant(const codec::uplink_grant& g)
{
  if (g.at.index() <= sim_.tti() || !rnti_) {
    return;
  }
  codec::payload pl;
  if (!ul_ccch_.empty()) {
    pl.lcid     = codec::k_lcid_ccch;
    pl.segments = ul_ccch_.take(g.size_bytes);
  } else {
    pl.lcid     = codec::k_lcid_srb1;
    pl.segments = ul_srb1_.take(g.size_bytes); // empty: padding, still feeds power control
    for (const auto& s : pl.segments) {
      if (request_.active && s.sn == request_.last_sn) {
        request_.last_pid = static_cast<std::uint8_t>(g.at.index() % 8);
      }
    }
  }
  phy::transmission tx;
  tx.source            = id();
  tx.dir               = phy::direction::uplink;
  tx.rnti              = *rnti_;
  tx.at                = g.at;
  tx.tx_power_dbm      = tx_power_dbm();
  tx.timing_advance_us = ta_us_;
  tx.payload           = codec::encode(codec::mac_pdu{pl});
  sim_.transmit(std::move(tx));

  if (abort_after_send_ && ul_srb1_.empty()) {
    abort_after_send_ = false;
    const auto kind   = proc_.kind;
    const auto cause  = proc_.cause;
    const auto wait   = static_cast<sim_ms>(g.at.index() - sim_.tti());
    timer("abort", wait, [this, kind, cause] {
      drop_connection("security_mode_reject");
      sim_.log().emit(sim_.tti(), name(), "procedure_retry").add("reason", "security_mode_reject");
      begin(kind, cause);
    });
  }
}

// ---------------------------------------------------------------------------
// RRC / NAS

void ue_node::send_nas(const codec::nas_message& msg)
{
  const auto bytes = codec::encode(msg);
  request_         = pending_request{};
  request_.active  = true;
  request_.last_sn = ul_srb1_.enqueue(bytes);
  auto ev          = sim_.log().emit(sim_.tti(), name(), "nas_tx");
  ev.add("rnti", rnti_.value_or(0)).add("msg", codec::message_name(msg)).add("hex", codec::to_hex(bytes));
}

void ue_node::handle_sdu(const codec::bytes& sdu)
{
  const auto l = codec::detect_layer(sdu);
  try {
    if (l == codec::layer::rrc) {
      const auto msg = codec::decode_rrc(sdu);
      sim_.log().emit(sim_.tti(), name(), "rrc_rx").add("rnti", *rnti_).add("msg", codec::message_name(msg));
      if (std::holds_alternative<codec::connection_setup>(msg)) {
        if (proc_.setup_done) {
          return;
        }
        proc_.setup_done = true;
        codec::nas_message initial;
        if (proc_.kind == proc_kind::attach) {
          codec::attach_request ar;
          ar.identity     = tmsi_ ? codec::ue_identity{codec::tmsi_id{*tmsi_}} : codec::ue_identity{codec::imsi_id{cfg_.imsi}};
          ar.capabilities = cfg_.capabilities;
          initial         = ar;
          set_state(ue_state::attaching);
          timer("nas", cfg_.t3410, [this] { on_nas_timer_expired(); });
        } else {
          ++service_seq_;
          initial = codec::service_request{service_seq_, codec::service_short_mac(key_, *tmsi_, service_seq_)};
          set_state(ue_state::service_requesting);
          timer("nas", cfg_.t3417, [this] { on_nas_timer_expired(); });
        }
        const auto nas   = codec::encode(initial);
        const auto bytes = codec::encode(codec::rrc_message{codec::connection_setup_complete{nas}});
        request_         = pending_request{};
        request_.active  = true;
        request_.last_sn = ul_srb1_.enqueue(bytes);
        auto ev          = sim_.log().emit(sim_.tti(), name(), "nas_tx");
        ev.add("rnti", *rnti_).add("msg", codec::message_name(initial)).add("hex", codec::to_hex(nas));
      } else if (std::holds_alternative<codec::connection_release>(msg)) {
        drop_connection("release");
        if (state_ == ue_state::registered) {
          set_state(ue_state::idle);
        }
      }
      return;
    }
    if (l == codec::layer::nas) {
      const auto msg = codec::decode_nas(sdu);
      auto       ev  = sim_.log().emit(sim_.tti(), name(), "nas_rx");
      ev.add("rnti", *rnti_).add("msg", codec::message_name(msg)).add("hex", codec::to_hex(sdu));
      handle_nas(msg);
      return;
    }
  } catch (const codec::codec_error& e) {
    sim_.log().emit(sim_.tti(), name(), "dl_malformed").add("error", e.what());
    return;
  }
  sim_.log().emit(sim_.tti(), name(), "dl_malformed").add("error", "unknown layer");
}

void ue_node::handle_nas(const codec::nas_message& msg)
{
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, codec::identity_request>) {
          send_nas(codec::identity_response{codec::imsi_id{cfg_.imsi}});
        } else if constexpr (std::is_same_v<T, codec::authentication_request>) {
          send_nas(codec::authentication_response{codec::auth_response(key_, m.rand)});
          if (state_ == ue_state::attaching) {
            set_state(ue_state::authenticating);
          }
        } else if constexpr (std::is_same_v<T, codec::security_mode_command>) {
          if (m.replayed_capabilities == cfg_.capabilities) {
            send_nas(codec::security_mode_complete{});
            if (proc_.kind == proc_kind::service) {
              stop_timer("nas");
              set_state(ue_state::registered);
              timer("guard", k_second_ms, [this] { arm_guard(); });
            } else {
              set_state(ue_state::security_mode);
            }
          } else {
            auto ev = sim_.log().emit(sim_.tti(), name(), "capability_mismatch");
            ev.hex("own", cfg_.capabilities.to_ulong()).hex("replayed", m.replayed_capabilities.to_ulong());
            stop_timer("nas");
            send_nas(codec::security_mode_reject{});
            abort_after_send_ = true;
          }
        } else if constexpr (std::is_same_v<T, codec::attach_accept>) {
          stop_timer("nas");
          tmsi_            = m.tmsi;
          registered_      = true;
          attach_attempts_ = 0;
          reject_count_    = 0;
          sim_.log().emit(sim_.tti(), name(), "tmsi_assigned").hex("tmsi", m.tmsi);
          send_nas(codec::attach_complete{});
          set_state(ue_state::registered);
          timer("guard", k_second_ms, [this] { arm_guard(); });
        } else if constexpr (std::is_same_v<T, codec::attach_reject> || std::is_same_v<T, codec::service_reject>) {
          handle_reject(m.cause, std::is_same_v<T, codec::attach_reject> ? "AttachReject" : "ServiceReject");
        } else if constexpr (std::is_same_v<T, codec::silent_sms>) {
          sim_.log().emit(sim_.tti(), name(), "sms_rx").add("type0", m.type0).add("notify", !m.type0);
          if (!m.type0) {
            sim_.log().emit(sim_.tti(), name(), "user_notification").add("reason", "sms");
          }
        } else {
          sim_.log().emit(sim_.tti(), name(), "nas_unexpected").add("msg", codec::message_name(codec::nas_message{m}));
        }
      },
      msg);
}

void ue_node::arm_guard()
{
  if (!rnti_ || state_ != ue_state::registered) {
    return;
  }
  if (sim_.tti() - last_rx_tti_ >= static_cast<std::uint64_t>(cfg_.inactivity_guard)) {
    drop_connection("inactivity");
    set_state(ue_state::idle);
    return;
  }
  timer("guard", k_second_ms, [this] { arm_guard(); });
}

// ---------------------------------------------------------------------------
// Rejects and NAS timers

void ue_node::handle_reject(const codec::reject_cause& cause, const char* msg_name)
{
  stop_timer("nas");
  drop_connection("reject");
  registered_ = false;

  if (cause.semantics() == codec::reject_semantics::integrity_failure) {
    sim_.log().emit(sim_.tti(), name(), "reject").add("msg", msg_name).add("cause", cause.code);
    if (tmsi_) {
      sim_.log().emit(sim_.tti(), name(), "tmsi_deleted").hex("tmsi", *tmsi_);
      tmsi_.reset();
    }
    set_state(ue_state::deregistered);
    timer("restart", 1, [this] { begin(proc_kind::attach, codec::establishment_cause::mo_signalling); });
    return;
  }

  ++reject_count_;
  sim_.log().emit(sim_.tti(), name(), "reject").add("msg", msg_name).add("cause", cause.code).add("count",
                                                                                                  reject_count_);
  if (cause.semantics() == codec::reject_semantics::unknown) {
    sim_.log().emit(sim_.tti(), name(), "reject_unknown_cause").add("cause", cause.code).add("treated_as", 8);
  }
  if (tmsi_) {
    sim_.log().emit(sim_.tti(), name(), "tmsi_deleted").hex("tmsi", *tmsi_);
    tmsi_.reset();
  }
  if (const auto* batch = profile_->batch_after_reject(reject_count_)) {
    const auto delay = static_cast<sim_ms>(
        rng_.uniform(static_cast<std::uint64_t>(batch->min_delay), static_cast<std::uint64_t>(batch->max_delay)));
    retry_after(delay, "profile");
    return;
  }
  enter_block();
}

void ue_node::retry_after(sim_ms delay, const char* reason)
{
  set_state(ue_state::retry_backoff);
  sim_.log().emit(sim_.tti(), name(), "retry_wait").add("delay_ms", delay).add("reason", reason);
  timer("retry", delay, [this] {
    set_state(ue_state::deregistered);
    begin(proc_kind::attach, codec::establishment_cause::mo_signalling);
  });
}

void ue_node::enter_block()
{
  const sim_ms duration = profile_->block_duration;
  blocked_until_        = sim_.tti() + static_cast<std::uint64_t>(duration);
  set_state(ue_state::dos_blocked);
  sim_.log().emit(sim_.tti(), name(), "dos_blocked").add("duration_ms", duration).add("until_ms", *blocked_until_)
      .add("profile", profile_->name);
  timer("block", duration, [this] {
    blocked_until_.reset();
    reject_count_ = 0;
    set_state(ue_state::deregistered);
    begin(proc_kind::attach, codec::establishment_cause::mo_signalling);
  });
}

void ue_node::on_nas_timer_expired()
{
  const bool attach = proc_.kind == proc_kind::attach;
  sim_.log().emit(sim_.tti(), name(), "timer_expired").add("timer", attach ? "T3410" : "T3417");
  drop_connection(attach ? "T3410" : "T3417");
  if (!attach) {
    set_state(registered_ ? ue_state::idle : ue_state::deregistered);
    return;
  }
  if (++attach_attempts_ < cfg_.max_attach_attempts) {
    retry_after(cfg_.t3411, "T3411");
  } else {
    attach_attempts_ = 0;
    retry_after(cfg_.t3402, "T3402");
  }
}

} // namespace ovsim
