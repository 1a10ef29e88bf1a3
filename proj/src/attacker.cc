#include "ovsim/attacker.h"

#include <algorithm>
#include <stdexcept>

namespace ovsim {

namespace {

constexpr sim_ms        k_contention_wait = 30; // drop a tracked RNTI without contention resolution
constexpr std::uint16_t k_forged_grant    = 100;

} // namespace

const char* attack_kind_name(attack_kind k)
{
  switch (k) {
  case attack_kind::sniffer: return "sniffer";
  case attack_kind::downlink_dos: return "downlink_dos";
  case attack_kind::uplink_dos: return "uplink_dos";
  case attack_kind::imsi_extractor: return "imsi_extractor";
  case attack_kind::tmsi_intersection: return "tmsi_intersection";
  }
  return "?";
}

std::optional<attack_kind> parse_attack_kind(std::string_view s)
{
  for (auto k : {attack_kind::sniffer, attack_kind::downlink_dos, attack_kind::uplink_dos,
                 attack_kind::imsi_extractor, attack_kind::tmsi_intersection}) {
    if (s == attack_kind_name(k)) {
      return k;
    }
  }
  return std::nullopt;
}

void attack_plan::validate() const
{
  if (rlc_delta_max < 1 || rlc_delta_max > codec::k_max_sn) {
    throw std::invalid_argument("rlc_delta_max must be in [1, 1023]");
  }
  if (static_ta_us && *static_ta_us < 0.0) {
    throw std::invalid_argument("static timing advance must be non-negative");
  }
  if (stacks < 1) {
    throw std::invalid_argument("attacker needs at least one stack");
  }
  if (max_tracked < 1) {
    throw std::invalid_argument("max_tracked must be positive");
  }
  if (dos_duration <= 0 || stack_hold <= 0) {
    throw std::invalid_argument("attack durations must be positive");
  }
  if (kind == attack_kind::uplink_dos && !blocked_imsi.empty() && !codec::is_valid_imsi(blocked_imsi)) {
    throw std::invalid_argument("blocked_imsi must be 15 digits");
  }
  if (kind == attack_kind::tmsi_intersection) {
    const auto& i = intersection;
    if (i.phone_target.empty()) {
      throw std::invalid_argument("intersection attack needs a phone target");
    }
    if (i.max_sms < 1 || i.margin < 1) {
      throw std::invalid_argument("intersection max_sms and margin must be positive");
    }
    if (i.gap_min <= 0 || i.gap_max < i.gap_min) {
      throw std::invalid_argument("intersection SMS gap range is empty");
    }
    if (i.window_start < 0 || i.window_end < i.window_start) {
      throw std::invalid_argument("intersection window is empty");
    }
    if (i.window_end >= i.gap_min) {
      throw std::invalid_argument("intersection window must close before the next SMS");
    }
  }
}

attacker_node::attacker_node(simulator& sim, phy::node_id id, std::string name, attack_plan plan,
                             phy::node_id cell, mme* core) :
  node(sim, id, std::move(name)),
  plan_(std::move(plan)),
  cell_(cell),
  core_(core),
  rng_(sim.derive_rng("attacker." + this->name())),
  whitelist_(plan_.whitelist),
  ledger_(plan_.intersection.window_start, plan_.intersection.window_end)
{
  plan_.validate();
  ta_us_ = plan_.static_ta_us.value_or(2.0 * phy::propagation_delay_us(phy::distance_m(sim.channel(), id, cell)));
  if (uplink_kind()) {
    stacks_.resize(plan_.stacks);
    sim_.add_uplink_observer(
        [this](std::uint64_t tti, std::uint16_t rnti, const codec::bytes& sdu) { on_uplink_sdu(tti, rnti, sdu); });
  }
  if (plan_.kind == attack_kind::tmsi_intersection) {
    if (core_ == nullptr) {
      throw std::invalid_argument("intersection attack needs the SMS gateway");
    }
    sim_.schedule_at(static_cast<std::uint64_t>(plan_.intersection.start), [this] { send_next_sms(); });
  }
  auto ev = sim_.log().emit(sim_.tti(), this->name(), "attacker_ready");
  ev.add("kind", attack_kind_name(plan_.kind)).add("tx_dbm", plan_.tx_power_dbm).add("ta_us", ta_us_);
  ev.add("stacks", static_cast<unsigned>(stacks_.size()));
}

bool attacker_node::uplink_kind() const
{
  return plan_.kind == attack_kind::uplink_dos || plan_.kind == attack_kind::imsi_extractor;
}

bool attacker_node::attach_procedure(const connection& c) const
{
  return c.cause.value_or(codec::establishment_cause::mo_signalling) == codec::establishment_cause::mo_signalling;
}

std::size_t attacker_node::engaged_stacks() const
{
  return static_cast<std::size_t>(std::count_if(stacks_.begin(), stacks_.end(), [](const auto& s) { return s.has_value(); }));
}

bool attacker_node::busy() const
{
  return std::any_of(conns_.begin(), conns_.end(), [](const auto& kv) { return kv.second.dl_active; });
}

bool attacker_node::interested(const phy::slot_key& key) const
{
  if (key.dir != phy::direction::downlink) {
    return false;
  }
  if (plan_.kind == attack_kind::tmsi_intersection) {
    return key.rnti == phy::k_paging_rnti && !intersection_done_;
  }
  return key.rnti == phy::k_ra_rnti || conns_.count(key.rnti) != 0;
}

// ---------------------------------------------------------------------------
// Sniffer

void attacker_node::on_receive(const delivery& d)
{
  std::vector<codec::mac_pdu> pdus;
  try {
    pdus = codec::decode_transport_block(d.tx->payload);
  } catch (const codec::codec_error&) {
    return;
  }

  if (d.tx->rnti == phy::k_paging_rnti) {
    for (const auto& pdu : pdus) {
      if (const auto* p = std::get_if<codec::payload>(&pdu)) {
        for (const auto& seg : p->segments) {
          try {
            const auto msg = codec::decode_rrc(seg.data);
            if (const auto* pg = std::get_if<codec::paging>(&msg)) {
              on_paging(*pg);
            }
          } catch (const codec::codec_error&) {
          }
        }
      }
    }
    return;
  }

  if (d.tx->rnti == phy::k_ra_rnti) {
    for (const auto& pdu : pdus) {
      if (const auto* rar = std::get_if<codec::random_access_response>(&pdu)) {
        track(*rar);
      }
    }
    return;
  }

  const std::uint16_t rnti = d.tx->rnti;
  for (const auto& pdu : pdus) {
    auto it = conns_.find(rnti);
    if (it == conns_.end()) {
      return;
    }
    auto& c = it->second;
    if (const auto* cr = std::get_if<codec::contention_resolution>(&pdu)) {
      on_contention(c, *cr);
    } else if (const auto* p = std::get_if<codec::payload>(&pdu)) {
      auto& rx = p->lcid == codec::k_lcid_ccch ? c.dl_ccch : c.dl_srb1;
      for (const auto& seg : p->segments) {
        for (const auto& sdu : rx.push(seg)) {
          if (p->lcid == codec::k_lcid_ccch) {
            try {
              const auto msg = codec::decode_rrc(sdu);
              if (const auto* setup = std::get_if<codec::connection_setup>(&msg)) {
                on_setup(c, setup->dedicated_config);
              }
            } catch (const codec::codec_error&) {
            }
          } else {
            on_downlink_sdu(c, sdu);
          }
          if (conns_.count(rnti) == 0) {
            return;
          }
        }
      }
    } else if (const auto* g = std::get_if<codec::uplink_grant>(&pdu)) {
      on_grant(c, *g);
    }
  }
}

void attacker_node::track(const codec::random_access_response& rar)
{
  if (conns_.count(rar.rnti) != 0) {
    untrack(rar.rnti, "rnti_reused");
  }
  if (conns_.size() >= plan_.max_tracked) {
    sim_.log().emit(sim_.tti(), name(), "track_overflow").add("rnti", rar.rnti);
    return;
  }
  connection c;
  c.rnti  = rar.rnti;
  c.since = sim_.tti();
  if (uplink_kind()) {
    auto free = std::find_if(stacks_.begin(), stacks_.end(), [](const auto& s) { return !s.has_value(); });
    if (free == stacks_.end()) {
      auto ev = sim_.log().emit(sim_.tti(), name(), "pool_exhausted");
      ev.add("rnti", rar.rnti).add("stacks", static_cast<unsigned>(stacks_.size()));
      return;
    }
    *free   = rar.rnti;
    c.stack = static_cast<unsigned>(free - stacks_.begin());
  }
  auto ev = sim_.log().emit(sim_.tti(), name(), "track");
  ev.add("rnti", rar.rnti).add("preamble", rar.preamble);
  if (c.stack) {
    ev.add("stack", *c.stack);
  }
  conns_.emplace(rar.rnti, std::move(c));

  const auto rnti  = rar.rnti;
  const auto since = sim_.tti();
  sim_.schedule_in(k_contention_wait, [this, rnti, since] {
    auto it = conns_.find(rnti);
    if (it != conns_.end() && it->second.since == since && !it->second.identity) {
      untrack(rnti, "no_contention_resolution");
    }
  });
}

void attacker_node::untrack(std::uint16_t rnti, const char* reason)
{
  auto it = conns_.find(rnti);
  if (it == conns_.end()) {
    return;
  }
  if (it->second.stack) {
    stacks_[*it->second.stack].reset();
  }
  auto ev = sim_.log().emit(sim_.tti(), name(), "untrack");
  ev.add("rnti", rnti).add("reason", reason);
  if (it->second.stack) {
    ev.add("stack", *it->second.stack);
  }
  conns_.erase(it);
}

void attacker_node::on_contention(connection& c, const codec::contention_resolution& cr)
{
  if (c.identity) {
    return;
  }
  codec::connection_request req;
  try {
    req = codec::request_from_contention_id(cr.id);
  } catch (const codec::codec_error&) {
    untrack(c.rnti, "bad_contention_id");
    return;
  }
  c.identity = req.identity;
  c.cause    = req.cause;

  const auto* tmsi = std::get_if<codec::tmsi_id>(&req.identity);
  if (tmsi != nullptr) {
    c.targeted = (!plan_.targets || plan_.targets->count(tmsi->value) != 0) && whitelist_.count(tmsi->value) == 0;
  } else {
    c.targeted = !plan_.targets.has_value();
  }

  auto ev = sim_.log().emit(sim_.tti(), name(), "learned");
  ev.add("rnti", c.rnti).add("identity", codec::describe(req.identity)).add("cause", codec::to_string(req.cause));
  ev.add("procedure", attach_procedure(c) ? "attach" : "service").add("targeted", c.targeted);

  if (!c.targeted && plan_.kind != attack_kind::sniffer) {
    untrack(c.rnti, tmsi != nullptr && whitelist_.count(tmsi->value) != 0 ? "whitelisted" : "not_targeted");
  }
}

void attacker_node::on_setup(connection& c, const codec::bytes& config)
{
  if (c.config) {
    return;
  }
  c.config = config;
  sim_.log().emit(sim_.tti(), name(), "setup_seen").add("rnti", c.rnti).add("config", codec::to_hex(config));
  if (!c.targeted) {
    return;
  }
  if (plan_.kind == attack_kind::downlink_dos) {
    c.dl_active = true;
    c.dl_start  = sim_.tti() + 1;
    c.dl_end    = c.dl_start + static_cast<std::uint64_t>(plan_.dos_duration);
    auto ev     = sim_.log().emit(sim_.tti(), name(), "attack_start");
    ev.add("rnti", c.rnti).add("mode", "downlink").add("procedure", attach_procedure(c) ? "attach" : "service");
    ev.add("first_t", c.dl_start);
  } else if (uplink_kind()) {
    c.ul_armed = true;
  }
}

void attacker_node::on_grant(connection& c, const codec::uplink_grant& g)
{
  if (!c.ul_armed || c.ul_done || g.rnti != c.rnti) {
    return;
  }
  if (!c.config) {
    sim_.log().emit(sim_.tti(), name(), "attack_aborted").add("rnti", c.rnti).add("reason", "missing_setup");
    untrack(c.rnti, "aborted");
    return;
  }
  inject_uplink(c, g);
}

void attacker_node::on_downlink_sdu(connection& c, const codec::bytes& sdu)
{
  const auto l = codec::detect_layer(sdu);
  try {
    if (l == codec::layer::rrc) {
      if (std::holds_alternative<codec::connection_release>(codec::decode_rrc(sdu))) {
        untrack(c.rnti, "release");
      }
      return;
    }
    if (l != codec::layer::nas) {
      return;
    }
    const auto msg = codec::decode_nas(sdu);
    sim_.log().emit(sim_.tti(), name(), "sniffed").add("rnti", c.rnti).add("msg", codec::message_name(msg));
    if (plan_.kind == attack_kind::imsi_extractor && c.ul_done && std::holds_alternative<codec::identity_request>(msg)) {
      if (const auto* t = c.identity ? std::get_if<codec::tmsi_id>(&*c.identity) : nullptr) {
        if (whitelist_.insert(t->value).second) {
          sim_.log().emit(sim_.tti(), name(), "whitelist").hex("tmsi", t->value);
        }
      }
    }
  } catch (const codec::codec_error&) {
  }
}

// ---------------------------------------------------------------------------
// Uplink injection

void attacker_node::inject_uplink(connection& c, const codec::uplink_grant& g)
{
  codec::nas_message nas;
  if (plan_.kind == attack_kind::imsi_extractor) {
    codec::attach_request ar;
    ar.identity     = codec::tmsi_id{static_cast<std::uint32_t>(rng_.next_u64())};
    ar.capabilities = codec::capability_vector{};
    nas             = ar;
  } else if (attach_procedure(c)) {
    if (plan_.blocked_imsi.empty()) {
      sim_.log().emit(sim_.tti(), name(), "attack_skipped").add("rnti", c.rnti).add("reason", "no_blocked_imsi");
      return;
    }
    nas = codec::attach_request{codec::imsi_id{plan_.blocked_imsi}, codec::capability_vector{0xffffffffu}};
  } else {
    // Any MAC will do as long as it is not the victim's.
    nas = codec::service_request{static_cast<std::uint8_t>(rng_.next_u64()),
                                 static_cast<std::uint16_t>(rng_.next_u64())};
  }
  const auto sdu = codec::encode(codec::rrc_message{codec::connection_setup_complete{codec::encode(nas)}});
  rlc_tx     tx_queue;
  tx_queue.enqueue(sdu);

  phy::transmission tx;
  tx.source            = id();
  tx.dir               = phy::direction::uplink;
  tx.rnti              = c.rnti;
  tx.at                = g.at;
  tx.tx_power_dbm      = plan_.tx_power_dbm;
  tx.timing_offset_us  = plan_.timing_offset_us;
  tx.timing_advance_us = ta_us_;
  tx.payload = codec::encode(codec::mac_pdu{codec::payload{codec::k_lcid_srb1, tx_queue.take(g.size_bytes)}});
  sim_.transmit(std::move(tx));
  c.ul_done = true;

  auto ev = sim_.log().emit(sim_.tti(), name(), "inject");
  ev.add("rnti", c.rnti).add("stack", c.stack.value_or(0)).add("slot_t", g.at.index());
  ev.add("msg", codec::message_name(nas)).add("hex", codec::to_hex(codec::encode(nas)));

  const auto rnti = c.rnti;
  sim_.schedule_in(plan_.stack_hold, [this, rnti] {
    auto it = conns_.find(rnti);
    if (it != conns_.end() && it->second.ul_done) {
      untrack(rnti, "stack_hold_elapsed");
    }
  });
}

void attacker_node::on_uplink_sdu(std::uint64_t, std::uint16_t rnti, const codec::bytes& sdu)
{
  if (plan_.kind != attack_kind::imsi_extractor) {
    return;
  }
  auto it = conns_.find(rnti);
  if (it == conns_.end() || !it->second.ul_done || codec::detect_layer(sdu) != codec::layer::nas) {
    return;
  }
  try {
    const auto msg = codec::decode_nas(sdu);
    if (const auto* r = std::get_if<codec::identity_response>(&msg)) {
      if (const auto* imsi = std::get_if<codec::imsi_id>(&r->identity)) {
        auto ev = sim_.log().emit(sim_.tti(), name(), "imsi_extracted");
        ev.add("rnti", rnti).add("imsi", imsi->digits);
        if (it->second.identity) {
          ev.add("identity", codec::describe(*it->second.identity));
        }
      }
    }
  } catch (const codec::codec_error&) {
  }
}

void attacker_node::on_tx_result(const phy::transmission& tx, const node& receiver, const phy::slot_outcome& out,
                                 bool won)
{
  auto it = conns_.find(tx.rnti);
  if (it == conns_.end()) {
    return;
  }
  auto& c = it->second;
  if (c.last_overshadow == won) {
    return;
  }
  c.last_overshadow = won;
  auto ev           = sim_.log().emit(sim_.tti(), name(), "overshadow");
  ev.add("rnti", tx.rnti).add("receiver", receiver.name()).add("result", won ? "ok" : "failed");
  ev.add("outcome", phy::to_string(out.kind)).add("gap_db", out.gap_db);
}

// ---------------------------------------------------------------------------
// Downlink DoS

void attacker_node::send_downlink_attack(connection& c, std::uint64_t tti)
{
  const auto                  sf = tti % 10;
  std::vector<codec::mac_pdu> pdus;

  if (sf == 8 && c.granted && c.last_grant + 8 == tti) {
    const auto pid = static_cast<std::uint8_t>((c.last_grant + 4) % 8);
    pdus.push_back(codec::harq_ack{pid});
    auto ev = sim_.log().emit(sim_.tti(), name(), "forge_harq");
    ev.add("rnti", c.rnti).add("tx_t", tti).add("pid", pid).add("grant_t", c.last_grant);
  }

  const auto ack = static_cast<int>(std::min<std::uint64_t>(plan_.rlc_delta_max, (tti - c.dl_start) / 50));
  pdus.push_back(codec::rlc_status{codec::k_lcid_srb1, static_cast<std::uint16_t>(ack)});
  if (ack != c.last_rlc) {
    c.last_rlc = ack;
    sim_.log().emit(sim_.tti(), name(), "forge_rlc").add("rnti", c.rnti).add("tx_t", tti).add("ack_sn", ack);
  }

  codec::nas_message attack;
  if (attach_procedure(c)) {
    attack = codec::attach_reject{codec::reject_cause{codec::reject_cause::all_services_forbidden}};
  } else {
    attack = codec::service_reject{codec::reject_cause{plan_.service_reject_cause}};
  }
  pdus.push_back(codec::payload{codec::k_lcid_srb1, {codec::rlc_segment{0, true, codec::encode(attack)}}});

  if (sf == 0) {
    pdus.push_back(codec::uplink_grant{subframe_time::from_index(tti + 4), c.rnti, k_forged_grant});
    c.last_grant = tti;
    c.granted    = true;
    auto ev      = sim_.log().emit(sim_.tti(), name(), "forge_grant");
    ev.add("rnti", c.rnti).add("tx_t", tti).add("slot_t", tti + 4);
  }

  phy::transmission tx;
  tx.source           = id();
  tx.dir              = phy::direction::downlink;
  tx.rnti             = c.rnti;
  tx.at               = subframe_time::from_index(tti);
  tx.tx_power_dbm     = plan_.tx_power_dbm;
  tx.timing_offset_us = plan_.timing_offset_us;
  tx.payload          = codec::encode_transport_block(pdus);
  sim_.transmit(std::move(tx));
}

void attacker_node::on_subframe(subframe_time now)
{
  const std::uint64_t tti = now.index() + 1;
  std::vector<std::uint16_t> finished;
  for (auto& [rnti, c] : conns_) {
    if (!c.dl_active || tti < c.dl_start) {
      continue;
    }
    if (tti >= c.dl_end) {
      finished.push_back(rnti);
      continue;
    }
    send_downlink_attack(c, tti);
  }
  for (auto rnti : finished) {
    sim_.log().emit(sim_.tti(), name(), "attack_end").add("rnti", rnti);
    untrack(rnti, "attack_done");
  }
}

// ---------------------------------------------------------------------------
// TMSI intersection

void attacker_node::send_next_sms()
{
  if (intersection_done_) {
    return;
  }
  const auto& cfg = plan_.intersection;
  try {
    core_->send_sms(cfg.phone_target, true);
  } catch (const std::invalid_argument& e) {
    sim_.log().emit(sim_.tti(), name(), "sms_failed").add("error", e.what());
  }
  ledger_.sms_sent(sim_.tti());
  sim_.log().emit(sim_.tti(), name(), "sms_sent").add("n", ledger_.sms_count());
  const auto send_time = sim_.tti();
  sim_.schedule_at(*ledger_.window_closes() + 1, [this, send_time] {
    evaluate_intersection();
    if (intersection_done_) {
      return;
    }
    const auto& cfg = plan_.intersection;
    const auto  gap = rng_.uniform(static_cast<std::uint64_t>(cfg.gap_min), static_cast<std::uint64_t>(cfg.gap_max));
    sim_.schedule_at(send_time + gap, [this] { send_next_sms(); });
  });
}

void attacker_node::evaluate_intersection()
{
  const auto& cfg     = plan_.intersection;
  const auto  ranking = ledger_.ranking();
  if (const auto tmsi = ledger_.decision(cfg.margin)) {
    identified_         = tmsi;
    intersection_done_  = true;
    auto ev             = sim_.log().emit(sim_.tti(), name(), "intersection_result");
    ev.hex("tmsi", *tmsi).add("sms", ledger_.sms_count()).add("hits", ranking[0].hits);
    ev.add("runner_up_hits", ranking.size() > 1 ? ranking[1].hits : 0u).add("candidates", ranking.size());
    ev.add("delay_var_ms2", ranking[0].var_ms2);
  } else if (ledger_.sms_count() >= cfg.max_sms) {
    intersection_done_ = true;
    auto ev            = sim_.log().emit(sim_.tti(), name(), "intersection_inconclusive");
    ev.add("sms", ledger_.sms_count()).add("candidates", ranking.size());
    if (!ranking.empty()) {
      ev.add("top_hits", ranking[0].hits);
    }
  }
  if (intersection_done_ && cfg.stop_when_done) {
    sim_.request_stop();
  }
}

void attacker_node::on_paging(const codec::paging& p)
{
  if (intersection_done_) {
    return;
  }
  for (auto tmsi : p.tmsis) {
    ledger_.page_seen(sim_.tti(), tmsi);
  }
}

} // namespace ovsim
