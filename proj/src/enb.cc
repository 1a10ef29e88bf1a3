#include "ovsim/network.h"

#include <algorithm>
#include <cmath>

namespace ovsim {

std::int8_t tpc_step_for_error(double error_db)
{
  if (error_db > 1.0) {
    return -1;
  }
  if (error_db < -3.0) {
    return 3;
  }
  if (error_db < -1.0) {
    return 1;
  }
  return 0;
}

enb_node::enb_node(simulator& sim, phy::node_id id, std::string name, enb_config cfg, mme_config mme_cfg) :
  node(sim, id, std::move(name)),
  cfg_(cfg),
  mme_(sim, *this, std::move(mme_cfg)),
  rng_(sim.derive_rng("enb." + this->name())),
  next_rnti_(cfg.rnti_first)
{
  if (cfg_.rnti_first < 3 || cfg_.rnti_last >= k_decoy_rnti_base || cfg_.rnti_first > cfg_.rnti_last) {
    throw std::invalid_argument("RNTI pool must lie within [3, 0xfeff]");
  }
  if (cfg_.grant_period <= 0 || cfg_.grant_bytes < 16) {
    throw std::invalid_argument("grant period must be positive and grants at least 16 bytes");
  }
  sim_.set_reference_carrier({this->id(), cfg_.tx_power_dbm});
  const auto& h = mme_.config().hardening;
  if (h.decoy_trap) {
    sim_.schedule_at(static_cast<std::uint64_t>(h.decoy_start), [this] { start_decoy(); });
  }
  if (cfg_.background_paging_rate < 0.0) {
    throw std::invalid_argument("background paging rate must be non-negative");
  }
  if (cfg_.background_paging_rate > 0.0) {
    schedule_paging_wake(9);
  }
}

// Background paging needs a tick before every paging occasion; a timer keeps
// the simulator from fast-forwarding over them without marking the cell busy.
void enb_node::schedule_paging_wake(std::uint64_t tti)
{
  sim_.schedule_at(tti, [this, tti] { schedule_paging_wake(tti + 10); });
}

bool enb_node::interested(const phy::slot_key& key) const
{
  return key.dir == phy::direction::uplink;
}

bool enb_node::busy() const
{
  return !ctx_.empty() || !rars_.empty() || !pages_.empty();
}

std::optional<double> enb_node::tpc_error_db(std::uint16_t rnti) const
{
  auto it = ctx_.find(rnti);
  if (it == ctx_.end()) {
    return std::nullopt;
  }
  return it->second.last_error_db;
}

std::optional<std::uint16_t> enb_node::allocate_rnti()
{
  const unsigned span = cfg_.rnti_last - cfg_.rnti_first + 1u;
  for (unsigned i = 0; i < span; ++i) {
    const std::uint16_t r = next_rnti_;
    next_rnti_            = r == cfg_.rnti_last ? cfg_.rnti_first : static_cast<std::uint16_t>(r + 1);
    if (ctx_.count(r) == 0) {
      return r;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Uplink

void enb_node::on_receive(const delivery& d)
{
  if (d.tx->prach) {
    handle_prach(d);
    return;
  }
  auto it = ctx_.find(d.tx->rnti);
  if (it == ctx_.end()) {
    return;
  }
  handle_uplink(it->second, d);
}

void enb_node::handle_prach(const delivery& d)
{
  const auto preamble = d.tx->payload.front();
  const auto rnti     = allocate_rnti();
  if (!rnti) {
    sim_.log().emit(sim_.tti(), name(), "rnti_pool_exhausted").add("preamble", preamble);
    return;
  }
  const double offset = std::max(0.0, d.arrival_offset_us);
  const auto   steps  = static_cast<std::uint16_t>(std::lround(offset / codec::k_ta_step_us));

  ue_ctx ctx;
  ctx.rnti          = *rnti;
  ctx.created       = sim_.tti();
  ctx.last_activity = sim_.tti();
  ctx_.emplace(*rnti, std::move(ctx));
  if (rars_.empty()) {
    rar_due_ = sim_.tti() + 2;
  }
  rars_.push_back({preamble, *rnti, steps});

  auto ev = sim_.log().emit(sim_.tti(), name(), "rar");
  ev.add("rnti", *rnti).add("preamble", preamble).add("ta_steps", steps).add("ta_us", steps * codec::k_ta_step_us);
}

void enb_node::handle_uplink(ue_ctx& ctx, const delivery& d)
{
  const auto now = sim_.tti();

  if (ctx.decoy) {
    auto ev = sim_.log().emit(now, name(), "attack_detected");
    ev.add("method", "decoy").add("rnti", ctx.rnti).add("rx_dbm", d.rx_power_dbm);
    return;
  }

  std::vector<codec::mac_pdu> pdus;
  try {
    pdus = codec::decode_transport_block(d.tx->payload);
  } catch (const codec::codec_error& e) {
    sim_.log().emit(now, name(), "ul_malformed").add("rnti", ctx.rnti).add("error", e.what());
    return;
  }

  const std::uint16_t rnti     = ctx.rnti;
  bool                carried = false;
  for (const auto& pdu : pdus) {
    const auto* p = std::get_if<codec::payload>(&pdu);
    if (p == nullptr) {
      continue;
    }
    carried = carried || !p->segments.empty();
    for (const auto& seg : p->segments) {
      auto& rx = p->lcid == codec::k_lcid_ccch ? ctx.ul_ccch : ctx.ul_srb1;
      for (const auto& sdu : rx.push(seg)) {
        handle_sdu(ctx, p->lcid, sdu);
        if (ctx_.count(rnti) == 0) {
          return;
        }
      }
    }
  }

  pending_ack ack{now + 8, static_cast<std::uint8_t>(now % 8), ctx.ul_srb1.highest_contiguous()};
  ctx.acks.push_back(ack);
  // Padding keeps power control going but is not activity.
  if (carried) {
    ctx.last_activity = now;
    ctx.dl_hold_until = std::max(ctx.dl_hold_until, now + 8);
  }

  if (ctx.connected) {
    const double err  = d.rx_power_dbm - cfg_.target_rx_dbm;
    ctx.last_error_db = err;
    ctx.tpc           = tpc_step_for_error(err);
    if (cfg_.ta_loop && now >= ctx.ta_guard_until && std::abs(d.arrival_offset_us) > codec::k_ta_step_us) {
      const long steps = std::lround(d.arrival_offset_us / codec::k_ta_step_us);
      ctx.ta           = static_cast<std::int8_t>(std::clamp(steps, -31L, 32L));
      ctx.ta_guard_until = now + 20;
    }
  }
}

void enb_node::handle_sdu(ue_ctx& ctx, std::uint8_t lcid, const codec::bytes& sdu)
{
  const auto now = sim_.tti();
  sim_.notify_uplink_sdu(ctx.rnti, sdu);
  try {
    const auto l = codec::detect_layer(sdu);
    if (l == codec::layer::rrc) {
      const auto msg = codec::decode_rrc(sdu);
      auto       ev  = sim_.log().emit(now, name(), "ul_sdu");
      ev.add("rnti", ctx.rnti).add("lcid", lcid).add("msg", codec::message_name(msg)).add("hex", codec::to_hex(sdu));
      if (const auto* req = std::get_if<codec::connection_request>(&msg)) {
        if (lcid == codec::k_lcid_ccch && !ctx.request) {
          ctx.request   = *req;
          ctx.setup_due = now + 8;
        }
      } else if (const auto* done = std::get_if<codec::connection_setup_complete>(&msg)) {
        if (ctx.request) {
          mme_.on_initial_nas(ctx.rnti, *ctx.request, done->nas_payload);
        }
      }
      return;
    }
    if (l == codec::layer::nas) {
      const auto msg = codec::decode_nas(sdu);
      auto       ev  = sim_.log().emit(now, name(), "ul_sdu");
      ev.add("rnti", ctx.rnti).add("lcid", lcid).add("msg", codec::message_name(msg)).add("hex", codec::to_hex(sdu));
      mme_.on_uplink_nas(ctx.rnti, sdu);
      return;
    }
  } catch (const codec::codec_error& e) {
    sim_.log().emit(now, name(), "ul_malformed").add("rnti", ctx.rnti).add("error", e.what());
    return;
  }
  sim_.log().emit(now, name(), "ul_malformed").add("rnti", ctx.rnti).add("error", "unknown layer");
}

// ---------------------------------------------------------------------------
// MME-facing

void enb_node::send_nas(std::uint16_t rnti, const codec::bytes& nas)
{
  auto it = ctx_.find(rnti);
  if (it != ctx_.end() && !it->second.release_queued) {
    it->second.dl_srb1.enqueue(nas);
  }
}

void enb_node::release(std::uint16_t rnti)
{
  auto it = ctx_.find(rnti);
  if (it == ctx_.end() || it->second.release_queued) {
    return;
  }
  it->second.dl_srb1.enqueue(codec::encode(codec::rrc_message{codec::connection_release{}}));
  it->second.release_queued = true;
}

void enb_node::page(std::uint32_t tmsi)
{
  pages_.push_back(tmsi);
}

std::uint32_t enb_node::background_tmsi(std::uint64_t index) const
{
  // Fixed pseudo-random population so repeated draws of one index page the same TMSI.
  std::uint64_t x = index + 0x9e3779b97f4a7c15ull;
  x               = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x               = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return static_cast<std::uint32_t>(x ^ (x >> 31));
}

void enb_node::start_decoy()
{
  const auto& h    = mme_.config().hardening;
  const auto  rnti = static_cast<std::uint16_t>(k_decoy_rnti_base + (decoy_count_++ % 0xff));
  const auto  now  = sim_.tti();

  ue_ctx ctx;
  ctx.rnti          = rnti;
  ctx.decoy         = true;
  ctx.created       = now;
  ctx.last_activity = now;
  ctx.decoy_end     = now + static_cast<std::uint64_t>(h.decoy_window);
  ctx.request       = codec::connection_request{codec::random_id{rng_.next_u64() & codec::k_random_id_mask},
                                          codec::establishment_cause::mo_signalling};
  ctx.setup_due     = now + 9;
  ctx_[rnti]        = std::move(ctx);
  if (rars_.empty()) {
    rar_due_ = now + 1;
  }
  rars_.push_back({k_decoy_preamble, rnti, 0});
  sim_.log().emit(now, name(), "decoy_start").add("rnti", rnti).add("window_ms", h.decoy_window);
  sim_.schedule_in(h.decoy_interval, [this] { start_decoy(); });
}

// ---------------------------------------------------------------------------
// Downlink scheduling

void enb_node::send_tb(std::uint16_t rnti, std::uint64_t tti, const std::vector<codec::mac_pdu>& pdus)
{
  phy::transmission tx;
  tx.source       = id();
  tx.dir          = phy::direction::downlink;
  tx.rnti         = rnti;
  tx.at           = subframe_time::from_index(tti);
  tx.tx_power_dbm = cfg_.tx_power_dbm;
  tx.payload      = codec::encode_transport_block(pdus);
  sim_.transmit(std::move(tx));
}

void enb_node::build_downlink(ue_ctx& ctx, std::uint64_t tti, std::vector<codec::mac_pdu>& pdus)
{
  std::optional<codec::mac_pdu> grant;
  while (!ctx.acks.empty() && ctx.acks.front().due <= tti) {
    const auto a = ctx.acks.front();
    ctx.acks.pop_front();
    pdus.push_back(codec::harq_ack{a.pid});
    if (a.rlc_sn) {
      pdus.push_back(codec::rlc_status{codec::k_lcid_srb1, *a.rlc_sn});
    }
  }

  if (ctx.setup_due && *ctx.setup_due == tti) {
    ctx.setup_due.reset();
    pdus.push_back(codec::contention_resolution{codec::contention_id(*ctx.request)});
    const codec::bytes config{0x5a, static_cast<std::uint8_t>(ctx.rnti >> 8), static_cast<std::uint8_t>(ctx.rnti),
                              static_cast<std::uint8_t>(cfg_.grant_period)};
    const auto setup = codec::encode(codec::rrc_message{codec::connection_setup{config}});
    pdus.push_back(codec::payload{codec::k_lcid_ccch, codec::segment(setup, setup.size())});
    ctx.connected    = true;
    ctx.connected_at = tti;
    if (!ctx.decoy) {
      auto ev = sim_.log().emit(sim_.tti(), name(), "rrc_setup");
      ev.add("rnti", ctx.rnti).add("identity", codec::describe(ctx.request->identity));
      ev.add("cause", codec::to_string(ctx.request->cause));
    }
  }

  if (ctx.connected && tti > ctx.connected_at &&
      (tti - ctx.connected_at) % static_cast<std::uint64_t>(cfg_.grant_period) == 0) {
    if (ctx.tpc) {
      pdus.push_back(codec::tpc_command{*ctx.tpc});
      ctx.tpc.reset();
    }
    if (ctx.ta) {
      pdus.push_back(codec::ta_command{*ctx.ta});
      ctx.ta.reset();
    }
    grant = codec::uplink_grant{subframe_time::from_index(tti + 4), ctx.rnti, cfg_.grant_bytes};
  }

  if (ctx.connected && tti >= ctx.dl_hold_until && !ctx.dl_srb1.empty()) {
    pdus.push_back(codec::payload{codec::k_lcid_srb1, ctx.dl_srb1.take(cfg_.grant_bytes)});
    if (ctx.release_queued && ctx.dl_srb1.empty()) {
      ctx.free_after_tx = true;
    }
  }
  if (grant) {
    pdus.push_back(*grant);
  }
}

void enb_node::on_subframe(subframe_time now)
{
  const std::uint64_t tti = now.index() + 1;

  if (!rars_.empty() && tti >= rar_due_) {
    std::vector<codec::mac_pdu> pdus;
    for (const auto& r : rars_) {
      pdus.push_back(codec::random_access_response{
          r.preamble, r.rnti, r.ta_steps, codec::uplink_grant{subframe_time::from_index(tti + 4), r.rnti, 56}});
    }
    rars_.clear();
    send_tb(phy::k_ra_rnti, tti, pdus);
  }

  if (tti % 10 == 0) {
    std::vector<std::uint32_t> records;
    records.swap(pages_);
    if (cfg_.background_paging_rate > 0.0) {
      const unsigned n = rng_.poisson(cfg_.background_paging_rate * 0.01);
      for (unsigned i = 0; i < n; ++i) {
        records.push_back(background_tmsi(rng_.uniform(0, cfg_.background_population - 1)));
      }
    }
    if (!records.empty()) {
      const auto msg = codec::encode(codec::rrc_message{codec::paging{records}});
      send_tb(phy::k_paging_rnti, tti,
              {codec::payload{codec::k_lcid_ccch, {codec::rlc_segment{0, true, msg}}}});
    }
  }

  for (auto it = ctx_.begin(); it != ctx_.end();) {
    auto& ctx = it->second;
    if (!ctx.connected && !ctx.decoy && !ctx.setup_due && now.index() - ctx.created > static_cast<std::uint64_t>(cfg_.msg3_timeout)) {
      sim_.log().emit(sim_.tti(), name(), "rnti_free").add("rnti", ctx.rnti).add("reason", "msg3_timeout");
      mme_.on_connection_released(ctx.rnti);
      it = ctx_.erase(it);
      continue;
    }
    if (ctx.decoy && now.index() >= ctx.decoy_end) {
      sim_.log().emit(sim_.tti(), name(), "decoy_end").add("rnti", ctx.rnti);
      it = ctx_.erase(it);
      continue;
    }
    if (ctx.connected && !ctx.decoy && !ctx.release_queued &&
        now.index() - ctx.last_activity >= static_cast<std::uint64_t>(cfg_.inactivity)) {
      release(ctx.rnti);
    }

    std::vector<codec::mac_pdu> pdus;
    build_downlink(ctx, tti, pdus);
    if (!pdus.empty()) {
      send_tb(ctx.rnti, tti, pdus);
    }
    if (ctx.free_after_tx) {
      sim_.log().emit(sim_.tti(), name(), "rnti_free").add("rnti", ctx.rnti).add("reason", "release");
      mme_.on_connection_released(ctx.rnti);
      it = ctx_.erase(it);
      continue;
    }
    ++it;
  }
}

} // namespace ovsim
