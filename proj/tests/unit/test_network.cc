#include "util.h"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace ovsim;
using testutil::count;
using testutil::first;
using testutil::run;
using testutil::select;

namespace {

// Passive receiver that records every decodable transport block near a UE.
class tap : public node
{
public:
  tap(simulator& sim, phy::node_id id, std::string name) : node(sim, id, std::move(name)) {}

  bool interested(const phy::slot_key& key) const override { return !key.prach; }
  void on_receive(const delivery& d) override
  {
    try {
      seen.push_back({sim_.tti(), d.tx->dir, d.tx->rnti, d.tx->source, codec::decode_transport_block(d.tx->payload)});
    } catch (const codec::codec_error&) {
    }
  }

  struct tb {
    std::uint64_t                tti;
    phy::direction               dir;
    std::uint16_t                rnti;
    phy::node_id                 source;
    std::vector<codec::mac_pdu> pdus;
  };
  std::vector<tb> seen;
};

constexpr const char* k_base = R"(
seed = 5
horizon = 20s
[enb]
position = 0,0
[ue.u]
imsi = 001010000000020
position = 300,0
)";

std::string with(std::string cfg, const std::string& extra)
{
  return cfg + extra;
}

template <typename T>
const T* find_pdu(const std::vector<codec::mac_pdu>& pdus)
{
  for (const auto& p : pdus) {
    if (const auto* x = std::get_if<T>(&p)) {
      return x;
    }
  }
  return nullptr;
}

// Every SecurityModeCommand echoes the capabilities of the AttachRequest
// that opened the procedure on that RNTI.
void check_capability_replay(const std::vector<event>& log)
{
  std::map<std::string, std::string> opened; // rnti -> caps hex
  for (const auto& e : log) {
    if (e.node == "enb" && e.kind == "ul_sdu" && e.get("msg") == std::optional<std::string_view>{"ConnectionSetupComplete"}) {
      const auto rrc = codec::decode_rrc(codec::from_hex(*e.get("hex")));
      const auto nas = codec::decode_nas(std::get<codec::connection_setup_complete>(rrc).nas_payload);
      if (const auto* ar = std::get_if<codec::attach_request>(&nas)) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "0x%08lx", ar->capabilities.to_ulong());
        opened[std::string(*e.get("rnti"))] = buf;
      }
    }
    if (e.kind == "smc_replay") {
      const auto it = opened.find(std::string(*e.get("rnti")));
      REQUIRE(it != opened.end());
      CHECK(e.get("caps") == std::optional<std::string_view>{it->second});
    }
  }
}

} // namespace

TEST_SUITE("network")
{
  TEST_CASE("TPC controller rule")
  {
    CHECK(tpc_step_for_error(2.0) == -1);
    CHECK(tpc_step_for_error(1.01) == -1);
    CHECK(tpc_step_for_error(1.0) == 0);
    CHECK(tpc_step_for_error(0.0) == 0);
    CHECK(tpc_step_for_error(-1.0) == 0);
    CHECK(tpc_step_for_error(-1.5) == 1);
    CHECK(tpc_step_for_error(-3.0) == 1);
    CHECK(tpc_step_for_error(-3.5) == 3);
  }

  TEST_CASE("received power converges to target within 50 subframes")
  {
    // Downward steps are 1 dB per grant period, so +8 dB is the largest
    // overshoot that can be worked off in 50 subframes.
    for (double bias : {-12.0, -8.0, -4.0, 4.0, 6.0, 8.0}) {
      CAPTURE(bias);
      scenario s(load_config(with(k_base, "pl_error_db = " + std::to_string(bias) + "\n")));
      std::optional<std::uint64_t> setup;
      while (s.sim().tti() < 5000) {
        s.run_until(s.sim().tti() + 1);
        if (!setup) {
          if (auto e = first(s.sim().log().events(), "rrc_setup")) {
            setup = e->tti;
          }
          continue;
        }
        if (s.sim().tti() == *setup + 50) {
          break;
        }
      }
      REQUIRE(setup);
      const auto rnti = s.ue("u")->rnti();
      REQUIRE(rnti);
      const auto err = s.enb().tpc_error_db(*rnti);
      REQUIRE(err);
      CHECK(std::abs(*err) <= 1.0);
    }
  }

  TEST_CASE("HARQ acks follow uplink transport blocks by exactly 8 subframes")
  {
    scenario s(load_config(k_base));
    auto&    t = s.sim().emplace_node<tap>("tap", {301, 0});
    s.run();
    // Blocks still in flight when the cell frees the RNTI are never acked.
    std::multimap<std::uint16_t, std::uint64_t> freed;
    for (const auto& e : select(s.sim().log().events(), "rnti_free")) {
      freed.emplace(static_cast<std::uint16_t>(*e.number("rnti")), e.tti);
    }
    auto in_flight_at_release = [&](std::uint16_t rnti, std::uint64_t tti) {
      auto [lo, hi] = freed.equal_range(rnti);
      return std::any_of(lo, hi, [&](const auto& kv) { return kv.second < tti + 8 && kv.second + 8 > tti; });
    };
    unsigned checked = 0;
    for (const auto& ul : t.seen) {
      if (ul.dir != phy::direction::uplink || ul.tti + 8 > s.sim().tti() || in_flight_at_release(ul.rnti, ul.tti)) {
        continue;
      }
      bool acked = false;
      for (const auto& dl : t.seen) {
        if (dl.dir == phy::direction::downlink && dl.rnti == ul.rnti && dl.tti == ul.tti + 8) {
          const auto* ack = find_pdu<codec::harq_ack>(dl.pdus);
          acked           = ack != nullptr && ack->process_id == ul.tti % 8;
        }
      }
      CAPTURE(ul.tti);
      CHECK(acked);
      ++checked;
    }
    CHECK(checked > 10);
    // (frame 0, sf 2) pairs with (frame 1, sf 0).
    CHECK(subframe_time{0, 2}.plus(8) == subframe_time{1, 0});
  }

  TEST_CASE("RLC status never runs ahead of what was sent")
  {
    scenario s(load_config(k_base));
    auto&    t = s.sim().emplace_node<tap>("tap", {301, 0});
    s.run();
    int      max_sent = -1;
    unsigned reports  = 0;
    for (const auto& tb : t.seen) {
      if (tb.dir == phy::direction::uplink) {
        if (const auto* p = find_pdu<codec::payload>(tb.pdus); p && p->lcid == codec::k_lcid_srb1) {
          for (const auto& seg : p->segments) {
            max_sent = std::max<int>(max_sent, seg.sn);
          }
        }
      } else if (const auto* st = find_pdu<codec::rlc_status>(tb.pdus)) {
        CHECK(static_cast<int>(st->ack_sn) <= max_sent);
        ++reports;
      }
    }
    CHECK(reports > 0);
  }

  TEST_CASE("RAR timing advance matches distance")
  {
    for (auto [x, ta] : {std::pair{"3900", "26.04"}, std::pair{"860", "5.73"}}) {
      std::string cfg = k_base;
      cfg.replace(cfg.find("300,0"), 5, std::string(x) + ",0");
      const auto res = run(cfg);
      CAPTURE(x);
      CHECK(count(res.events, std::string("rar node=enb ta_us=") + ta) >= 1);
    }
  }

  TEST_CASE("attach outcomes at the MME")
  {
    const auto blocked = run(with(k_base, "[mme]\nblocked_imsis = 00101000000002*\n"));
    CHECK(count(blocked.events, "mme_tx msg=AttachReject hex=44000108") >= 1);
    CHECK(count(blocked.events, "mme_tx msg=AuthenticationRequest") == 0);

    const auto unknown = run(with(k_base, "tmsi = 0x77777777\n"));
    const auto rx      = first(unknown.events, "mme_rx msg=AttachRequest");
    REQUIRE(rx);
    const auto tx = first(unknown.events, "mme_tx t>=" + std::to_string(rx->tti));
    REQUIRE(tx);
    CHECK(tx->get("msg") == std::optional<std::string_view>{"IdentityRequest"});

    const auto stranger = run(with(k_base, "subscribed = false\n"));
    CHECK(count(stranger.events, "mme_tx msg=AttachReject hex=44000103") >= 1);
  }

  TEST_CASE("establishment cause check drops mismatched attaches silently")
  {
    const std::string cfg = with(k_base, "tmsi = 0x0badcafe\nregistered = true\n"
                                         "[hardening]\nestablishment_cause_check = true\n"
                                         "[attacker.x]\nkind = imsi_extractor\nposition = 400,0\n"
                                         "[action.wake]\nat = 2s\ntype = start_data\ntarget = u\n");
    const auto res = run(cfg);
    CHECK(count(res.events, "attack_detected node=mme method=cause_mismatch") >= 1);
    CHECK(count(res.events, "mme_tx msg=AttachReject") == 0);
    CHECK(count(res.events, "mme_tx msg=IdentityRequest") == 0);
  }

  TEST_CASE("service request MAC decides between resume, reject and silence")
  {
    const std::string wake = "tmsi = 0x1234abcd\nregistered = true\n[action.wake]\nat = 2s\ntype = start_data\ntarget = u\n";
    const auto        ok   = run(with(k_base, wake));
    CHECK(count(ok.events, "mme_tx msg=SecurityModeCommand") == 1);
    CHECK(count(ok.events, "service_resumed") == 1);

    const std::string attacker = "[attacker.x]\nkind = uplink_dos\nposition = 400,0\ntargets = u\n";
    const auto        bad      = run(with(k_base, wake + attacker));
    CHECK(count(bad.events, "mme_tx msg=ServiceReject hex=46000109") == 1);

    const auto hardened = run(with(k_base, wake + attacker + "[hardening]\nsilent_drop_invalid_service_mac = true\n"));
    CHECK(count(hardened.events, "mme_tx msg=ServiceReject") == 0);
    CHECK(count(hardened.events, "attack_detected node=mme method=invalid_service_mac") == 1);
  }

  TEST_CASE("persistent rejects can be suppressed")
  {
    const auto res = run(with(k_base, "[mme]\nblocked_imsis = 001010000000020\n[hardening]\nnever_send_persistent_rejects = true\n"));
    CHECK(count(res.events, "reject_suppressed cause=8") >= 1);
    CHECK(count(res.events, "mme_tx msg=AttachReject") == 0);
    CHECK(count(res.events, "dos_blocked") == 0);
  }

  TEST_CASE("SMS gateway pages registered subscribers and refuses others")
  {
    const auto res = run(with(k_base, "tmsi = 0x0badcafe\nregistered = true\n"
                                      "[action.sms]\nat = 1s\ntype = send_sms\ntarget = u\n"));
    const auto submit = first(res.events, "sms_submit");
    const auto page   = first(res.events, "page node=mme tmsi=0x0badcafe");
    REQUIRE(submit);
    REQUIRE(page);
    CHECK(page->tti - submit->tti == static_cast<std::uint64_t>(*submit->number("latency_ms")));
    CHECK(page->tti - submit->tti >= 1000);
    CHECK(page->tti - submit->tti <= 3000);

    const auto fresh = run(with(k_base, "power_on = never\n[action.sms]\nat = 1s\ntype = send_sms\ntarget = u\n"));
    CHECK(count(fresh.events, "action_failed name=sms") == 1);
  }

  TEST_CASE("a blocked UE never answers its pages")
  {
    const auto res = run(with(k_base, "tmsi = 0x0badcafe\nregistered = true\n"
                                      "[attacker.m]\nkind = downlink_dos\nposition = 301,0\n"
                                      "[action.wake]\nat = 1s\ntype = start_data\ntarget = u\n"
                                      "[action.sms]\nat = 10s\ntype = send_sms\ntarget = u\n"));
    const auto blocked = first(res.events, "dos_blocked node=u");
    REQUIRE(blocked);
    CHECK(count(res.events, "page node=mme t>" + std::to_string(blocked->tti)) == 1);
    CHECK(count(res.events, "paged node=u") == 0);
  }

  TEST_CASE("background paging runs at the configured rate")
  {
    std::string cfg = with(k_base, "tmsi = 0xf0000001\nregistered = true\n");
    cfg.replace(cfg.find("[enb]\n"), 6, "[enb]\nbackground_paging_rate = 350\n");
    scenario s(load_config(cfg));
    auto& t = s.sim().emplace_node<tap>("tap", {301, 0});
    s.run();
    std::size_t records = 0;
    for (const auto& tb : t.seen) {
      if (tb.rnti != phy::k_paging_rnti) {
        continue;
      }
      CHECK(tb.tti % 10 == 0);
      const auto* p = find_pdu<codec::payload>(tb.pdus);
      REQUIRE(p != nullptr);
      records += std::get<codec::paging>(codec::decode_rrc(p->segments.at(0).data)).tmsis.size();
    }
    // 20 s at 350/s; Poisson spread is about 84.
    CHECK(records > 7000 - 400);
    CHECK(records < 7000 + 400);
  }

  TEST_CASE("decoy RNTIs stay out of the UE pool")
  {
    enb_config c;
    c.rnti_last = k_decoy_rnti_base;
    mme_config m;
    simulator  sim({}, 1);
    CHECK_THROWS_AS(sim.emplace_node<enb_node>("enb", {0, 0}, c, m), std::invalid_argument);

    const auto res = run(with(k_base, "[hardening]\ndecoy_trap = true\ndecoy_start = 1s\ndecoy_interval = 3s\n"));
    CHECK(count(res.events, "decoy_start rnti>=65280") >= 5);
    CHECK(count(res.events, "rar node=enb rnti>=65280") == 0);
    CHECK(count(res.events, "attack_detected") == 0);
  }

  TEST_CASE("blocked IMSI search draws until a hit")
  {
    scenario_config cfg = load_config(with(k_base, "[mme]\nblocked_imsis = 0010100000001*\n"));
    scenario        s(cfg);
    rng             r(4);
    const auto      hit = s.enb().core().search_blocked_imsi("00101000000", 10000, r);
    REQUIRE(hit);
    CHECK(hit->first.rfind("0010100000001", 0) == 0);
    CHECK(s.enb().core().is_blocked(hit->first));
    CHECK_FALSE(s.enb().core().is_blocked("001010000000020"));
    CHECK_FALSE(s.enb().core().search_blocked_imsi("99999", 500, r).has_value());
  }

  TEST_CASE("security mode commands replay the attach capabilities")
  {
    check_capability_replay(run(k_base).events);
    check_capability_replay(run(with(k_base, "capabilities = 0x0000beef\n")).events);
    check_capability_replay(run(with(k_base, "tmsi = 0x0badcafe\nregistered = true\n"
                                             "[attacker.x]\nkind = imsi_extractor\nposition = 400,0\n"
                                             "[action.wake]\nat = 2s\ntype = start_data\ntarget = u\n"))
                                .events);
  }
}
