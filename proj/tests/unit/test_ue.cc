#include "util.h"

#include "ovsim/ue.h"

#include <doctest.h>

#include <cstdlib>

using namespace ovsim;
using testutil::count;
using testutil::first;
using testutil::run;
using testutil::select;

namespace {

enum class echo_mode { match, mismatch, silent };

// Minimal cell: answers PRACH with a RAR and the ConnectionRequest with a
// contention resolution (correct, corrupted or missing). Nothing further.
class scripted_cell : public node
{
public:
  scripted_cell(simulator& sim, phy::node_id id, std::string name, echo_mode mode) :
    node(sim, id, std::move(name)), mode_(mode)
  {
  }

  bool interested(const phy::slot_key& key) const override { return key.dir == phy::direction::uplink; }

  void on_receive(const delivery& d) override
  {
    if (d.tx->prach) {
      ++prach_seen;
      codec::random_access_response rar;
      rar.preamble = d.tx->payload.at(0);
      rar.rnti     = 61;
      rar.grant    = {sim_.now().plus(4), 61, 100};
      send(phy::k_ra_rnti, {rar});
      return;
    }
    for (const auto& pdu : codec::decode_transport_block(d.tx->payload)) {
      const auto* p = std::get_if<codec::payload>(&pdu);
      if (p == nullptr || p->lcid != codec::k_lcid_ccch) {
        continue;
      }
      const auto req = std::get<codec::connection_request>(codec::decode_rrc(codec::reassemble(p->segments)));
      requests.push_back(req);
      const auto id = codec::contention_id(req);
      if (mode_ == echo_mode::match) {
        send(61, {codec::contention_resolution{id}});
      } else if (mode_ == echo_mode::mismatch) {
        send(61, {codec::contention_resolution{id ^ 1}});
      }
    }
  }

  unsigned                                prach_seen = 0;
  std::vector<codec::connection_request> requests;

private:
  void send(std::uint16_t rnti, const std::vector<codec::mac_pdu>& pdus)
  {
    phy::transmission tx;
    tx.source       = id();
    tx.dir          = phy::direction::downlink;
    tx.rnti         = rnti;
    tx.at           = sim_.now().plus(1);
    tx.tx_power_dbm = 46;
    tx.payload      = codec::encode_transport_block(pdus);
    sim_.transmit(tx);
  }

  echo_mode mode_;
};

struct rig {
  explicit rig(echo_mode mode, std::optional<std::uint32_t> tmsi = std::nullopt) : sim({}, 9)
  {
    cell = &sim.emplace_node<scripted_cell>("cell", {0, 0}, mode);
    ue_config c;
    c.imsi = "001010000000042";
    c.tmsi = tmsi;
    ue     = &sim.emplace_node<ue_node>("ue", {300, 0}, c, cell->id());
    ue->power_on();
  }
  simulator      sim;
  scripted_cell* cell = nullptr;
  ue_node*       ue   = nullptr;
};

std::uint64_t random_value(const std::string& described)
{
  REQUIRE(described.rfind("random:0x", 0) == 0);
  return std::strtoull(described.c_str() + 9, nullptr, 16);
}

constexpr const char* k_base = R"(
seed = 1
horizon = 30s
[enb]
position = 0,0
[ue.u]
imsi = 001010000000010
position = 200,0
)";

} // namespace

TEST_SUITE("ue")
{
  TEST_CASE("request carries the TMSI when one is held")
  {
    rig r(echo_mode::match, 0xaabbccdd);
    r.sim.run_until(50);
    REQUIRE_FALSE(r.cell->requests.empty());
    const auto& req = r.cell->requests.front();
    CHECK(req.identity == codec::ue_identity{codec::tmsi_id{0xaabbccdd}});
    CHECK(req.cause == codec::establishment_cause::mo_signalling);
  }

  TEST_CASE("request carries a 40-bit random value without a TMSI")
  {
    rig r(echo_mode::match);
    r.sim.run_until(50);
    REQUIRE_FALSE(r.cell->requests.empty());
    const auto* id = std::get_if<codec::random_id>(&r.cell->requests.front().identity);
    REQUIRE(id != nullptr);
    CHECK(id->value <= codec::k_random_id_mask);
  }

  TEST_CASE("matching echo is accepted")
  {
    rig r(echo_mode::match);
    r.sim.run_until(50);
    CHECK(count(r.sim.log().events(), "contention result=accept") == 1);
    CHECK(r.ue->state() == ue_state::rrc_connecting);
    CHECK(r.ue->rnti() == std::optional<std::uint16_t>{61});
  }

  TEST_CASE("foreign echo is abandoned and the UE starts over")
  {
    rig r(echo_mode::mismatch);
    r.sim.run_until(30);
    const auto& log = r.sim.log().events();
    CHECK(count(log, "contention result=abandon reason=mismatch") >= 1);
    CHECK(count(log, "contention result=accept") == 0);
    CHECK(r.cell->prach_seen >= 2);
  }

  TEST_CASE("missing echo times out after the contention window")
  {
    rig r(echo_mode::silent);
    r.sim.run_until(2000);
    const auto& log   = r.sim.log().events();
    const auto  req   = first(log, "rrc_request");
    const auto  aband = first(log, "contention result=abandon reason=timeout");
    REQUIRE(req);
    REQUIRE(aband);
    // The RAR lands one subframe after the PRACH and grants 3 later; then the 8-subframe window.
    CHECK(aband->tti - req->tti == 3 + 8);
    CHECK(count(log, "access_failure reason=contention") == 1);
  }

  TEST_CASE("fresh attach completes and assigns a TMSI")
  {
    const auto res = run(k_base);
    CHECK(count(res.events, "rrc_request node=u identity~random cause=mo-signalling") == 1);
    CHECK(count(res.events, "tmsi_assigned node=u") == 1);
    CHECK(count(res.events, "ue_state node=u state=registered") >= 1);
  }

  TEST_CASE("unknown TMSI triggers the identity procedure and the IMSI goes out in clear")
  {
    std::string cfg = k_base;
    cfg += "tmsi = 0x11112222\n";
    const auto res = run(cfg);
    CHECK(count(res.events, "rrc_request node=u identity=tmsi:0x11112222") == 1);
    CHECK(count(res.events, "nas_rx node=u msg=IdentityRequest") == 1);
    const auto resp = first(res.events, "nas_tx node=u msg=IdentityResponse");
    REQUIRE(resp);
    const auto decoded = codec::decode_nas(codec::from_hex(*resp->get("hex")));
    CHECK(std::get<codec::identity_response>(decoded).identity == codec::ue_identity{codec::imsi_id{"001010000000010"}});
    CHECK(count(res.events, "tmsi_assigned node=u") == 1);
  }

  TEST_CASE("paging with the own TMSI starts a service request")
  {
    std::string cfg = k_base;
    cfg += "tmsi = 0x0badcafe\nregistered = true\n[action.sms]\nat = 2s\ntype = send_sms\ntarget = u\n";
    const auto res = run(cfg);
    CHECK(count(res.events, "paged node=u tmsi=0x0badcafe") == 1);
    CHECK(count(res.events, "service_start node=u cause=mt-access") == 1);
    CHECK(count(res.events, "nas_tx node=u msg=ServiceRequest") == 1);
    CHECK(count(res.events, "sms_rx node=u type0=1") == 1);
    CHECK(count(res.events, "user_notification") == 0);
  }

  TEST_CASE("a normal SMS notifies the user, a silent one never does")
  {
    std::string cfg = k_base;
    cfg += "tmsi = 0x0badcafe\nregistered = true\n[action.sms]\nat = 2s\ntype = send_sms\ntarget = u\nsilent = "
           "false\n";
    const auto res = run(cfg);
    CHECK(count(res.events, "sms_rx node=u type0=0") == 1);
    CHECK(count(res.events, "user_notification node=u reason=sms") == 1);
  }

  TEST_CASE("foreign pages are ignored")
  {
    std::string cfg = k_base;
    cfg.replace(cfg.find("[enb]\n"), 6, "[enb]\nbackground_paging_rate = 350\nbackground_population = 1048576\n");
    cfg += "tmsi = 0xf0000001\nregistered = true\n";
    const auto res = run(cfg);
    CHECK(count(res.events, "paged") == 0);
    CHECK(count(res.events, "rrc_request") == 0);
  }

  TEST_CASE("reject schedules follow the device profile")
  {
    struct expectation {
      const char* profile;
      unsigned    long_waits;  // 30-60 min
      unsigned    short_waits; // exactly 10 s
      unsigned    pixel_waits; // exactly 30 s
    };
    for (const auto& e : {expectation{"default", 0, 0, 0}, expectation{"oneplus_9_pro", 5, 10, 0},
                          expectation{"pixel_5", 0, 0, 2}}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        std::string cfg = k_base;
        cfg.replace(cfg.find("horizon = 30s"), 13, "horizon = 12h");
        cfg += "profile = " + std::string(e.profile) + "\n[mme]\nblocked_imsis = 001010000000010\n";
        const auto res = run(cfg, seed);
        CAPTURE(e.profile);
        CAPTURE(seed);
        CHECK(count(res.events, "retry_wait node=u delay_ms>=1800000 delay_ms<=3600000") == e.long_waits);
        CHECK(count(res.events, "retry_wait node=u delay_ms=10000") == e.short_waits);
        CHECK(count(res.events, "retry_wait node=u delay_ms=30000") == e.pixel_waits);
        CHECK(count(res.events, "retry_wait") == e.long_waits + e.short_waits + e.pixel_waits);
        CHECK(count(res.events, "reject node=u msg=AttachReject cause=8") ==
              e.long_waits + e.short_waits + e.pixel_waits + 1);
        const auto blocked = first(res.events, "dos_blocked node=u");
        REQUIRE(blocked);
        CHECK(*blocked->number("duration_ms") >= 12.0 * 3600 * 1000);
      }
    }
  }

  TEST_CASE("no state change inside a block except through a user reset")
  {
    std::string cfg = k_base;
    cfg.replace(cfg.find("horizon = 30s"), 13, "horizon = 13h");
    cfg += "[mme]\nblocked_imsis = 001010000000010\n";
    const auto plain = run(cfg);
    const auto block = first(plain.events, "dos_blocked node=u");
    REQUIRE(block);
    const auto until = static_cast<std::uint64_t>(*block->number("until_ms"));
    CHECK(count(plain.events, "ue_state node=u t>" + std::to_string(block->tti) + " t<" + std::to_string(until)) ==
          0);
    CHECK(count(plain.events, "attach_start node=u t>=" + std::to_string(until)) >= 1);

    cfg += "[action.reboot]\nat = 1h\ntype = user_reset\ntarget = u\n";
    const auto reset = run(cfg);
    CHECK(count(reset.events, "user_reset node=u state=dos_blocked") == 1);
    CHECK(count(reset.events, "attach_start node=u t=3600000") == 1);
  }

  TEST_CASE("ServiceReject 9 leads to an immediate attach under a new random identity")
  {
    std::string cfg = k_base;
    cfg += "tmsi = 0x1234abcd\nregistered = true\n"
           "[attacker.evil]\nkind = uplink_dos\nposition = 300,0\ntargets = u\n"
           "[action.wake]\nat = 2s\ntype = start_data\ntarget = u\n";
    const auto res = run(cfg);
    const auto rej = first(res.events, "reject node=u msg=ServiceReject cause=9");
    REQUIRE(rej);
    const auto next = first(res.events, "attach_start node=u t>" + std::to_string(rej->tti - 1));
    REQUIRE(next);
    CHECK(next->tti - rej->tti <= 1);
    CHECK(next->get("with_tmsi") == std::optional<std::string_view>{"0"});
    const auto requests = select(res.events, "rrc_request node=u");
    REQUIRE(requests.size() >= 2);
    CHECK(requests.front().get("identity") == std::optional<std::string_view>{"tmsi:0x1234abcd"});
    CHECK(random_value(std::string(*requests[1].get("identity"))) <= codec::k_random_id_mask);
  }

  TEST_CASE("Security Mode Reject is followed by a retry with the same TMSI")
  {
    std::string cfg = k_base;
    cfg.replace(cfg.find("horizon = 30s"), 13, "horizon = 20s");
    cfg += "tmsi = 0x0badcafe\nregistered = true\n"
           "[attacker.catcher]\nkind = imsi_extractor\nposition = 300,0\n"
           "[action.wake]\nat = 2s\ntype = start_data\ntarget = u\n";
    const auto res = run(cfg);
    const auto smr = first(res.events, "nas_tx node=u msg=SecurityModeReject");
    REQUIRE(smr);
    CHECK(count(res.events, "capability_mismatch node=u own=0xffffffff replayed=0x00000000") == 1);
    const auto retry = first(res.events, "rrc_request node=u t>" + std::to_string(smr->tti));
    REQUIRE(retry);
    CHECK(retry->get("identity") == std::optional<std::string_view>{"tmsi:0x0badcafe"});
    CHECK(count(res.events, "tmsi_deleted") == 0);
    CHECK(count(res.events, "service_resumed") + count(res.events, "ue_state node=u state=registered") >= 1);
  }

  TEST_CASE("config validation")
  {
    ue_config c;
    c.imsi = "123";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.imsi    = "001010000000001";
    c.profile = "nope";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.profile = "pixel_5";
    CHECK_NOTHROW(c.validate());
  }
}
