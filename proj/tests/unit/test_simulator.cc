#include "ovsim/simulator.h"

#include <doctest.h>

using namespace ovsim;

namespace {

// Listens to everything and records what it decodes.
class probe : public node
{
public:
  probe(simulator& sim, phy::node_id id, std::string name) : node(sim, id, std::move(name)) {}

  bool interested(const phy::slot_key&) const override { return true; }
  void on_receive(const delivery& d) override { got.push_back({sim_.tti(), d.tx->source, d.tx->payload}); }
  void on_tx_result(const phy::transmission&, const node&, const phy::slot_outcome& out, bool won) override
  {
    results.push_back({out.kind, won});
  }
  void on_subframe(subframe_time t) override { ticks.push_back(t.index()); }

  struct rx {
    std::uint64_t tti;
    phy::node_id  from;
    codec::bytes  payload;
  };
  std::vector<rx>                                   got;
  std::vector<std::pair<phy::outcome_kind, bool>>   results;
  std::vector<std::uint64_t>                        ticks;
};

phy::transmission tx_at(phy::node_id src, std::uint64_t tti, std::uint8_t marker, double power = 23)
{
  phy::transmission tx;
  tx.source       = src;
  tx.dir          = phy::direction::downlink;
  tx.rnti         = 100;
  tx.at           = subframe_time::from_index(tti);
  tx.tx_power_dbm = power;
  tx.payload      = {marker};
  return tx;
}

} // namespace

TEST_SUITE("simulator")
{
  TEST_CASE("advance moves one subframe and wraps the frame")
  {
    simulator sim({}, 1);
    for (int i = 0; i < 9; ++i) {
      sim.advance_clock();
    }
    CHECK(sim.now() == subframe_time{0, 9});
    CHECK(sim.advance_clock() == subframe_time{1, 0});
  }

  TEST_CASE("empty slots deliver nothing")
  {
    simulator sim({}, 1);
    auto&     a = sim.emplace_node<probe>("a", {0, 0});
    sim.emplace_node<probe>("b", {10, 0});
    for (int i = 0; i < 20; ++i) {
      sim.advance_clock();
    }
    CHECK(a.got.empty());
    CHECK(a.ticks.size() == 20);
  }

  TEST_CASE("queued slots deliver in timestamp order")
  {
    simulator sim({}, 1);
    auto&     a = sim.emplace_node<probe>("a", {0, 0});
    auto&     b = sim.emplace_node<probe>("b", {10, 0});
    sim.transmit(tx_at(a.id(), 7, 2));
    sim.transmit(tx_at(a.id(), 3, 1));
    sim.run_until(10);
    REQUIRE(b.got.size() == 2);
    CHECK(b.got[0].tti == 3);
    CHECK(b.got[0].payload == codec::bytes{1});
    CHECK(b.got[1].tti == 7);
    CHECK(a.got.empty()); // a sender never hears itself
    CHECK(a.results.size() == 2);
    CHECK(a.results[0].second);
  }

  TEST_CASE("co-slot emissions resolve through the capture rule")
  {
    simulator sim({}, 1);
    auto&     rx     = sim.emplace_node<probe>("rx", {0, 0});
    auto&     strong = sim.emplace_node<probe>("strong", {10, 0});
    auto&     weak   = sim.emplace_node<probe>("weak", {10, 0.001});
    sim.transmit(tx_at(strong.id(), 2, 0xaa, 23));
    sim.transmit(tx_at(weak.id(), 2, 0xbb, 20));
    sim.transmit(tx_at(strong.id(), 4, 0xaa, 23));
    sim.transmit(tx_at(weak.id(), 4, 0xbb, 21));
    sim.run_until(5);
    REQUIRE(rx.got.size() == 1);
    CHECK(rx.got[0].tti == 2);
    CHECK(rx.got[0].payload == codec::bytes{0xaa});
  }

  TEST_CASE("reference carrier masks weak downlink emissions")
  {
    simulator sim({}, 1);
    auto&     cell   = sim.emplace_node<probe>("cell", {0, 0});
    auto&     ue     = sim.emplace_node<probe>("ue", {100, 0});
    auto&     near   = sim.emplace_node<probe>("near", {101, 0});
    auto&     far    = sim.emplace_node<probe>("far", {400, 0});
    sim.set_reference_carrier({cell.id(), 46});
    sim.transmit(tx_at(near.id(), 1, 1, 30));
    sim.transmit(tx_at(far.id(), 2, 2, 30));
    sim.run_until(3);
    std::vector<std::uint64_t> at_ue;
    for (const auto& g : ue.got) {
      at_ue.push_back(g.tti);
    }
    CHECK(at_ue == std::vector<std::uint64_t>{1});
  }

  TEST_CASE("transmit preconditions")
  {
    simulator sim({}, 1);
    auto&     a = sim.emplace_node<probe>("a", {0, 0});
    CHECK_THROWS_AS(sim.transmit(tx_at(a.id(), 0, 1)), std::invalid_argument);
    auto empty = tx_at(a.id(), 5, 1);
    empty.payload.clear();
    CHECK_THROWS_AS(sim.transmit(empty), std::invalid_argument);
  }

  TEST_CASE("timers fire in time order and can be cancelled")
  {
    simulator        sim({}, 1);
    std::vector<int> fired;
    sim.schedule_at(50, [&] { fired.push_back(2); });
    sim.schedule_at(10, [&] { fired.push_back(1); });
    const auto id = sim.schedule_at(30, [&] { fired.push_back(99); });
    sim.cancel(id);
    sim.schedule_at(0, [&] { fired.push_back(0); }); // past: runs next subframe
    sim.run_until(100);
    CHECK(fired == std::vector<int>{0, 1, 2});
    CHECK(sim.tti() == 100);
  }

  TEST_CASE("stop request ends the run after the current subframe")
  {
    simulator sim({}, 1);
    sim.schedule_at(40, [&] { sim.request_stop(); });
    sim.run_until(1000);
    CHECK(sim.tti() == 40);
    CHECK(sim.stop_requested());
  }

  TEST_CASE("derived streams depend on seed and name only")
  {
    simulator a({}, 5), b({}, 5), c({}, 6);
    CHECK(a.derive_rng("x").next_u64() == b.derive_rng("x").next_u64());
    CHECK(a.derive_rng("x").next_u64() != a.derive_rng("y").next_u64());
    CHECK(a.derive_rng("x").next_u64() != c.derive_rng("x").next_u64());
  }

  TEST_CASE("invalid channel parameters are refused")
  {
    phy::channel_model m;
    m.capture_margin_db = -1;
    CHECK_THROWS_AS(simulator(m, 1), std::invalid_argument);
  }
}
