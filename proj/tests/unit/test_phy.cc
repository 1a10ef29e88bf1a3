#include "ovsim/phy.h"
#include "ovsim/rng.h"

#include <doctest.h>

#include <cmath>

using namespace ovsim;
using namespace ovsim::phy;

namespace {

channel_model two_nodes(position a, position b)
{
  channel_model m;
  m.positions[1] = a;
  m.positions[2] = b;
  return m;
}

transmission uplink(node_id src, double power, double ta_us = 0.0, double offset_us = 0.0)
{
  transmission tx;
  tx.source            = src;
  tx.dir               = direction::uplink;
  tx.rnti              = 61;
  tx.at                = subframe_time::from_index(10);
  tx.tx_power_dbm      = power;
  tx.timing_advance_us = ta_us;
  tx.timing_offset_us  = offset_us;
  tx.payload           = {0x83, 0, 1, 0};
  return tx;
}

} // namespace

TEST_SUITE("phy")
{
  TEST_CASE("path loss reference points")
  {
    CHECK(path_loss_db(two_nodes({0, 0}, {1, 0}), 1, 2) == doctest::Approx(38.0));
    // 38 + 30 * log10(100) = 38 + 60
    CHECK(path_loss_db(two_nodes({0, 0}, {100, 0}), 1, 2) == doctest::Approx(98.0));
    CHECK(path_loss_db(two_nodes({0, 0}, {30, 40}), 1, 2) == doctest::Approx(38.0 + 30.0 * std::log10(50.0)));
  }

  TEST_CASE("path loss is symmetric")
  {
    rng r(31);
    for (int i = 0; i < 1000; ++i) {
      const auto m = two_nodes({r.uniform_real(-5000, 5000), r.uniform_real(-5000, 5000)},
                               {r.uniform_real(-5000, 5000), r.uniform_real(-5000, 5000)});
      CHECK(path_loss_db(m, 1, 2) == path_loss_db(m, 2, 1));
    }
  }

  TEST_CASE("path loss errors")
  {
    const auto m = two_nodes({0, 0}, {0, 0});
    CHECK_THROWS_AS(path_loss_db(m, 1, 3), unknown_node_error);
    CHECK_THROWS_AS(path_loss_db(m, 1, 2), std::domain_error);
  }

  TEST_CASE("channel model validation")
  {
    channel_model m;
    CHECK_NOTHROW(m.validate());
    m.capture_margin_db = 0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m                    = {};
    m.path_loss_exponent = 1.9;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  }

  TEST_CASE("uplink power control")
  {
    CHECK(ue_tx_power_dbm(-100, 90, 0, 23) == doctest::Approx(-10.0));
    CHECK(ue_tx_power_dbm(-100, 130, 0, 23) == doctest::Approx(23.0));
    CHECK(ue_tx_power_dbm(-100, 90, 3, 23) == doctest::Approx(-7.0));
    rng r(2);
    for (int i = 0; i < 1000; ++i) {
      const double pl = r.uniform_real(40, 160);
      CHECK(ue_tx_power_dbm(-100, pl, 0, 23) <= ue_tx_power_dbm(-100, pl + r.uniform_real(0, 5), 0, 23));
    }
  }

  TEST_CASE("capture boundary grid")
  {
    for (double gap : {2.9, 3.0, 3.1}) {
      for (double offset : {0.0, 4.7, 4.8}) {
        const auto out      = resolve_powers({-70.0, -70.0 + gap}, {0.0, offset}, 3.0, 4.7);
        const bool expected = gap >= 3.0 && offset <= 4.7;
        CAPTURE(gap);
        CAPTURE(offset);
        CHECK((out.kind == outcome_kind::decoded) == expected);
        CHECK(out.winner == std::optional<std::size_t>{1});
        CHECK(out.timing_miss == (offset > 4.7));
      }
    }
  }

  TEST_CASE("capture examples")
  {
    const auto a = resolve_powers({-70, -66}, {0, 0}, 3.0, 4.7);
    CHECK(a.kind == outcome_kind::decoded);
    CHECK(a.winner == std::optional<std::size_t>{1});
    CHECK(a.rx_power_dbm == -66);
    CHECK(resolve_powers({-70, -68}, {0, 0}, 3.0, 4.7).kind == outcome_kind::collision);
    CHECK(resolve_powers({-70, -70}, {0, 0}, 3.0, 4.7).kind == outcome_kind::collision);

    const auto lone = resolve_powers({-70}, {10.0}, 3.0, 4.7);
    CHECK(lone.kind == outcome_kind::collision);
    CHECK(lone.timing_miss);
    CHECK(std::isinf(lone.gap_db));
    CHECK(resolve_powers({-70}, {-4.7}, 3.0, 4.7).kind == outcome_kind::decoded);

    CHECK(resolve_powers({}, {}, 3.0, 4.7).kind == outcome_kind::silence);
    CHECK(resolve_slot({}, 1, channel_model{}).kind == outcome_kind::silence);
  }

  TEST_CASE("timing advance quantisation")
  {
    CHECK(codec::k_ta_step_us == doctest::Approx(0.5208).epsilon(1e-3));
    // Round trip over 3.9 km is about 26.02 us: 50 steps.
    CHECK(ta_steps_for_distance(3900) == 50);
    CHECK(ta_steps_for_distance(3900) * codec::k_ta_step_us == doctest::Approx(26.04).epsilon(1e-3));
    // 860 m: about 5.74 us round trip, 11 steps.
    CHECK(ta_steps_for_distance(860) == 11);
    CHECK(ta_steps_for_distance(860) * codec::k_ta_step_us == doctest::Approx(5.73).epsilon(1e-3));
    CHECK(ta_steps_for_distance(0) == 0);
  }

  TEST_CASE("uplink arrival offset nets out the applied timing advance")
  {
    const auto   m   = two_nodes({0, 0}, {3000, 0});
    const double rtt = 2.0 * 3000 / k_light_m_per_us;
    CHECK(arrival_offset_us(m, uplink(2, 0), 1) == doctest::Approx(rtt));
    CHECK(arrival_offset_us(m, uplink(2, 0, rtt), 1) == doctest::Approx(0.0));
    auto dl = uplink(1, 0, 0, 1.5);
    dl.dir  = direction::downlink;
    CHECK(arrival_offset_us(m, dl, 2) == 1.5);
  }

  TEST_CASE("attacker power needed at the eNodeB does not depend on victim distance")
  {
    // eNodeB 1, victim 2, attacker 3 at 500 m. With power control the victim
    // always arrives at the target, so the attacker's winning power is fixed.
    const double target = -100;
    for (double victim_d : {60.0, 200.0, 600.0}) {
      channel_model m;
      m.positions[1] = {0, 0};
      m.positions[2] = {victim_d, 0};
      m.positions[3] = {500, 0};
      const double victim_tx = ue_tx_power_dbm(target, path_loss_db(m, 2, 1), 0, 23);
      const double ta        = 2 * propagation_delay_us(victim_d);
      const double a_ta      = 2 * propagation_delay_us(500);
      // target + 3 dB at the eNodeB needs target + 3 + PL(500 m).
      const double needed = target + 3 + path_loss_db(m, 3, 1);
      CAPTURE(victim_d);
      CHECK(resolve_slot({uplink(2, victim_tx, ta), uplink(3, needed, a_ta)}, 1, m).kind == outcome_kind::decoded);
      CHECK(resolve_slot({uplink(2, victim_tx, ta), uplink(3, needed - 0.5, a_ta)}, 1, m).kind ==
            outcome_kind::collision);
    }
  }

  TEST_CASE("PRACH uses the wider preamble window")
  {
    const auto m  = two_nodes({0, 0}, {9000, 0});
    auto       tx = uplink(2, 23);
    CHECK(resolve_slot({tx}, 1, m).kind == outcome_kind::collision);
    tx.prach = true;
    CHECK(resolve_slot({tx}, 1, m).kind == outcome_kind::decoded);
  }

  TEST_CASE("subframe clock wraps into the next frame")
  {
    CHECK(subframe_time{0, 9}.next() == subframe_time{1, 0});
    CHECK(subframe_time{0, 2}.plus(8) == subframe_time{1, 0});
    CHECK(subframe_time{0, 2}.plus(-5) == subframe_time{0, 0});
    CHECK(subframe_time::from_index(123).index() == 123);
  }
}
