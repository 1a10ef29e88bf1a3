#include "util.h"

#include <doctest.h>

#include <sstream>

using namespace ovsim;
using testutil::count;

namespace {

std::string scenario_path(const char* stem)
{
  return std::string(OVSIM_SCENARIO_DIR) + "/" + stem + ".cfg";
}

assertion_spec spec_of(const std::string& section)
{
  const auto cfg = load_config("seed = 1\n[ue.u]\nimsi = 001010000000001\n" + section);
  REQUIRE(cfg.assertions.size() == 1);
  return cfg.assertions[0];
}

event ev(std::uint64_t t, std::string node, std::string kind,
         std::vector<std::pair<std::string, std::string>> fields = {})
{
  return event{t, std::move(node), std::move(kind), std::move(fields)};
}

constexpr const char* k_small = R"(
seed = 2
horizon = 3s
[enb]
position = 0,0
[ue.u]
imsi = 001010000000040
position = 150,0
[assert.registered]
type = event_exists
match = tmsi_assigned node=u
[assert.no_reject]
type = event_absent
match = reject
[metrics]
prachs = prach
)";

} // namespace

TEST_SUITE("scenario")
{
  TEST_CASE("same seed, same log")
  {
    const auto a = testutil::run(k_small);
    const auto b = testutil::run(k_small);
    CHECK(a.log_text == b.log_text);
    CHECK(a.passed());
    CHECK_FALSE(a.log_text.empty());
    CHECK(a.end_tti == 3000);
    const auto c = testutil::run(k_small, 99);
    CHECK(c.seed == 99);
    CHECK(c.passed());
  }

  TEST_CASE("log text parses back to the recorded events")
  {
    const auto r = testutil::run(k_small);
    const auto parsed = parse_log(r.log_text);
    REQUIRE(parsed.size() == r.events.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      CHECK(format_event(parsed[i]) == format_event(r.events[i]));
    }
  }

  TEST_CASE("horizon 0 skips every assertion")
  {
    auto text = std::string(k_small);
    text.replace(text.find("horizon = 3s"), 12, "horizon = 0");
    const auto r = testutil::run(text);
    CHECK(r.events.empty());
    REQUIRE(r.assertions.size() == 2);
    for (const auto& a : r.assertions) {
      CHECK(a.status == assertion_status::skipped);
    }
    CHECK(r.passed());
    CHECK(r.render_metrics() == "seed=2\nevents=0\nend_t=0\nprachs=0\n");
  }

  TEST_CASE("metrics count matching events")
  {
    const auto r = testutil::run(k_small);
    double     prachs = -1;
    for (const auto& [k, v] : r.metrics) {
      if (k == "prachs") {
        prachs = v;
      }
    }
    CHECK(prachs == static_cast<double>(count(r.events, "prach")));
    CHECK(prachs >= 1);
  }

  TEST_CASE("assertion evaluation")
  {
    const std::vector<event> log = {
        ev(10, "u", "ue_state", {{"state", "attaching"}}),
        ev(12, "u", "prach"),
        ev(40, "u", "ue_state", {{"state", "registered"}}),
        ev(50, "u", "prach"),
        ev(95, "u", "reject", {{"cause", "9"}}),
    };
    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = event_exists\nmatch = prach\n"), log).status ==
          assertion_status::pass);
    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = event_absent\nmatch = prach\n"), log).status ==
          assertion_status::fail);
    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = event_count\nmatch = prach\nmin = 2\nmax = 2\n"), log)
              .status == assertion_status::pass);
    const auto over = evaluate_assertion(spec_of("[assert.a]\ntype = event_count\nmatch = prach\nmax = 1\n"), log);
    CHECK(over.status == assertion_status::fail);
    CHECK(over.detail == "2 matches, expected [-inf, 1.00]");

    const auto d =
        evaluate_assertion(spec_of("[assert.a]\ntype = delay_between\nfrom = prach\nto = reject\nmax = 90\n"), log);
    CHECK(d.status == assertion_status::pass);
    CHECK(d.detail == "delay 83.00 ms, expected [-inf, 90.00]");
    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = delay_between\nfrom = reject\nto = prach\nmin = 0\n"), log)
              .status == assertion_status::fail);

    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = state_at\nue = u\nat = 39\nstate = attaching\n"), log)
              .status == assertion_status::pass);
    CHECK(evaluate_assertion(spec_of("[assert.a]\ntype = state_at\nue = u\nat = 40\nstate = idle|registered\n"), log)
              .status == assertion_status::pass);
    CHECK(state_at(log, "u", 5) == ue_state::powered_off);
    CHECK(state_at(log, "other", 100) == ue_state::powered_off);
  }

  TEST_CASE("replay of an empty log is empty")
  {
    CHECK(replay_log({}).empty());
  }

  TEST_CASE("replay keeps unknown kinds as raw lines")
  {
    const auto out = replay_log({ev(5, "x", "mystery", {{"a", "b c"}})});
    CHECK(out == "== other events\n  t=5        x             mystery a=b%20c\n");
  }

  TEST_CASE("replay ladder for the IMSI extractor")
  {
    const auto r   = run_scenario(load_config_file(scenario_path("fig4_imsi_extractor")));
    const auto out = replay_log(r.events);
    CHECK(out.find("=> AttachRequest identity=tmsi:") != std::string::npos);
    CHECK(out.find("IdentityRequest") != std::string::npos);
    CHECK(out.find("-> IdentityResponse identity=imsi:001010123456789") != std::string::npos);
    // the injection precedes the identity exchange within its connection
    const auto block = out.find("=> AttachRequest");
    CHECK(block < out.find("IdentityResponse identity=imsi"));
  }

  TEST_CASE("sweep value parsing")
  {
    CHECK(parse_sweep_values("1,2, 3") == std::vector<std::string>{"1", "2", "3"});
    CHECK(parse_sweep_values("0:10:5") == std::vector<std::string>{"0", "5", "10"});
    CHECK(parse_sweep_values("0:1:0.25") == std::vector<std::string>{"0", "0.25", "0.5", "0.75", "1"});
    CHECK(parse_sweep_values("0:0.3:0.1").size() == 4);
    CHECK(parse_sweep_values("10,0;20,5") == std::vector<std::string>{"10,0", "20,5"});
    CHECK_THROWS_AS(parse_sweep_values("1,,2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_values("5:1:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_values("0:1:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_values("0:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_sweep_values("a:b:c"), std::invalid_argument);
  }

  TEST_CASE("sweep runs one scenario per value")
  {
    const auto raw  = parse_raw_config(k_small);
    const auto rows = run_sweep(raw, "ue.u.position", {"100", "200"});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].value == "100");
    CHECK(rows[0].result.passed());
    CHECK(rows[1].result.passed());
    CHECK(rows[0].result.log_text != rows[1].result.log_text);

    std::ostringstream csv;
    write_sweep_table(csv, "ue.u.position", rows, true);
    std::istringstream lines(csv.str());
    std::string        header;
    std::getline(lines, header);
    CHECK(header == "ue.u.position,pass,registered,no_reject,events,end_t,prachs");
    std::string first;
    std::getline(lines, first);
    CHECK(first.rfind("100,yes,PASS,PASS,", 0) == 0);

    CHECK_THROWS_AS(run_sweep(raw, "ue.nobody.position", {"1"}), config_error);
  }

  TEST_CASE("unresolvable references fail at build time")
  {
    CHECK_THROWS_AS(load_config("seed = 1\n[assert.a]\ntype = state_at\nue = ghost\nat = 1s\nstate = idle\n"),
                    config_error);
  }
}
