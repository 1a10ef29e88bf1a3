#include "ovsim/event_log.h"
#include "ovsim/rng.h"

#include <doctest.h>

using namespace ovsim;

TEST_SUITE("event_log")
{
  TEST_CASE("values are percent escaped")
  {
    CHECK(escape_value("a b=c%d") == "a%20b%3Dc%25d");
    CHECK(escape_value("line\n") == "line%0A");
    CHECK(escape_value("plain-0x1f") == "plain-0x1f");
    CHECK(unescape_value("a%20b%3Dc%25d") == "a b=c%d");
    CHECK_THROWS_AS(unescape_value("%4"), log_format_error);
    CHECK_THROWS_AS(unescape_value("%zz"), log_format_error);
  }

  TEST_CASE("escape round trip over arbitrary bytes")
  {
    rng r(77);
    for (int i = 0; i < 2000; ++i) {
      std::string s(r.uniform(0, 30), '\0');
      for (auto& c : s) {
        c = static_cast<char>(r.uniform(0, 255));
      }
      const auto e = escape_value(s);
      CHECK(e.find(' ') == std::string::npos);
      CHECK(e.find('=') == std::string::npos);
      CHECK(unescape_value(e) == s);
    }
  }

  TEST_CASE("rendered line layout")
  {
    event_log log;
    log.emit(1234, "victim", "ue_state").add("state", "dos_blocked").add("until", 43201234).hex("tmsi", 0xbadcafe);
    log.emit(1235, "enb", "note").add("power", -66.456).add("ok", true);
    CHECK(log.render() == "t=1234 f=123 sf=4 node=victim kind=ue_state state=dos_blocked until=43201234 "
                          "tmsi=0x0badcafe\n"
                          "t=1235 f=123 sf=5 node=enb kind=note power=-66.46 ok=1\n");
  }

  TEST_CASE("parse inverts render")
  {
    event_log log;
    log.emit(0, "a b", "k=ind").add("x", "1 2").add("empty", "");
    log.emit(99, "n", "k");
    const auto parsed = parse_log(log.render());
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].node == "a b");
    CHECK(parsed[0].kind == "k=ind");
    CHECK(parsed[0].get("x") == std::optional<std::string_view>{"1 2"});
    CHECK(parsed[0].get("empty") == std::optional<std::string_view>{""});
    CHECK(parsed[1].tti == 99);
    CHECK(parsed[1].fields.empty());
  }

  TEST_CASE("numeric field access")
  {
    const auto e = parse_event_line("t=5 node=n kind=k a=12 b=0x10 c=-1.5 d=abc");
    CHECK(e.number("a") == std::optional<double>{12});
    CHECK(e.number("b") == std::optional<double>{16});
    CHECK(e.number("c") == std::optional<double>{-1.5});
    CHECK_FALSE(e.number("d").has_value());
    CHECK_FALSE(e.number("missing").has_value());
    CHECK(e.at() == subframe_time{0, 5});
  }

  TEST_CASE("malformed lines")
  {
    CHECK_THROWS_AS(parse_event_line("node=n kind=k"), log_format_error);
    CHECK_THROWS_AS(parse_event_line("t=x node=n kind=k"), log_format_error);
    CHECK_THROWS_AS(parse_event_line("t=1 node=n kind=k junk"), log_format_error);
    CHECK_THROWS_AS(parse_event_line("t=1 node=n kind=k =v"), log_format_error);
    CHECK_THROWS_WITH_AS(parse_log("t=1 node=n kind=k\nbad\n"), doctest::Contains("line 2"), log_format_error);
  }

  TEST_CASE("comments, blank lines and CRLF are tolerated")
  {
    CHECK(parse_log("").empty());
    CHECK(parse_log("# header\n\nt=1 node=n kind=k\r\n").size() == 1);
  }

  TEST_CASE("double formatting")
  {
    CHECK(format_double(1.005, 1) == "1.0");
    CHECK(format_double(-0.001) == "0.00");
    CHECK(format_double(1.0 / 0.0) == "inf");
    CHECK(format_double(26.0417, 2) == "26.04");
  }
}
