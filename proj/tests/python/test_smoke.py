import os
import pathlib

import pytest

import ovsim

SCENARIOS = pathlib.Path(
    os.environ.get("OVSIM_SCENARIO_DIR", pathlib.Path(__file__).resolve().parents[2] / "scenarios")
)

SMALL = """
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
[metrics]
prachs = prach
"""


def test_run_small_scenario():
    r = ovsim.run_scenario(SMALL)
    assert r["passed"]
    assert r["seed"] == 2
    assert r["end_t"] == 3000
    assert r["assertions"] == [("registered", "PASS", r["assertions"][0][2])]
    assert r["metrics"]["prachs"] >= 1


def test_seed_override_is_deterministic():
    a = ovsim.run_scenario(SMALL, seed=7)
    b = ovsim.run_scenario(SMALL, seed=7)
    assert a["seed"] == 7
    assert a["log"] == b["log"]


def test_parse_log_and_replay():
    r = ovsim.run_scenario(SMALL)
    events = ovsim.parse_log(r["log"])
    assert len(events) == r["metrics"]["events"]
    assigned = [e for e in events if e["kind"] == "tmsi_assigned"]
    assert assigned and assigned[0]["node"] == "u"
    assert "== rnti" in ovsim.replay(r["log"])


def test_bundled_downlink_dos():
    r = ovsim.run_scenario((SCENARIOS / "fig3_downlink_dos.cfg").read_text())
    assert r["passed"], r["assertions"]


def test_config_errors_are_value_errors():
    with pytest.raises(ovsim.ConfigError, match="line 2"):
        ovsim.run_scenario("seed = 1\n[bogus]\n")
    with pytest.raises(ValueError):
        ovsim.run_scenario("horizon = 1s\n")


def test_describe_hex():
    assert ovsim.describe_hex("44000108").startswith("AttachReject")
    assert "8" in ovsim.describe_hex("44000108")
    with pytest.raises(ovsim.CodecError):
        ovsim.describe_hex("ff")


def test_capture_boundary():
    assert ovsim.resolve_powers([-70.0, -67.0], [0.0, 0.0])["kind"] == "decoded"
    assert ovsim.resolve_powers([-70.0, -67.1], [0.0, 0.0])["kind"] == "collision"
    assert ovsim.resolve_powers([-70.0, -67.0], [0.0, 4.8])["kind"] == "collision"


def test_profiles():
    names = {p[0] for p in ovsim.profiles()}
    assert {"default", "oneplus_9_pro", "pixel_5"} <= names
