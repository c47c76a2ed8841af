"""Smoke tests for the casim extension module."""

import math
import os

import pytest

import casim

MM1_TEXT = """
[spectrum]
channels = 1

[traffic]
su_arrival_rate = 1
su_service_rate = 1
demand = 0, *, 1

[policy]
policy = IBS

[sim]
horizon = 5000
warmup = 100
replications = 3
seed = 7
"""


def test_version():
    assert casim.__version__


def test_frame_slots_examples():
    assert casim.frame_slots(1000, 0.5, 500, bits_per_symbol=2) == 4
    assert casim.frame_slots(1, 1, 1) == 1
    assert casim.frame_slots(1500, 0.8, 400, bits_per_symbol=4) == 5
    # the rate cancels
    assert casim.frame_slots(1500, 0.8, 400, bits_per_symbol=7) == 5


def test_capacity_arithmetic():
    assert casim.channel_utilization(0.2, 0.8) == pytest.approx(0.2)
    phi = casim.pu_slot_capacity(2, 4, [0.5, 0.25], [0.5, 0.75])
    assert phi == pytest.approx(3.0)
    assert casim.su_slot_capacity(2, 4, phi) == pytest.approx(5.0)


def test_snr_to_mode():
    table = [(1, 1.0, 0, 10), (2, 2.0, 10, 20)]
    assert casim.snr_to_mode(-5, table) is None
    assert casim.snr_to_mode(10, table) == 2
    assert casim.snr_to_mode(3, table) == 1


def test_scenario_parsing_and_errors():
    sc = casim.load_scenario(MM1_TEXT)
    assert sc.channels == 1
    assert sc.slots_per_channel == 1
    assert sc.policy == "IBS"
    assert "Scenario" in repr(sc)
    with pytest.raises(ValueError):
        casim.load_scenario("[spectrum]\nchannels = 0\n")


def test_run_counters_and_determinism():
    sc = casim.load_scenario(MM1_TEXT)
    rows = casim.run(sc)
    assert len(rows) == 3
    for row in rows:
        assert row["arrivals"] == row["blocked"] + row["admitted"]
        assert row["P_a"] + row["P_b"] == pytest.approx(1.0, abs=1e-12)
        # arrival = service = 1 on a single slot: the loss system blocks half
        assert abs(row["P_b"] - 0.5) < 0.05
    again = casim.run(sc)
    assert [r["trace_hash"] for r in rows] == [r["trace_hash"] for r in again]


def test_sweep_shape_and_common_random_numbers():
    sc = casim.load_scenario(MM1_TEXT)
    rows = casim.sweep(sc, "traffic.su_arrival_rate", [0.5, 1.0],
                       policies=["IBS", "IBS_Q"], replications=2)
    assert len(rows) == 2 * 2 * 2
    # sorted by (policy given order, value, replication)
    assert [r["policy"] for r in rows[:4]] == ["IBS"] * 4
    assert rows[0]["swept_value"] == 0.5
    assert rows[0]["replication"] == 0


def test_validate_against_exact_chain():
    sc = casim.load_scenario(MM1_TEXT)
    report = casim.validate(sc, replications=4)
    assert report["states"] == 2
    assert report["all_pass"]
    pb = next(r for r in report["rows"] if r["metric"] == "P_b")
    assert pb["exact"] == pytest.approx(0.5)


def test_exact_metrics_and_family_guard():
    sc = casim.load_scenario(MM1_TEXT)
    exact = casim.exact_metrics(sc)
    assert exact["P_b"] == pytest.approx(0.5)
    bad = casim.load_scenario(MM1_TEXT.replace("policy = IBS", "policy = IBS_Q")
                              .replace("[sim]", "queue_capacity = 1\ndeadline = 2\n[sim]"))
    with pytest.raises(ValueError):
        casim.exact_metrics(bad)


def test_shipped_scenarios_load():
    scenario_dir = os.environ.get("CASIM_SCENARIO_DIR")
    if not scenario_dir:
        pytest.skip("scenario directory not provided")
    sc = casim.load_scenario_file(os.path.join(scenario_dir, "trend_base.cfg"))
    assert sc.channels == 4
    assert sc.slots_per_channel == 4
    rows = casim.run(sc, policy="RBS_Q", replications=2)
    assert len(rows) == 2
    assert rows[0]["admitted"] >= rows[0]["completed"]
    assert not math.isnan(rows[0]["capacity"])
