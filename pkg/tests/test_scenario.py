import json

import pytest

from lifeadd.energy import joules_from_mah
from lifeadd.scenario import (ParseError, ValidationError, parse_scenario)

BASE = {
    "field_size": 50.0,
    "aps": [{"id": "ap0", "position": [25.0, 25.0]}],
    "devices": [
        {"id": "d0", "position": [10.0, 10.0],
         "energy": {"initial_energy": 100.0, "battery_capacity": 100.0,
                    "radio_on_power_w": 1.0, "base_power_w": 0.3,
                    "recharge_rate_w": 0.1},
         "alpha_bps": 11e6},
    ],
    "ranges": {"sensing": 110.0, "interference": 110.0,
               "communication": 110.0},
    "mac": "lifeadd",
    "mode": "realistic",
    "contention": {"sensing_time_s": 4e-6, "packet_time_s": 0.9e-3,
                   "ack_time_s": 1e-4},
    "traffic": {"saturated": True},
    "duration_s": 10.0,
    "seed": 1,
}


def write(tmp_path, payload):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload))
    return path


def test_stepped_battery_profiles_parse_to_expected_budgets():
    cfg = parse_scenario("scenarios/heterogeneous_trio.json")
    budgets = cfg.efficiencies()
    expected = [
        (joules_from_mah(200.0) / 5400.0 + 0.187 - 0.315) / 1.12,
        (joules_from_mah(100.0) / 2700.0 + 0.09 - 0.315) / 1.12,
        (joules_from_mah(66.6) / 1800.0 + 0.067 - 0.315) / 1.12,
    ]
    assert budgets == pytest.approx(expected)
    assert sum(budgets) < 1.0  # all three energy constraints bind here


def test_mah_voltage_override(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"][0]["energy"]["initial_energy"] = {"mah": 10,
                                                         "voltage": 5.0}
    payload["devices"][0]["energy"]["battery_capacity"] = {"mah": 20}
    cfg = parse_scenario(write(tmp_path, payload))
    assert cfg.devices[0].energy.initial_energy == pytest.approx(180.0)
    assert cfg.devices[0].energy.battery_capacity == pytest.approx(
        joules_from_mah(20.0))


def test_empty_device_list_rejected(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"] = []
    with pytest.raises(ValidationError, match="at least one device"):
        parse_scenario(write(tmp_path, payload))


def test_duplicate_device_id_rejected(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"].append(json.loads(json.dumps(payload["devices"][0])))
    with pytest.raises(ValidationError, match="duplicate device id"):
        parse_scenario(write(tmp_path, payload))


def test_unknown_key_rejected_with_path(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"][0]["oops"] = 1
    with pytest.raises(ParseError, match=r"devices\[0\].*oops"):
        parse_scenario(write(tmp_path, payload))
    payload = json.loads(json.dumps(BASE))
    payload["extra_top"] = 1
    with pytest.raises(ParseError, match="extra_top"):
        parse_scenario(write(tmp_path, payload))


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "field_size": 50.0,\n  oops\n}')
    with pytest.raises(ParseError, match="line 3"):
        parse_scenario(path)


def test_infeasible_lifetime_rejected(tmp_path):
    payload = json.loads(json.dumps(BASE))
    # max feasible lifetime is 100/(0.3-0.1) = 500 s
    payload["devices"][0]["energy"]["target_lifetime_s"] = 600.0
    with pytest.raises(ValidationError, match="d0"):
        parse_scenario(write(tmp_path, payload))


def test_zero_budget_rejected(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"][0]["energy"]["target_lifetime_s"] = 500.0
    with pytest.raises(ValidationError, match="zero energy budget"):
        parse_scenario(write(tmp_path, payload))


def test_all_violations_reported_together(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["duration_s"] = -1.0
    payload["mac"] = "token-ring"
    payload["traffic"]["saturated"] = False
    with pytest.raises(ValidationError) as err:
        parse_scenario(write(tmp_path, payload))
    text = str(err.value)
    assert "duration_s" in text and "mac" in text and "saturated" in text
    assert len(err.value.violations) >= 3


def test_unreachable_device_rejected(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["devices"][0]["position"] = [2000.0, 2000.0]
    with pytest.raises(ValidationError, match="communication range"):
        parse_scenario(write(tmp_path, payload))


def test_renewal_requires_lifeadd_everywhere(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["mode"] = "renewal"
    payload["aps"][0]["mac"] = "dcf"
    with pytest.raises(ValidationError, match="renewal"):
        parse_scenario(write(tmp_path, payload))


def test_packet_distribution_validation(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["traffic"]["packet_bytes"] = {"choices": [100.0, 1500.0],
                                          "weights": [0.5]}
    with pytest.raises(ValidationError, match="same length"):
        parse_scenario(write(tmp_path, payload))
    payload["traffic"]["packet_bytes"] = {"choices": [100.0, -5.0],
                                          "weights": [0.5, 0.5]}
    with pytest.raises(ValidationError, match="> 0"):
        parse_scenario(write(tmp_path, payload))


def test_device_macs_follow_ap_overrides(tmp_path):
    payload = json.loads(json.dumps(BASE))
    payload["aps"].append({"id": "ap1", "position": [40.0, 40.0],
                           "mac": "dcf"})
    payload["devices"].append(
        {"id": "d1", "position": [41.0, 41.0],
         "energy": dict(payload["devices"][0]["energy"]),
         "alpha_bps": 11e6})
    cfg = parse_scenario(write(tmp_path, payload))
    topo = cfg.build_topology()
    assert cfg.device_macs(topo) == ["lifeadd", "dcf"]
    assert cfg.device_macs(topo, "dcf") == ["dcf", "dcf"]


def test_checked_in_scenarios_parse():
    for name in ("single_ap_validation", "single_ap_lifetime",
                 "heterogeneous_trio", "near_far_pair", "multi_ap_4x30",
                 "coexistence_4ap"):
        cfg = parse_scenario(f"scenarios/{name}.json")
        assert cfg.duration_s > 0
