import numpy as np
import pytest

from lifeadd.formulas import (ContentionParams, collision_probability,
                              success_time_fraction)
from lifeadd.renewal import simulate_cycles, validate_against_formulas

PARAMS = ContentionParams(sensing_time=4e-6, packet_time=0.9e-3,
                          ack_time=1e-4)


def test_measured_metrics_match_formulas_within_three_sigma():
    rates = np.array([3774.3, 5661.4, 9435.7])
    est = simulate_cycles(rates, PARAMS, 200_000, seed=42)
    rows = validate_against_formulas(rates, PARAMS, est)
    assert len(rows) == 12
    assert all(row.ok for row in rows)
    # the bands are tight enough to be meaningful
    assert all(row.sigma < 0.01 for row in rows)


def test_single_device_every_cycle_succeeds():
    rate = 2000.0
    est = simulate_cycles([rate], PARAMS, 100_000, seed=1)
    assert est.collision_fraction == 0.0
    assert est.win[0] == 1.0
    predicted = success_time_fraction([rate], PARAMS, 0)
    assert est.success_fraction[0] == pytest.approx(predicted, rel=0.01)


def test_mean_cycle_length():
    rates = np.array([1500.0, 2500.0])
    est = simulate_cycles(rates, PARAMS, 200_000, seed=5)
    expected = 1.0 / rates.sum() + PARAMS.busy_time
    assert est.mean_cycle == pytest.approx(expected, rel=0.01)


def test_collision_fraction_matches_formula():
    rates = np.array([4000.0, 4000.0, 4000.0])
    est = simulate_cycles(rates, PARAMS, 300_000, seed=9)
    predicted = collision_probability(rates, PARAMS)
    sigma = np.sqrt(predicted * (1 - predicted) / est.n_cycles)
    assert abs(est.collision_fraction - predicted) <= 3 * sigma


def test_validation_flags_wrong_prediction():
    rates = np.array([2000.0, 2000.0])
    est = simulate_cycles(rates, PARAMS, 100_000, seed=2)
    rows = validate_against_formulas(rates * 1.5, PARAMS, est)
    assert any(not row.ok for row in rows)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        simulate_cycles([0.0, 100.0], PARAMS, 100, seed=1)
    with pytest.raises(ValueError):
        simulate_cycles([100.0], PARAMS, 0, seed=1)
