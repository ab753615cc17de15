import json

import numpy as np
import pytest

from lrmp.dynamics import RateSpec, rate_table
from lrmp.exact import solve
from lrmp.had import had_rates
from lrmp.montecarlo import EmpiricalMeasure, simulate, tv_distance
from lrmp.statespace import StateSpace


def test_tv_examples():
    assert tv_distance([0.2, 0.8], [0.2, 0.8]) == 0.0
    assert tv_distance([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert tv_distance([0.5, 0.5], [1.0, 0.0]) == 0.5
    with pytest.raises(ValueError):
        tv_distance([1.0], [0.5, 0.5])


def test_empty_system_is_point_mass():
    measure = simulate(RateSpec(had_rates(1), [1.0, 2.0, 3.0]), (0, 0, 0), events=100, seed=1)
    np.testing.assert_array_equal(measure.frequencies, [1.0])
    assert measure.events == 0


def test_single_site_is_frozen():
    measure = simulate(RateSpec(had_rates(3), [1.0]), (3,), events=10)
    np.testing.assert_array_equal(measure.frequencies, [1.0])


def test_same_seed_same_measure():
    spec = RateSpec(had_rates(3), [1.0, 2.0, 3.0])
    a = simulate(spec, (3, 0, 0), events=5000, seed=9)
    b = simulate(spec, (3, 0, 0), events=5000, seed=9)
    c = simulate(spec, (3, 0, 0), events=5000, seed=10)
    assert a.frequencies.tobytes() == b.frequencies.tobytes()
    assert a.total_time == b.total_time
    assert c.frequencies.tobytes() != a.frequencies.tobytes()


def test_time_budget():
    spec = RateSpec(had_rates(2), [1.0, 2.0])
    measure = simulate(spec, (1, 1), time=50.0, seed=3)
    assert measure.total_time == 50.0
    assert measure.frequencies.sum() == pytest.approx(1.0)


def test_budget_validation():
    spec = RateSpec(had_rates(2), [1.0, 2.0])
    with pytest.raises(ValueError):
        simulate(spec, (1, 1))
    with pytest.raises(ValueError):
        simulate(spec, (1, 1), events=0)
    with pytest.raises(ValueError):
        simulate(spec, (1, 1), events=5, time=1.0)
    with pytest.raises(ValueError):
        simulate(spec, (1, 1, 0), events=5)


def test_converges_to_exact():
    spec = RateSpec(had_rates(2), [1.0, 2.0, 0.5], q=0.5)
    exact = solve(StateSpace(3, 2), spec)
    measure = simulate(spec, (2, 0, 0), events=200_000, seed=5)
    assert tv_distance(measure, exact) < 0.01


def test_q_independence_statistically():
    u = rate_table(lambda m, n: 1.0 / (n + 1.0) ** 2, 3)
    runs = [simulate(RateSpec(u, [1.0, 2.0, 3.0], q), (3, 0, 0), events=1_000_000, seed=4) for q in (0.0, 2.0)]
    assert tv_distance(runs[0], runs[1]) < 0.02


def test_json_export():
    spec = RateSpec(had_rates(2), [1.0, 2.0])
    data = json.loads(simulate(spec, (2, 0), events=50, seed=0).to_json())
    assert data["L"] == 2 and data["N"] == 2 and len(data["pi"]) == 3
    assert data["events"] == 50 and data["seed"] == 0
