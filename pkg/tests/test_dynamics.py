import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrmp.dynamics import (
    RateSpec, Transition, build_generator, crossed_edges, current_decomposition, edge_current,
    edge_currents, enumerate_transitions, generator_to_csv, incoming_transitions, rate_table,
    rotate_spec,
)
from lrmp.exact import is_irreducible, solve
from lrmp.had import had_rates
from lrmp.statespace import StateSpace, apply_move


def symbolic_spec(L, n_max=3, q=0.0):
    # u(m, n) = 10 m + n + 1 makes every entry identifiable from its rate
    u = rate_table(lambda m, n: 10 * m + n + 1, n_max)
    return RateSpec(u, np.arange(1, L + 1) * 100.0, q)


def test_rate_spec_validation():
    with pytest.raises(ValueError):
        RateSpec(np.ones((3, 3)), [1.0])  # row 0 must vanish
    with pytest.raises(ValueError):
        RateSpec(rate_table(lambda m, n: -1.0, 2), [1.0])
    with pytest.raises(ValueError):
        RateSpec(had_rates(2), [1.0, 0.0])
    with pytest.raises(ValueError):
        RateSpec(had_rates(2), [1.0], q=-0.5)


def test_spec_arrays_are_frozen():
    spec = RateSpec(had_rates(2), [1.0, 2.0])
    with pytest.raises(ValueError):
        spec.u[1, 1] = 3.0


def test_undefined_entry_is_an_error():
    u = had_rates(2)
    u[2, 1] = np.nan
    spec = RateSpec(u, [1.0, 1.0])
    with pytest.raises(ValueError):
        enumerate_transitions((2, 1), spec)
    with pytest.raises(IndexError):
        spec.rate(3, 0)


def test_transitions_of_101():
    spec = symbolic_spec(3)
    got = {(t.departure, t.arrival): t.rate for t in enumerate_transitions((1, 0, 1), spec)}
    u, x = spec.u, spec.x
    assert got == {
        (1, 2): x[1] * u[1, 0],
        (1, 3): x[2] * u[1, 1],
        (3, 1): x[0] * u[1, 1],
    }


def test_pile_up_has_L_minus_1_moves():
    spec = symbolic_spec(5, n_max=4)
    moves = enumerate_transitions((4, 0, 0, 0, 0), spec)
    assert sorted((t.departure, t.arrival) for t in moves) == [(1, 2), (1, 3), (1, 4), (1, 5)]


def test_empty_configuration_has_no_moves():
    assert enumerate_transitions((0, 0), symbolic_spec(2)) == []


def test_left_hops_carry_q():
    spec = symbolic_spec(4, q=0.25)
    moves = enumerate_transitions((0, 2, 0, 1), spec)
    left = {(t.departure, t.arrival): t.rate for t in moves if t.direction == "left"}
    u, x = spec.u, spec.x
    assert left == {
        (2, 1): 0.25 * x[0] * u[2, 0],
        (2, 4): 0.25 * x[3] * u[2, 1],
        (4, 3): 0.25 * x[2] * u[1, 0],
        (4, 2): 0.25 * x[1] * u[1, 2],
    }


def test_transition_targets_are_moves():
    spec = symbolic_spec(5, q=1.5)
    for t in enumerate_transitions((0, 2, 1, 0, 1), spec):
        assert t.target == apply_move(t.source, t.departure, t.arrival)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=5), st.sampled_from([0.0, 0.7]))
def test_incoming_mirrors_outgoing(eta, q):
    """Every incoming transition of eta is an outgoing one of its source, and conversely."""
    eta = tuple(eta)
    L, N = len(eta), sum(eta)
    spec = symbolic_spec(L, n_max=max(N, 1), q=q)
    space = StateSpace(L, N)
    expected = set()
    for source in space:
        for t in enumerate_transitions(source, spec):
            if t.target == eta:
                expected.add((t.source, t.departure, t.arrival, t.direction, t.rate))
    got = {(t.source, t.departure, t.arrival, t.direction, t.rate) for t in incoming_transitions(eta, spec)}
    assert got == expected


def test_generator_one_site():
    Q = build_generator(StateSpace(1, 3), RateSpec(had_rates(3), [1.0]))
    assert Q.shape == (1, 1)
    assert Q.nnz == 0 or Q.toarray()[0, 0] == 0


def test_generator_omega_2_1_had():
    Q = build_generator(StateSpace(2, 1), RateSpec(had_rates(1), [1.0, 1.0])).toarray()
    np.testing.assert_array_equal(Q, [[-1.0, 1.0], [1.0, -1.0]])


def test_generator_sums_parallel_hops_on_two_sites():
    spec = RateSpec(had_rates(1), [1.0, 3.0], q=0.5)
    Q = build_generator(StateSpace(2, 1), spec).toarray()
    # (1,0) -> (0,1) by a right hop (rate 3) and a left hop (rate 0.5 * 3)
    assert Q[0, 1] == pytest.approx(4.5)
    assert Q[1, 0] == pytest.approx(1.5)


@settings(max_examples=25)
@given(st.integers(1, 4), st.integers(0, 4), st.sampled_from([0.0, 0.5, 1.0]))
def test_generator_rows_sum_to_zero(L, N, q):
    rng = np.random.default_rng(L * 10 + N)
    u = rate_table(lambda m, n: 0.5 + rng.random(), max(N, 1))
    Q = build_generator(StateSpace(L, N), RateSpec(u, rng.uniform(0.5, 2, L), q))
    assert np.allclose(np.asarray(Q.sum(axis=1)).ravel(), 0.0, atol=1e-12)


def test_generator_irreducible_on_omega_3_2():
    u = rate_table(lambda m, n: 1.0 + m * n, 2)
    assert is_irreducible(build_generator(StateSpace(3, 2), RateSpec(u, [1.0, 2.0, 3.0])))


def test_generator_needs_table_large_enough():
    with pytest.raises(ValueError):
        build_generator(StateSpace(2, 3), RateSpec(had_rates(2), [1.0, 1.0]))
    with pytest.raises(ValueError):
        build_generator(StateSpace(3, 1), RateSpec(had_rates(2), [1.0, 1.0]))


def test_generator_csv():
    Q = build_generator(StateSpace(2, 1), RateSpec(had_rates(1), [1.0, 1.0]))
    lines = generator_to_csv(Q).splitlines()
    assert lines[0] == "row,col,rate"
    assert lines[1:] == ["0,0,-1.0", "0,1,1.0", "1,0,1.0", "1,1,-1.0"]


def test_crossed_edges():
    t = Transition(4, 2, "right", 1.0, (0, 0, 0, 1), (0, 1, 0, 0))
    assert crossed_edges(t, 4) == [4, 1]
    t = Transition(2, 4, "left", 1.0, (0, 1, 0, 0), (0, 0, 0, 1))
    assert crossed_edges(t, 4) == [4, 1]


def test_had_edge_current_two_sites():
    space = StateSpace(2, 1)
    spec = RateSpec(had_rates(1), [1.0, 1.0])
    pi = solve(space, spec)
    assert edge_current(pi, space, spec, (2, 1)) == pytest.approx(0.5)
    assert edge_current(pi, space, spec, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        edge_current(pi, StateSpace(3, 1), RateSpec(had_rates(1), [1.0] * 3), (1, 3))


def test_symmetric_factorising_has_no_current():
    space = StateSpace(4, 3)
    u = rate_table(lambda m, n: m * (n + 1.0), 3)
    spec = RateSpec(u, [1.0, 2.0, 0.5, 1.5], q=1.0)
    np.testing.assert_allclose(edge_currents(solve(space, spec), space, spec), 0.0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.sampled_from([0.0, 0.3, 2.0]))
def test_stationary_currents_are_equal_on_every_edge(L, N, q):
    rng = np.random.default_rng(L + 7 * N)
    u = rate_table(lambda m, n: 0.3 + rng.random(), N)
    spec = RateSpec(u, rng.uniform(0.5, 2, L), q)
    space = StateSpace(L, N)
    J = edge_currents(solve(space, spec), space, spec)
    assert np.ptp(J) < 1e-12


def test_current_decomposition_balances():
    space = StateSpace(3, 3)
    u = rate_table(lambda m, n: 1.0 + m + 2 * n, 3)
    spec = RateSpec(u, [1.0, 2.0, 3.0], q=0.4)
    pi = solve(space, spec)
    for eta in space:
        assert abs(current_decomposition(pi, space, spec, eta).net) < 1e-12


def test_factorising_currents_balance_by_direction():
    space = StateSpace(4, 3)
    spec = RateSpec(had_rates(3), [1.0, 2.0, 3.0, 0.5], q=0.6)
    pi = solve(space, spec)
    for eta in space:
        report = current_decomposition(pi, space, spec, eta)
        assert report.irc == pytest.approx(report.orc, abs=1e-12)
        assert report.ilc == pytest.approx(report.olc, abs=1e-12)


def test_rotate_spec():
    spec = RateSpec(had_rates(1), [1.0, 2.0, 3.0])
    assert tuple(rotate_spec(spec).x) == (3.0, 1.0, 2.0)
    assert tuple(rotate_spec(spec, 3).x) == (1.0, 2.0, 3.0)
