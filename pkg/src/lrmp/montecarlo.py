"""Kinetic Monte Carlo for the long-range misanthrope process.

Direct method: from the current configuration take every transition, wait an
exponential time with the total rate, then pick one transition with
probability proportional to its rate.  Occupation is weighted by holding time.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64).  Exponential
and uniform variates are drawn in fixed-size batches, so a given seed always
yields the same trajectory.  The outgoing transitions of each visited state
are cached by rank; this changes nothing about the sampled law.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

from .dynamics import RateSpec, enumerate_transitions
from .statespace import StateSpace, as_configuration

BATCH = 65_536


@dataclass
class EmpiricalMeasure:
    space: StateSpace
    frequencies: np.ndarray
    total_time: float
    events: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "L": self.space.L, "N": self.space.N,
            "pi": [float(v) for v in self.frequencies],
            "total_time": self.total_time, "events": self.events, "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def simulate(spec: RateSpec, initial, events: int | None = None, time: float | None = None,
             seed: int = 0) -> EmpiricalMeasure:
    """Run one trajectory for ``events`` jumps or ``time`` units of time."""
    if (events is None) == (time is None):
        raise ValueError("give exactly one of events or time")
    if events is not None and events <= 0:
        raise ValueError("event budget must be positive")
    if time is not None and not time > 0:
        raise ValueError("time budget must be positive")
    initial = as_configuration(initial)
    if len(initial) != spec.L:
        raise ValueError(f"initial configuration has {len(initial)} sites, spec has {spec.L}")
    space = StateSpace(spec.L, sum(initial))
    if space.N > spec.n_max:
        raise ValueError(f"rate table covers n_max={spec.n_max} < N={space.N}")
    occupation = np.zeros(len(space))
    state = space.rank(initial)

    cache: dict[int, tuple[list[int], list[float], float]] = {}

    def moves(r):
        entry = cache.get(r)
        if entry is None:
            ts = enumerate_transitions(space[r], spec)
            cumulative = list(accumulate(t.rate for t in ts))
            entry = ([space.rank(t.target) for t in ts], cumulative, cumulative[-1] if ts else 0.0)
            cache[r] = entry
        return entry

    if moves(state)[2] == 0.0:
        # frozen configuration: a point mass
        occupation[state] = 1.0
        return EmpiricalMeasure(space, occupation, float(time or 0.0), 0, seed)

    rng = np.random.default_rng(seed)
    clock, done, k = 0.0, 0, BATCH
    while True:
        if k == BATCH:
            waits, picks, k = rng.standard_exponential(BATCH), rng.random(BATCH), 0
        targets, cumulative, total = moves(state)
        hold = waits[k] / total
        if time is not None and clock + hold >= time:
            occupation[state] += time - clock
            clock = time
            break
        occupation[state] += hold
        clock += hold
        state = targets[bisect_right(cumulative, picks[k] * total)]
        k += 1
        done += 1
        if events is not None and done == events:
            break
    return EmpiricalMeasure(space, occupation / occupation.sum(), clock, done, seed)


def tv_distance(a, b) -> float:
    """Total variation distance 1/2 sum |a - b|."""
    a = a.frequencies if isinstance(a, EmpiricalMeasure) else np.asarray(a, dtype=float)
    b = b.frequencies if isinstance(b, EmpiricalMeasure) else np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"distributions on different spaces: {a.shape} vs {b.shape}")
    return float(0.5 * np.abs(a - b).sum())
