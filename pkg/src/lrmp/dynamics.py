"""Long-range misanthrope dynamics on a ring.

A particle at site k may hop to any site l such that every site strictly
between k and l, in the direction of travel, is empty.  A clockwise (right)
hop has rate ``x[l] * u(eta_k, eta_l)``; an anticlockwise (left) hop has the
same rate multiplied by ``q``.

Rate tables are square arrays ``u[m, n]`` for ``0 <= m, n <= n_max``.  A NaN
entry means "not defined"; any transition that needs one is an error.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .statespace import Configuration, StateSpace


def rate_table(func: Callable[[int, int], float], n_max: int) -> np.ndarray:
    """Tabulate ``func(m, n)`` for ``1 <= m <= n_max``; row 0 is zero."""
    u = np.zeros((n_max + 1, n_max + 1))
    for m in range(1, n_max + 1):
        for n in range(n_max + 1):
            u[m, n] = func(m, n)
    return u


@dataclass(frozen=True)
class RateSpec:
    """Hop-rate table ``u``, site parameters ``x`` and left-hop factor ``q``."""

    u: np.ndarray
    x: np.ndarray
    q: float = 0.0
    n_max: int = field(init=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        x = np.array(self.x, dtype=float).reshape(-1)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise ValueError(f"rate table must be square, got shape {u.shape}")
        if np.any(u[0] != 0):
            raise ValueError("u(0, n) must be zero: an empty site cannot emit")
        if np.any(u[~np.isnan(u)] < 0):
            raise ValueError("rates must be non-negative")
        if self.q < 0:
            raise ValueError(f"q must be non-negative, got {self.q}")
        if x.size < 1 or np.any(~(x > 0)):
            raise ValueError("site parameters must be positive")
        u.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "n_max", u.shape[0] - 1)

    @classmethod
    def homogeneous(cls, u, L: int, q: float = 0.0) -> "RateSpec":
        return cls(u, np.ones(L), q)

    @property
    def L(self) -> int:
        return self.x.size

    def rate(self, m: int, n: int) -> float:
        if m > self.n_max or n > self.n_max:
            raise IndexError(f"u({m},{n}) is outside the table (n_max={self.n_max})")
        value = self.u[m, n]
        if np.isnan(value):
            raise ValueError(f"u({m},{n}) is undefined in this table")
        return float(value)

    def with_q(self, q: float) -> "RateSpec":
        return RateSpec(self.u, self.x, q)

    def with_x(self, x) -> "RateSpec":
        return RateSpec(self.u, x, self.q)


@dataclass(frozen=True)
class Transition:
    departure: int  # 1-based site
    arrival: int
    direction: str  # "right" or "left"
    rate: float
    source: Configuration
    target: Configuration


def _check_dimensions(eta, spec: RateSpec):
    if len(eta) != spec.L:
        raise ValueError(f"{len(eta)} sites but {spec.L} rate parameters")


def _reachable(eta, i: int, step: int) -> list[int]:
    """Sites reachable from index ``i`` walking in ``step`` direction.

    The walk stops at (and includes) the first occupied site, and never
    returns to ``i``.
    """
    L = len(eta)
    out = []
    j = (i + step) % L
    while j != i:
        out.append(j)
        if eta[j] > 0:
            break
        j = (j + step) % L
    return out


def enumerate_transitions(eta: Sequence[int], spec: RateSpec) -> list[Transition]:
    """All transitions out of ``eta`` with positive rate."""
    _check_dimensions(eta, spec)
    eta = tuple(eta)
    moves = [(1, "right", 1.0)]
    if spec.q > 0:
        moves.append((-1, "left", spec.q))
    out = []
    for i, m in enumerate(eta):
        if m == 0:
            continue
        for step, direction, factor in moves:
            for j in _reachable(eta, i, step):
                rate = factor * spec.x[j] * spec.rate(m, eta[j])
                if rate == 0:
                    continue
                target = list(eta)
                target[i] -= 1
                target[j] += 1
                out.append(Transition(i + 1, j + 1, direction, float(rate), eta, tuple(target)))
    return out


def incoming_transitions(eta: Sequence[int], spec: RateSpec) -> list[Transition]:
    """All transitions into ``eta`` with positive rate."""
    _check_dimensions(eta, spec)
    eta = tuple(eta)
    moves = [(1, "right", 1.0)]
    if spec.q > 0:
        moves.append((-1, "left", spec.q))
    out = []
    for j, n in enumerate(eta):
        if n == 0:
            continue
        for step, direction, factor in moves:
            # departures lie behind the arrival site, up to the first occupied one
            for i in _reachable(eta, j, -step):
                rate = factor * spec.x[j] * spec.rate(eta[i] + 1, n - 1)
                if rate == 0:
                    continue
                source = list(eta)
                source[i] += 1
                source[j] -= 1
                out.append(Transition(i + 1, j + 1, direction, float(rate), tuple(source), eta))
    return out


def build_generator(space: StateSpace, spec: RateSpec) -> sp.csr_matrix:
    """CTMC generator Q with ``Q[a, b]`` the total rate from rank a to rank b."""
    if spec.L != space.L:
        raise ValueError(f"{spec.L} rate parameters for {space.L} sites")
    if space.N > spec.n_max:
        raise ValueError(f"rate table covers n_max={spec.n_max} < N={space.N}")
    rows, cols, vals = [], [], []
    for a, eta in enumerate(space):
        for t in enumerate_transitions(eta, spec):
            rows.append(a)
            cols.append(space.rank(t.target))
            vals.append(t.rate)
    size = len(space)
    # duplicate (a, b) pairs are summed, which merges parallel hops on L = 2
    Q = sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr()
    Q = Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())
    return Q.tocsr()


def generator_to_csv(Q) -> str:
    coo = sp.coo_matrix(Q)
    buf = io.StringIO()
    buf.write("row,col,rate\n")
    for r, c, v in sorted(zip(coo.row, coo.col, coo.data)):
        buf.write(f"{int(r)},{int(c)},{float(v)!r}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class CurrentReport:
    """Incoming/outgoing probability currents at one configuration."""

    irc: float
    orc: float
    ilc: float
    olc: float

    @property
    def net(self) -> float:
        return (self.irc - self.orc) + (self.ilc - self.olc)


def current_decomposition(pi, space: StateSpace, spec: RateSpec, eta: Sequence[int]) -> CurrentReport:
    pi = np.asarray(pi)
    sums = {"irc": 0.0, "orc": 0.0, "ilc": 0.0, "olc": 0.0}
    p_eta = pi[space.rank(eta)]
    for t in enumerate_transitions(eta, spec):
        sums["orc" if t.direction == "right" else "olc"] += p_eta * t.rate
    for t in incoming_transitions(eta, spec):
        sums["irc" if t.direction == "right" else "ilc"] += pi[space.rank(t.source)] * t.rate
    return CurrentReport(**sums)


def crossed_edges(t: Transition, L: int) -> list[int]:
    """Edges crossed by a hop; edge ``a`` joins site a to site a + 1."""
    if t.direction == "right":
        start, stop = t.departure, t.arrival
    else:
        start, stop = t.arrival, t.departure
    edges = []
    a = start
    while a != stop:
        edges.append(a)
        a = a % L + 1
    return edges


def edge_currents(pi, space: StateSpace, spec: RateSpec) -> np.ndarray:
    """Signed particle current across every edge (clockwise positive)."""
    pi = np.asarray(pi)
    current = np.zeros(space.L)
    for a, eta in enumerate(space):
        for t in enumerate_transitions(eta, spec):
            sign = 1.0 if t.direction == "right" else -1.0
            for e in crossed_edges(t, space.L):
                current[e - 1] += sign * pi[a] * t.rate
    return current


def edge_current(pi, space: StateSpace, spec: RateSpec, edge) -> float:
    """Current across ``edge``: a site ``a`` or an adjacent pair ``(a, a + 1)``."""
    L = space.L
    if isinstance(edge, tuple):
        a, b = edge
        if (a % L) + 1 != ((b - 1) % L) + 1:
            raise ValueError(f"{edge} is not a clockwise edge of a ring with {L} sites")
        edge = a
    return float(edge_currents(pi, space, spec)[(edge - 1) % L])


def rotate_spec(spec: RateSpec, shifts: int = 1) -> RateSpec:
    """Rotate the site parameters right by ``shifts`` (site l gets x_{l-1})."""
    return RateSpec(spec.u, np.roll(spec.x, shifts), spec.q)
