"""Configurations of N particles on a ring of L sites.

A configuration is a tuple of occupation numbers ``(eta_1, ..., eta_L)``.
Sites are 1-indexed at the public boundary and reduced modulo L, so site
``L + 1`` is site 1 and site 0 is site L.

The state space is ordered colexicographically: the last site is the most
significant, so ``(N, 0, ..., 0)`` has rank 0 and ``(0, ..., 0, N)`` has the
largest rank.  Ranks use the combinatorial number system on the stars-and-bars
bar positions, which makes ``rank``/``unrank`` O(L) without lookup tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence

import numpy as np

Configuration = tuple[int, ...]


def as_configuration(eta: Sequence[int]) -> Configuration:
    config = tuple(int(v) for v in eta)
    if any(v < 0 for v in config):
        raise ValueError(f"negative occupation in {config}")
    return config


def _site(L: int, site: int) -> int:
    """0-based index of a 1-based (cyclic) site label."""
    return (site - 1) % L


@dataclass(frozen=True)
class StateSpace:
    """All weak compositions of ``N`` into ``L`` parts, with a ranking."""

    L: int
    N: int
    configs: np.ndarray = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"a lattice needs at least one site, got L={self.L}")
        if self.N < 0:
            raise ValueError(f"particle number must be non-negative, got N={self.N}")
        configs = np.array([unrank(r, self.L, self.N) for r in range(len(self))], dtype=np.int64)
        configs = configs.reshape(len(self), self.L)
        configs.setflags(write=False)
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "_index", {tuple(map(int, c)): i for i, c in enumerate(configs)})

    def __len__(self) -> int:
        return comb(self.L + self.N - 1, self.N)

    def __iter__(self) -> Iterator[Configuration]:
        for row in self.configs:
            yield tuple(int(v) for v in row)

    def __getitem__(self, r: int) -> Configuration:
        return tuple(int(v) for v in self.configs[r])

    def rank(self, eta: Sequence[int]) -> int:
        try:
            return self._index[tuple(eta)]
        except KeyError:
            raise ValueError(f"{tuple(eta)} is not in Omega({self.L},{self.N})") from None

    def __contains__(self, eta) -> bool:
        return tuple(eta) in self._index


def enumerate_space(L: int, N: int) -> StateSpace:
    return StateSpace(L, N)


def space_size(L: int, N: int) -> int:
    if L < 1:
        raise ValueError(f"a lattice needs at least one site, got L={L}")
    return comb(L + N - 1, N)


def rank(eta: Sequence[int]) -> int:
    """Colex rank of ``eta`` within Omega(len(eta), sum(eta))."""
    L = len(eta)
    if L == 0:
        raise ValueError("empty configuration has no lattice")
    N = sum(eta)
    total = comb(L + N - 1, N)
    # bar i sits after the first i parts: position prefix_i + (i - 1)
    subset_rank = 0
    prefix = 0
    for i in range(1, L):
        prefix += eta[i - 1]
        subset_rank += comb(prefix + i - 1, i)
    return total - 1 - subset_rank


def unrank(r: int, L: int, N: int) -> Configuration:
    """Inverse of :func:`rank` on Omega(L, N)."""
    if L < 1:
        raise ValueError(f"a lattice needs at least one site, got L={L}")
    total = comb(L + N - 1, N)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} outside [0, {total})")
    subset_rank = total - 1 - r
    k = L - 1
    n = N + L - 1
    bars = [0] * k
    while k > 0:
        n -= 1
        offset = comb(n, k)
        if subset_rank >= offset:
            subset_rank -= offset
            k -= 1
            bars[k] = n
    eta = []
    previous = -1
    for b in bars:
        eta.append(b - previous - 1)
        previous = b
    eta.append(N + L - 1 - previous - 1)
    return tuple(eta)


def apply_move(eta: Sequence[int], k: int, l: int) -> Configuration:
    """Move one particle from site ``k`` to site ``l`` (1-based, cyclic)."""
    L = len(eta)
    i, j = _site(L, k), _site(L, l)
    if i == j:
        raise ValueError(f"departure and arrival coincide (site {k})")
    if eta[i] < 1:
        raise ValueError(f"site {k} is empty in {tuple(eta)}")
    out = list(eta)
    out[i] -= 1
    out[j] += 1
    return tuple(out)


def add_particle(eta: Sequence[int], l: int) -> Configuration:
    out = list(eta)
    out[_site(len(eta), l)] += 1
    return tuple(out)


def occupied_sites(eta: Sequence[int]) -> list[int]:
    return [i + 1 for i, v in enumerate(eta) if v > 0]


def compress(eta: Sequence[int], x: Sequence[float] | None = None) -> tuple[Configuration, tuple[float, ...]]:
    """Drop the empty sites; the survivors keep their rate parameters.

    Returns the compressed configuration (all sites occupied) and the
    parameters it carries.
    """
    if sum(eta) == 0:
        raise ValueError("cannot compress a configuration without particles")
    x = _parameters(eta, x)
    sites = [i for i, v in enumerate(eta) if v > 0]
    return tuple(eta[i] for i in sites), tuple(x[i] for i in sites)


def compress_with_empty(eta: Sequence[int], x: Sequence[float] | None = None) -> tuple[Configuration, tuple[float, ...]]:
    """Like :func:`compress` but keeps the (empty) last site at the end."""
    if eta[-1] != 0:
        raise ValueError(f"site L must be empty, got {tuple(eta)}")
    if sum(eta) == 0:
        raise ValueError("cannot compress a configuration without particles")
    hat, x_hat = compress(eta, x)
    x = _parameters(eta, x)
    return hat + (0,), x_hat + (x[-1],)


def shift(eta: Sequence[int], times: int = 1) -> Configuration:
    """Cyclic right rotation: (e1, ..., eL) -> (eL, e1, ..., e_{L-1})."""
    eta = tuple(eta)
    times %= len(eta)
    if times == 0:
        return eta
    return eta[-times:] + eta[:-times]


def _parameters(eta, x):
    if x is None:
        return (1.0,) * len(eta)
    if len(x) != len(eta):
        raise ValueError(f"{len(x)} rate parameters for {len(eta)} sites")
    return tuple(float(v) for v in x)


def configuration_to_json(eta: Sequence[int]) -> str:
    return json.dumps([int(v) for v in eta])


def configuration_from_json(text: str) -> Configuration:
    return as_configuration(json.loads(text))
