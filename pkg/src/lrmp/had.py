"""The discrete Hammersley-Aldous-Diaconis (HAD) process on a ring.

This is the totally asymmetric long-range process with ``u(m, n) = 1/(n + 1)``.
Its stationary law is multinomial:

    pi(eta) = N! prod_l x_l**eta_l / eta_l!  /  (x_1 + ... + x_L)**N

so each site is Binomial(N, x_l / sum(x)).  Everything is computed in log
space since ``sum(x)**N`` overflows quickly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log

import numpy as np
from scipy.stats import binom

from .dynamics import RateSpec, crossed_edges, enumerate_transitions, rate_table
from .statespace import StateSpace, add_particle, occupied_sites


def had_rates(n_max: int) -> np.ndarray:
    return rate_table(lambda m, n: 1.0 / (n + 1), n_max)


@dataclass(frozen=True)
class HadSystem:
    L: int
    N: int
    x: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        if len(x) != self.L:
            raise ValueError(f"{len(x)} site parameters for L={self.L}")
        if any(not v > 0 for v in x):
            raise ValueError("site parameters must be positive")
        if self.N < 0:
            raise ValueError(f"N must be non-negative, got {self.N}")
        object.__setattr__(self, "x", x)

    @property
    def space(self) -> StateSpace:
        return StateSpace(self.L, self.N)

    def spec(self, n_max: int | None = None) -> RateSpec:
        return RateSpec(had_rates(max(self.N, 1) if n_max is None else n_max), self.x, 0.0)


def log_had_weight(eta, x) -> float:
    N = sum(eta)
    return lgamma(N + 1) + sum(n * log(v) - lgamma(n + 1) for n, v in zip(eta, x))


def had_weight(eta, x) -> float:
    """Multinomial weight N! prod x_l**eta_l / eta_l!."""
    if len(eta) != len(x):
        raise ValueError(f"{len(x)} site parameters for {len(eta)} sites")
    return float(np.exp(log_had_weight(eta, x)))


def had_probability(eta, x) -> float:
    if len(eta) != len(x):
        raise ValueError(f"{len(x)} site parameters for {len(eta)} sites")
    return float(np.exp(log_had_weight(eta, x) - sum(eta) * log(sum(x))))


def had_distribution(space: StateSpace, x) -> np.ndarray:
    """Stationary vector over ``space`` in rank order."""
    x = np.asarray(x, dtype=float)
    if x.size != space.L:
        raise ValueError(f"{x.size} site parameters for L={space.L}")
    configs = space.configs
    log_fact = np.array([lgamma(n + 1) for n in range(space.N + 1)])
    logw = lgamma(space.N + 1) + configs @ np.log(x) - log_fact[configs].sum(axis=1)
    return np.exp(logw - space.N * log(x.sum()))


def site_marginal(sys: HadSystem, site: int) -> np.ndarray:
    """Binomial(N, x_l / sum(x)) probabilities for occupations 0..N."""
    p = sys.x[(site - 1) % sys.L] / sum(sys.x)
    return binom.pmf(np.arange(sys.N + 1), sys.N, p)


def brute_force_marginal(pi, space: StateSpace, site: int) -> np.ndarray:
    out = np.zeros(space.N + 1)
    np.add.at(out, space.configs[:, (site - 1) % space.L], pi)
    return out


def edge_current_formula(sys: HadSystem) -> float:
    """Stationary current across any edge.

    J = S/(N+1) * (1 - sum_l (x_l/S)**(N+1)) with S = sum(x).  Only
    configurations of N+1 particles on at least two sites contribute; the
    subtracted terms are the single-site pile-ups.
    """
    if sys.L < 2:
        raise ValueError("a ring with one site has no edge to cross")
    if sys.N == 0:
        return 0.0
    x = np.asarray(sys.x)
    S = x.sum()
    return float(S / (sys.N + 1) * (1.0 - np.sum((x / S) ** (sys.N + 1))))


@dataclass
class BijectionReport:
    L: int
    N: int
    transitions: int
    image_size: int
    injective: bool
    surjective: bool
    worst_identity_gap: float
    current: float

    @property
    def ok(self) -> bool:
        return self.injective and self.surjective and self.worst_identity_gap <= 1e-12

    def to_dict(self) -> dict:
        return {
            "transitions": self.transitions, "image_size": self.image_size,
            "injective": self.injective, "surjective": self.surjective,
            "worst_identity_gap": self.worst_identity_gap, "current": self.current,
            "bijection_ok": self.ok,
        }


def edge_transition_bijection(sys: HadSystem) -> BijectionReport:
    """Match hops across edge (L, 1) with configurations of N+1 particles.

    A hop into site l crossing that edge maps to eta plus a particle at l.
    The image should be exactly the configurations with at least two occupied
    sites, and pi(eta) x_l/(eta_l + 1) = S/(N+1) pi(eta^l) for each pair.
    """
    if sys.L < 2:
        raise ValueError("a ring with one site has no edge to cross")
    L, N, x = sys.L, sys.N, sys.x
    spec = sys.spec(max(N + 1, 1))
    S = sum(x)
    images = []
    worst, current = 0.0, 0.0
    for eta in StateSpace(L, N):
        p = had_probability(eta, x)
        for t in enumerate_transitions(eta, spec):
            if L not in crossed_edges(t, L):
                continue
            image = add_particle(eta, t.arrival)
            images.append(image)
            lhs = p * t.rate
            rhs = S / (N + 1) * had_probability(image, x)
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
            current += lhs
    expected = {eta for eta in StateSpace(L, N + 1) if len(occupied_sites(eta)) >= 2}
    image_set = set(images)
    return BijectionReport(
        L, N, len(images), len(image_set),
        injective=len(image_set) == len(images),
        surjective=image_set == expected,
        worst_identity_gap=float(worst),
        current=float(current),
    )


@dataclass
class CurrentSweep:
    N: list
    current: list

    @property
    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.current, self.current[1:]))

    def to_csv(self) -> str:
        return "N,current\n" + "".join(f"{n},{j!r}\n" for n, j in zip(self.N, self.current))


def current_monotonicity(x, N_range) -> CurrentSweep:
    """Formula current for each N.

    For L >= 3 it strictly decreases in N.  On two sites the values at N = 1
    and N = 2 coincide (both equal x1 x2 / (x1 + x2)).
    """
    x = tuple(x)
    Ns = list(N_range)
    return CurrentSweep(Ns, [edge_current_formula(HadSystem(len(x), n, x)) for n in Ns])


def had_report(sys: HadSystem) -> dict:
    return {
        "L": sys.L, "N": sys.N, "x": list(sys.x),
        "marginal": [site_marginal(sys, l).tolist() for l in range(1, sys.L + 1)],
        "current": edge_current_formula(sys) if sys.L >= 2 else None,
        "bijection_ok": edge_transition_bijection(sys).ok if sys.L >= 2 else None,
    }
