"""When does a long-range misanthrope process have a product stationary law?

Three families of conditions on the rate table ``u(m, n)`` are checked here:

* ``check_palrmp``: ``u(m, n) = phi(n)`` for every ``m >= 1``.  Necessary and
  sufficient for inhomogeneous sites and any ``q != 1``.
* ``check_hpalrmp`` / ``check_hpalrmp_alt``: two equivalent systems for
  homogeneous sites (all ``x = 1``) and ``q != 1``.
* ``check_slrmp``: the ratio identity for the symmetric process (``q = 1``),
  homogeneous or not.

A table with ``n_max + 1`` rows can only certify the conditions on the pairs
a system with at most ``n_max`` particles ever uses, i.e. ``m + n <= n_max``.
All checkers work on exactly that region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from . import tolerances
from .statespace import StateSpace


class Variant(str, Enum):
    TALRMP = "talrmp"
    PALRMP = "palrmp"
    HTALRMP = "htalrmp"
    HPALRMP = "hpalrmp"
    SLRMP = "slrmp"
    HSLRMP = "hslrmp"

    @property
    def homogeneous(self) -> bool:
        return self.value.startswith("h")

    @property
    def family(self) -> str:
        """Name of the checker that decides this variant."""
        return {
            "talrmp": "palrmp", "palrmp": "palrmp",
            "htalrmp": "hpalrmp", "hpalrmp": "hpalrmp",
            "slrmp": "slrmp", "hslrmp": "slrmp",
        }[self.value]


class Witness(NamedTuple):
    at: tuple
    condition: str
    residual: float


@dataclass
class CheckerReport:
    variant: str
    passed: bool
    n_max: int
    extracted: dict | None = None
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        extracted = None
        if self.extracted is not None:
            extracted = {k: [float(v) for v in vals] for k, vals in self.extracted.items()}
        return {
            "variant": self.variant,
            "verdict": self.verdict,
            "certified_up_to_n_max": self.n_max,
            "extracted": extracted,
            "witnesses": [
                {"at": list(w.at), "condition": w.condition, "residual": w.residual}
                for w in self.witnesses
            ],
        }


def _table(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 2:
        raise ValueError(f"rate table must be square with n_max >= 1, got shape {u.shape}")
    return u


def region(n_max: int):
    """Pairs (m, n), m >= 1, n >= 0, usable by systems of at most n_max particles."""
    for m in range(1, n_max + 1):
        for n in range(0, n_max - m + 1):
            yield m, n


class _Collector:
    def __init__(self, rtol, atol, limit=50):
        self.rtol, self.atol, self.limit = rtol, atol, limit
        self.witnesses: list[Witness] = []
        self.failed = False

    def compare(self, at, condition, lhs, rhs, *terms):
        scale = max([abs(lhs), abs(rhs)] + [abs(t) for t in terms])
        gap = abs(lhs - rhs)
        if not gap <= max(self.rtol * scale, self.atol):
            self.fail(at, condition, gap)

    def fail(self, at, condition, residual):
        self.failed = True
        if len(self.witnesses) < self.limit:
            self.witnesses.append(Witness(tuple(at), condition, float(residual)))


def _positivity(u, n_max, out: _Collector):
    if np.any(u[0] != 0):
        n = int(np.flatnonzero(u[0] != 0)[0])
        out.fail((0, n), "u(0,n) = 0", abs(u[0, n]))
    for m, n in region(n_max):
        if not u[m, n] > 0:
            out.fail((m, n), "u(m,n) > 0", u[m, n])


def check_palrmp(u, rtol=tolerances.CONDITION_RTOL, atol=tolerances.CONDITION_ATOL) -> CheckerReport:
    """u(m, n) does not depend on the departure occupation m."""
    u = _table(u)
    n_max = u.shape[0] - 1
    out = _Collector(rtol, atol)
    _positivity(u, n_max, out)
    for m, n in region(n_max):
        if m >= 2:
            out.compare((m, n), "u(m,n) = u(1,n)", u[m, n], u[1, n])
    extracted = None if out.failed else {"phi": u[1, :n_max]}
    return CheckerReport("palrmp", not out.failed, n_max, extracted, out.witnesses)


def check_hpalrmp(u, rtol=tolerances.CONDITION_RTOL, atol=tolerances.CONDITION_ATOL) -> CheckerReport:
    """Homogeneous, q != 1: the recursion (a) together with constant u(., 0) (b)."""
    u = _table(u)
    n_max = u.shape[0] - 1
    out = _Collector(rtol, atol)
    _positivity(u, n_max, out)
    if out.failed:
        return CheckerReport("hpalrmp", False, n_max, None, out.witnesses)
    for m in range(2, n_max + 1):
        out.compare((m, 0), "(b) u(m,0) = u(1,0)", u[m, 0], u[1, 0])
    for m, n in region(n_max):
        if n == 0:
            continue
        first = u[1, m] / u[1, n - 1] * u[m + 1, n - 1]
        cm = u[m, 1] - u[1, m]
        cn = u[n, 1] - u[1, n]
        out.compare((m, n), "(a) recursion", u[m, n], first + cm - cn,
                    first, u[m, 1], u[1, m], u[n, 1], u[1, n])
    extracted = None if out.failed else extract_bc(u).as_dict()
    return CheckerReport("hpalrmp", not out.failed, n_max, extracted, out.witnesses)


def check_hpalrmp_alt(u, rtol=tolerances.CONDITION_RTOL, atol=tolerances.CONDITION_ATOL) -> CheckerReport:
    """Equivalent form of :func:`check_hpalrmp`: a ratio identity and a difference identity."""
    u = _table(u)
    n_max = u.shape[0] - 1
    out = _Collector(rtol, atol)
    _positivity(u, n_max, out)
    if out.failed:
        return CheckerReport("hpalrmp_alt", False, n_max, None, out.witnesses)
    for m, n in region(n_max):
        if n == 0:
            continue
        out.compare((m, n), "(a) ratio", u[m, n] / u[1, n], u[n + 1, m - 1] / u[1, m - 1])
        lhs = u[m, n] - u[n, m]
        rhs = (u[m, 1] - u[1, m]) - (u[n, 1] - u[1, n])
        out.compare((m, n), "(b) difference", lhs, rhs,
                    u[m, n], u[n, m], u[m, 1], u[1, m], u[n, 1], u[1, n])
    extracted = None if out.failed else extract_bc(u).as_dict()
    return CheckerReport("hpalrmp_alt", not out.failed, n_max, extracted, out.witnesses)


def check_slrmp(u, rtol=tolerances.CONDITION_RTOL, atol=tolerances.CONDITION_ATOL) -> CheckerReport:
    """u(m,n) / (u(m,0) u(1,n)) == u(n+1,m-1) / (u(n+1,0) u(1,m-1))."""
    u = _table(u)
    n_max = u.shape[0] - 1
    out = _Collector(rtol, atol)
    _positivity(u, n_max, out)
    for m, n in region(n_max):
        if n == 0:
            continue
        denominators = (u[m, 0], u[1, n], u[n + 1, 0], u[1, m - 1])
        if not all(d > 0 for d in denominators):
            raise ValueError(f"zero or undefined rate in the denominators at (m, n) = ({m}, {n})")
        out.compare((m, n), "ratio identity",
                    u[m, n] / (u[m, 0] * u[1, n]),
                    u[n + 1, m - 1] / (u[n + 1, 0] * u[1, m - 1]))
    return CheckerReport("slrmp", not out.failed, n_max, None, out.witnesses)


CHECKERS = {
    "palrmp": check_palrmp,
    "hpalrmp": check_hpalrmp,
    "hpalrmp_alt": check_hpalrmp_alt,
    "slrmp": check_slrmp,
}


# --- one-point functions ------------------------------------------------------


@dataclass(frozen=True)
class OnePointTable:
    """One-point function f(x, n) = x**n * w(n) (homogeneous: f(n) = w(n)).

    ``w(0) = 1`` always.
    """

    weights: np.ndarray
    homogeneous: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1 or np.any(~(w > 0)):
            raise ValueError("one-point weights must be positive")
        w = w / w[0]
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    def _x(self, x, L):
        if x is None:
            return np.ones(L)
        x = np.asarray(x, dtype=float)
        if self.homogeneous and not np.allclose(x, 1.0):
            raise ValueError("a homogeneous one-point function needs x = 1 at every site")
        return x

    def log_values(self, x) -> np.ndarray:
        """(L, n_max + 1) array of log f(x_l, n)."""
        x = self._x(x, 1 if x is None else len(x))
        n = np.arange(self.n_max + 1)
        return np.outer(np.log(x), n) + np.log(self.weights)[None, :]

    def values(self, x) -> np.ndarray:
        return np.exp(self.log_values(x))

    def log_partition(self, space: StateSpace, x=None) -> float:
        return float(logsumexp(self._log_weights(space, x)))

    def _log_weights(self, space: StateSpace, x) -> np.ndarray:
        if space.N > self.n_max:
            raise ValueError(f"one-point table covers n <= {self.n_max} < N={space.N}")
        logf = self.log_values(self._x(x, space.L))
        return logf[np.arange(space.L), space.configs].sum(axis=1)

    def to_dict(self) -> dict:
        return {"homogeneous": self.homogeneous, "weights": [float(v) for v in self.weights]}


def factorised_distribution(table: OnePointTable, space: StateSpace, x=None) -> np.ndarray:
    """Normalised product measure prod_l f(x_l, eta_l) / Z on ``space``."""
    logw = table._log_weights(space, x)
    return np.exp(logw - logsumexp(logw))


def one_point(variant, u) -> OnePointTable:
    """One-point function of a rate table that satisfies the variant's condition."""
    variant = Variant(variant)
    u = _table(u)
    report = CHECKERS[variant.family](u)
    if not report.passed:
        raise ValueError(f"rate table does not satisfy the {variant.family} condition")
    n_max = u.shape[0] - 1
    if variant.family == "slrmp":
        ratios = [u[1, i - 1] / u[i, 0] for i in range(1, n_max + 1)]
    else:
        ratios = [u[1, i - 1] for i in range(1, n_max + 1)]
    weights = np.concatenate([[1.0], np.cumprod(ratios)])
    return OnePointTable(weights, homogeneous=variant.homogeneous)


def target_one_point(g, homogeneous: bool = False) -> OnePointTable:
    """The one-point function a constructor aims for: w(n) = g(n) / g(0)."""
    g = np.asarray(g, dtype=float)
    return OnePointTable(g[:-1] / g[0], homogeneous)


# --- b/c representation ---------------------------------------------------


@dataclass(frozen=True)
class BCPair:
    """b(n) = u(1, n) > 0 and c(n) = u(n, 1) - u(1, n), with c(1) = 0."""

    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        c = np.array(self.c, dtype=float)
        if b.size < 1 or np.any(~(b > 0)):
            raise ValueError("b must be positive")
        if c.size < b.size:
            raise ValueError("c must be at least as long as b")
        if c.size > 1 and c[1] != 0:
            raise ValueError(f"c(1) must be 0, got {c[1]}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def a(self) -> np.ndarray:
        """u(m, 1) = b(m) + c(m)."""
        return self.b + self.c[: self.b.size]

    def as_dict(self) -> dict:
        return {"b": self.b, "c": self.c}


def extract_bc(u) -> BCPair:
    """Read b and c off a table on the certified region (indices < n_max)."""
    u = _table(u)
    n_max = u.shape[0] - 1
    b = u[1, :n_max].copy()
    c = np.empty(n_max)
    c[0] = -b[0]
    for m in range(1, n_max):
        c[m] = u[m, 1] - u[1, m]
    return BCPair(b, c)


def _ratio_products(b, m, n):
    """[prod_{k=1}^{l} b(m+k-1)/b(n-k) for l = 0..n]."""
    out = [1.0]
    for k in range(1, n + 1):
        out.append(out[-1] * b[m + k - 1] / b[n - k])
    return out


def _bc_value(b, c, m, n):
    prods = _ratio_products(b, m, n)
    total = b[0] * prods[n]
    for l in range(n):
        total += (c[m + l] - c[n - l]) * prods[l]
    return total


def u_from_bc(pair: BCPair, n_max: int | None = None) -> np.ndarray:
    """Rate table generated by (b, c).

    ``u(m, 0) = b(0)`` and, for m, n >= 1,
    ``u(m, n) = b(0) prod_k b(m+k-1)/b(n-k)
                + sum_l (c(m+l) - c(n-l)) prod_{k<=l} b(m+k-1)/b(n-k)``.
    Entries needing b or c beyond their length are NaN.
    """
    b, c = pair.b, pair.c
    if n_max is None:
        n_max = b.size - 1
    u = np.full((n_max + 1, n_max + 1), np.nan)
    u[0, :] = 0.0
    u[1:, 0] = b[0]
    for m in range(1, n_max + 1):
        for n in range(1, n_max + 1):
            if m + n - 1 < b.size:
                u[m, n] = _bc_value(b, c, m, n)
    return u


def consistency_sum(pair: BCPair, n: int) -> float:
    """sum_{l=0}^{n-1} (c(1+l) - c(n-l)) prod_{k=1}^{l} b(k)/b(n-k), which vanishes."""
    if n < 1:
        raise ValueError("n must be at least 1")
    b, c = pair.b, pair.c
    if b.size < n or c.size < n + 1:
        raise ValueError(f"need b(0..{n - 1}) and c(0..{n})")
    prods = [1.0]
    for k in range(1, n):
        prods.append(prods[-1] * b[k] / b[n - k])
    return float(sum((c[1 + l] - c[n - l]) * prods[l] for l in range(n)))


# --- rate constructors ----------------------------------------------------


def _g_values(g, n_max: int | None) -> np.ndarray:
    if callable(g):
        if n_max is None:
            raise ValueError("n_max is required when g is a function")
        g = [g(n) for n in range(n_max + 2)]
    g = np.asarray(g, dtype=float)
    if n_max is not None and g.size < n_max + 2:
        raise ValueError(f"need g(0..{n_max + 1}), got {g.size} values")
    if n_max is not None:
        g = g[: n_max + 2]
    if g.size < 2 or np.any(~(g > 0)):
        raise ValueError("g must be positive with at least two values")
    return g


def construct_rate_palrmp(g, n_max: int | None = None) -> np.ndarray:
    """u(m, n) = g(n+1) / g(n): factorises for every q != 1 with f(x, n) = x^n g(n)/g(0)."""
    g = _g_values(g, n_max)
    phi = g[1:] / g[:-1]
    u = np.zeros((phi.size, phi.size))
    u[1:, :] = phi
    return u


def construct_c(b: np.ndarray) -> np.ndarray:
    """Inductive choice of c keeping every u(m, n) positive.

    c(0) = -b(0), c(1) = 0, and c(p) sits one unit above the largest lower
    bound that positivity of u on the anti-diagonal m + n = p + 1 imposes.
    c(2) is nudged if needed so that u(1, 1) != u(2, 1).
    """
    size = b.size
    c = np.zeros(size)
    c[0] = -b[0]
    for p in range(2, size):
        bounds = []
        for n in range(1, p):
            m = p + 1 - n
            prods = _ratio_products(b, m, n)
            rest = b[0] * prods[n] + sum((c[m + l] - c[n - l]) * prods[l] for l in range(n - 1))
            bounds.append(-rest / prods[n - 1])
        c[p] = 1.0 + max(bounds)
        if p == 2 and math.isclose(b[1] + c[1], b[2] + c[2], rel_tol=1e-12, abs_tol=1e-12):
            c[p] += 1.0
    return c


def construct_rate_hpalrmp(g, n_max: int | None = None) -> np.ndarray:
    """Rate whose homogeneous process has one-point g(n)/g(0) but whose
    inhomogeneous process does not factorise."""
    g = _g_values(g, n_max)
    b = g[1:] / g[:-1]
    if b.size < 3:
        raise ValueError("need n_max >= 2 so that u(2, 1) can differ from u(1, 1)")
    return u_from_bc(BCPair(b, construct_c(b)))


def construct_rate_slrmp(g, n_max: int | None = None,
                         phi: Callable[[int], float] | None = None) -> np.ndarray:
    """u(m, n) = phi(m) phi(n+1) g(n+1)/g(n) with phi non-constant, phi(0) = 0.

    Factorises in the symmetric process (one-point g(n)/g(0)) but u(m, 0) is
    not constant, so the homogeneous asymmetric process does not factorise.
    """
    g = _g_values(g, n_max)
    phi = phi or float
    size = g.size - 1
    phis = np.array([0.0] + [phi(m) for m in range(1, size + 1)])
    if np.any(phis[1:] <= 0):
        raise ValueError("phi must be positive on m >= 1")
    psi = phis[1:] * g[1:] / g[:-1]
    return np.outer(phis[:size], psi)


# --- circular decomposition -----------------------------------------------


@dataclass
class Decomposition:
    ok: bool
    h: np.ndarray
    witness: tuple | None = None
    residual: float = 0.0


def circular_decompose(F, tol: float = tolerances.DECOMPOSE_TOL) -> Decomposition:
    """Try F(n, m) = h(n) - h(m) with h(n) = F(n, 1).

    ``F[i, j]`` holds F(i + 1, j + 1); NaN entries are skipped.
    """
    F = np.asarray(F, dtype=float)
    h = F[:, 0].copy()
    if np.any(np.isnan(h)):
        raise ValueError("F(n, 1) must be defined for every n")
    worst, witness = 0.0, None
    for i in range(F.shape[0]):
        for j in range(F.shape[1]):
            if np.isnan(F[i, j]):
                continue
            gap = abs(F[i, j] - (h[i] - h[j]))
            if gap > worst:
                worst, witness = gap, (i + 1, j + 1)
    ok = worst <= tol
    return Decomposition(ok, h, None if ok else witness, float(worst))


def hpalrmp_defect(u) -> np.ndarray:
    """F(m, n) = u(m, n) - u(1, m)/u(1, n-1) * u(m+1, n-1) on the certified region."""
    u = _table(u)
    n_max = u.shape[0] - 1
    K = n_max - 1
    F = np.full((K, K), np.nan)
    for m in range(1, K + 1):
        for n in range(1, K + 1):
            if m + n <= n_max:
                F[m - 1, n - 1] = u[m, n] - u[1, m] / u[1, n - 1] * u[m + 1, n - 1]
    return F


def random_rate_table(rng: np.random.Generator, n_max: int, low: float = 0.2, high: float = 2.0) -> np.ndarray:
    u = rng.uniform(low, high, size=(n_max + 1, n_max + 1))
    u[0] = 0.0
    return u


def perturb(u, m: int, n: int, factor: float = 1.1) -> np.ndarray:
    out = np.array(u, dtype=float)
    out[m, n] *= factor
    return out


__all__ = [
    "Variant", "Witness", "CheckerReport", "region",
    "check_palrmp", "check_hpalrmp", "check_hpalrmp_alt", "check_slrmp", "CHECKERS",
    "OnePointTable", "factorised_distribution", "one_point", "target_one_point",
    "BCPair", "extract_bc", "u_from_bc", "consistency_sum",
    "construct_rate_palrmp", "construct_c", "construct_rate_hpalrmp", "construct_rate_slrmp",
    "Decomposition", "circular_decompose", "hpalrmp_defect", "random_rate_table", "perturb",
]
