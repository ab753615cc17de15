"""Exact stationary distributions and balance diagnostics.

Distributions are plain numpy vectors indexed by state-space rank.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import tolerances
from .dynamics import RateSpec, build_generator, enumerate_transitions, incoming_transitions
from .statespace import StateSpace


class ReducibleError(RuntimeError):
    """The transition digraph is not strongly connected."""


class CapacityError(RuntimeError):
    """The state space is larger than the solver accepts."""


def check_capacity(size: int) -> None:
    cap = tolerances.capacity()
    if size > cap:
        raise CapacityError(f"state space of size {size} exceeds capacity {cap} (set LRMP_CAPACITY)")


def is_irreducible(Q) -> bool:
    Q = sp.csr_matrix(Q)
    if Q.shape[0] == 1:
        return True
    adjacency = Q.copy()
    adjacency.setdiag(0)
    adjacency.eliminate_zeros()
    n_components, _ = connected_components(adjacency, directed=True, connection="strong")
    return n_components == 1


def stationary(Q) -> np.ndarray:
    """Solve pi Q = 0, sum(pi) = 1 by dense LU.

    The last balance equation is replaced by the normalisation constraint.
    """
    size = Q.shape[0]
    check_capacity(size)
    if not is_irreducible(Q):
        raise ReducibleError("generator is reducible; the stationary law is not unique")
    A = Q.toarray().T if sp.issparse(Q) else np.array(Q, dtype=float).T
    A[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    pi = scipy.linalg.solve(A, rhs)
    scale = max(float(np.max(np.abs(Q.diagonal()))), 1.0) if size > 1 else 1.0
    residual = balance_residual(pi, Q)
    if residual > tolerances.RESIDUAL_TOL * scale:
        raise ArithmeticError(f"stationary solve residual {residual:.3e} above tolerance")
    return pi


def solve(space: StateSpace, spec: RateSpec) -> np.ndarray:
    check_capacity(len(space))
    return stationary(build_generator(space, spec))


def balance_residual(sigma, Q) -> float:
    """max over states of |inflow - outflow| = max |sigma Q|."""
    sigma = np.asarray(sigma, dtype=float)
    return float(np.max(np.abs(Q.T @ sigma))) if len(sigma) else 0.0


@dataclass
class BalanceReport:
    holds: bool
    worst: float
    witness: tuple | None = None  # (source, target) configurations

    def to_dict(self) -> dict:
        return {"holds": self.holds, "worst": self.worst, "witness": self.witness}


def check_detailed_balance(pi, spec: RateSpec, space: StateSpace, tol: float = tolerances.RESIDUAL_TOL) -> BalanceReport:
    """pi(a) Q(a, b) == pi(b) Q(b, a) for every pair of states."""
    pi = np.asarray(pi)
    Q = sp.coo_matrix(build_generator(space, spec))
    Qcsr = Q.tocsr()
    worst, witness = 0.0, None
    for a, b, rate in zip(Q.row, Q.col, Q.data):
        if a == b:
            continue
        gap = abs(pi[a] * rate - pi[b] * Qcsr[b, a])
        if gap > worst:
            worst, witness = float(gap), (space[a], space[b])
    return BalanceReport(worst <= tol, worst, witness)


def _pairwise_currents(pi, space, spec, eta):
    """Per-site (incoming-from-site, outgoing-to-site) current pairs."""
    p_eta = pi[space.rank(eta)]
    incoming = np.zeros(space.L)
    outgoing = np.zeros(space.L)
    for t in incoming_transitions(eta, spec):
        incoming[t.departure - 1] += pi[space.rank(t.source)] * t.rate
    for t in enumerate_transitions(eta, spec):
        outgoing[t.arrival - 1] += p_eta * t.rate
    return incoming, outgoing


def check_pairwise_balance_talrmp(pi, spec: RateSpec, space: StateSpace, occupied_only: bool = False,
                                  tol: float = tolerances.RESIDUAL_TOL) -> BalanceReport:
    """Site-wise pairing of the totally asymmetric process.

    For q = 0 each site l has exactly one transition into eta that removes a
    particle from l, and one transition out of eta that delivers a particle to
    l.  Their stationary currents must agree.
    """
    if spec.q != 0:
        raise ValueError("pairwise pairing is defined for the totally asymmetric process (q = 0)")
    pi = np.asarray(pi)
    worst, witness = 0.0, None
    for eta in space:
        if occupied_only and min(eta) == 0:
            continue
        incoming, outgoing = _pairwise_currents(pi, space, spec, eta)
        gaps = np.abs(incoming - outgoing)
        site = int(np.argmax(gaps))
        if gaps[site] > worst:
            worst, witness = float(gaps[site]), (eta, site + 1)
    return BalanceReport(worst <= tol, worst, witness)


@dataclass
class ProductFit:
    is_product: bool
    residual: float
    log_g: np.ndarray  # (L, N + 1); entries for unused occupations are 0
    log_z: float

    @property
    def verdict(self) -> str:
        return "PRODUCT" if self.is_product else "NOT PRODUCT"


def product_form_oracle(pi, space: StateSpace, tol: float = tolerances.PRODUCT_FIT_TOL) -> ProductFit:
    """Least-squares fit of log pi(eta) = sum_l log g_l(eta_l) - log Z.

    The one-point values are free per site, so the fit is independent of any
    formula for them.
    """
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise ValueError("product-form fit needs a strictly positive distribution")
    L, N = space.L, space.N
    design = np.zeros((len(space), L * (N + 1) + 1))
    rows = np.arange(len(space))
    for site in range(L):
        design[rows, site * (N + 1) + space.configs[:, site]] = 1.0
    design[:, -1] = -1.0
    target = np.log(pi)
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.max(np.abs(design @ coef - target)))
    return ProductFit(residual < tol, residual, coef[:-1].reshape(L, N + 1), float(coef[-1]))


def distribution_to_dict(pi, space: StateSpace) -> dict:
    return {"L": space.L, "N": space.N, "pi": [float(v) for v in pi]}


def distribution_to_json(pi, space: StateSpace) -> str:
    return json.dumps(distribution_to_dict(pi, space))


def distribution_from_json(text: str) -> tuple[StateSpace, np.ndarray]:
    data = json.loads(text)
    space = StateSpace(int(data["L"]), int(data["N"]))
    pi = np.array(data["pi"], dtype=float)
    if pi.shape != (len(space),):
        raise ValueError(f"expected {len(space)} probabilities, got {pi.shape}")
    return space, pi
