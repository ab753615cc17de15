"""Numerical tolerances shared by every module.

Tests and the CLI import these names rather than hard-coding values.
"""

import os

#: max |pi Q| of a stationary vector, relative to the largest rate
RESIDUAL_TOL = 1e-10
#: max residual of the log-linear product fit for a PRODUCT verdict
PRODUCT_FIT_TOL = 1e-8
#: |sum(pi) - 1|
NORMALIZATION_TOL = 1e-12
#: relative / absolute tolerance for the rate-condition checkers
CONDITION_RTOL = 1e-9
CONDITION_ATOL = 1e-12
#: absolute tolerance for circular (difference-form) decompositions
DECOMPOSE_TOL = 1e-10

DEFAULT_CAPACITY = 20_000


def capacity() -> int:
    """Largest state space the exact solver accepts (env ``LRMP_CAPACITY``)."""
    value = os.environ.get("LRMP_CAPACITY")
    if value is None:
        return DEFAULT_CAPACITY
    return int(value)


def close(a: float, b: float, rtol: float = CONDITION_RTOL, atol: float = CONDITION_ATOL) -> bool:
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)


def as_dict() -> dict:
    return {
        "residual": RESIDUAL_TOL,
        "product_fit": PRODUCT_FIT_TOL,
        "normalization": NORMALIZATION_TOL,
        "condition_rtol": CONDITION_RTOL,
        "condition_atol": CONDITION_ATOL,
        "decompose": DECOMPOSE_TOL,
        "capacity": capacity(),
    }
