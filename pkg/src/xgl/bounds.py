"""Lower bounds on randomized communication, in bits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .approxnorm import approx_l1
from .boolfn import BoolFn, fwht
from .xorgame import EQ_GENERAL_LIMIT, EQ_PRODUCT_LIMIT

IDENTITY_TOL = 1e-12
GOLDEN_TOL = 1e-12
IC_VALUE_TOL = 1e-10
# a value-based search only pins the argmax to about sqrt(machine eps)
IC_ARGMAX_TOL = 1e-7


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict = field(default_factory=dict)
    value: float = math.nan

    def as_dict(self):
        return {"name": self.name, "inputs": dict(self.inputs), "value": self.value}


def _unit(name, v, lo_open=True):
    if not (0.0 < v <= 1.0 if lo_open else 0.0 <= v <= 1.0):
        raise ValueError(f"{name} must lie in (0, 1]")


def discrepancy_bound(rho: float, beta: float) -> float:
    """log2(rho / beta); a zero bias gives an unbounded (inf) result."""
    _unit("rho", rho)
    if beta == 0:
        return math.inf
    _unit("beta", beta)
    return math.log2(rho / beta)


def nlbox_bound(rho: float, delta: float, beta_nl: float) -> float:
    """log(rho / beta_nl) / log(1 / delta) for boxes of CHSH bias delta."""
    if not 0.5 <= delta < 1.0:
        raise ValueError("delta must lie in [1/2, 1)")
    _unit("rho", rho)
    if beta_nl == 0:
        return math.inf
    _unit("beta_nl", beta_nl)
    return math.log2(rho / beta_nl) / math.log2(1 / delta)


def equality_constants() -> tuple[float, float]:
    """Bounds for equality with Tsirelson boxes: general and product inputs."""
    identity = abs(1 / EQ_PRODUCT_LIMIT - (1 + 2 / math.sqrt(3)))
    if identity > IDENTITY_TOL:
        raise ArithmeticError(f"limit identity off by {identity}")
    delta = 1 / math.sqrt(2)
    general = nlbox_bound(1.0, delta, EQ_GENERAL_LIMIT)
    product = nlbox_bound(1.0, delta, EQ_PRODUCT_LIMIT)
    return general, product


def ls_xor_bound(g: BoolFn, epsilon: float = 0.0) -> float:
    """Spectral-norm bound for the XOR function g(x ^ y) at error epsilon.

    epsilon = 0 gives 2 log ||g^||_1; otherwise
    2 log[(1 - eps) ||g^||_1^{eps / (1 - eps)}].  A nonpositive log
    argument yields nan.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    if epsilon == 0:
        arg = fwht(g).l1
    else:
        arg = (1 - epsilon) * approx_l1(g, epsilon / (1 - epsilon)).value
    return 2 * math.log2(arg) if arg > 0 else math.nan


def _entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _golden_max(fn, lo, hi, tol=GOLDEN_TOL):
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def ic_bound_maximize(extra: float) -> tuple[float, float]:
    """Maximize h(l) + extra (1 - l) over [0, 1].

    Closed form l* = 1 / (1 + 2^extra), value log2(1 + 2^extra); checked
    against a golden-section search.
    """
    if extra < 0:
        raise ValueError("extra must be non-negative")
    lam = 1 / (1 + 2.0**extra)
    value = math.log2(1 + 2.0**extra)
    num_lam, num_val = _golden_max(lambda t: _entropy(t) + extra * (1 - t), 0.0, 1.0)
    if abs(num_lam - lam) > IC_ARGMAX_TOL or abs(num_val - value) > IC_VALUE_TOL:
        raise ArithmeticError("closed form and numeric optimum disagree")
    return lam, value
