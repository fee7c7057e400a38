"""Dense two-phase bounded revised simplex.

Problems are stated as

    minimize  c . x
    subject to  row_i . x  (<=, ==, >=)  rhs_i
                lo_j <= x_j <= hi_j      (either side may be infinite)

Inequalities get slack columns; bounds are handled natively by the
ratio test, so box constraints cost nothing.  Dantzig pricing is used
until ``bland_after`` iterations, then Bland's rule for anti-cycling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import SolverError

RELATIONS = ("<=", "==", ">=", "<", ">")
STRICT_MARGIN = 1e-7
PRIMAL_TOL = 1e-7
SLACKNESS_TOL = 1e-6

_PIVOT_TOL = 1e-9
_OPT_TOL = 1e-9
_REFACTOR_EVERY = 64


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """A dense LP.  Default bounds are x >= 0."""

    objective: np.ndarray
    constraints: list = field(default_factory=list)
    bounds: list | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * self.objective.size
        self.constraints = [self._check(*c) for c in self.constraints]

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def _check(self, row, rel, rhs):
        row = np.asarray(row, dtype=float).ravel()
        if row.size != self.num_vars:
            raise ValueError(f"row has {row.size} entries, expected {self.num_vars}")
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        if not (np.all(np.isfinite(row)) and np.isfinite(rhs)):
            raise ValueError("constraint coefficients must be finite")
        return row, rel, float(rhs)

    def add(self, row, rel: str, rhs: float) -> "LinearProgram":
        self.constraints.append(self._check(row, rel, rhs))
        return self

    def add_rows(self, rows, rel: str, rhs) -> "LinearProgram":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (rows.shape[0],))
        for r, b in zip(rows, rhs):
            self.add(r, rel, b)
        return self

    def matrix(self):
        m = len(self.constraints)
        A = np.zeros((m, self.num_vars))
        for i, (row, _, _) in enumerate(self.constraints):
            A[i] = row
        rels = [c[1] for c in self.constraints]
        rhs = np.array([c[2] for c in self.constraints], dtype=float)
        lo = np.array([b[0] for b in self.bounds], dtype=float)
        hi = np.array([b[1] for b in self.bounds], dtype=float)
        if lo.size != self.num_vars or np.any(lo > hi):
            raise ValueError("bad variable bounds")
        return A, rels, rhs, lo, hi


@dataclass
class LPSolution:
    status: Status
    x: np.ndarray | None = None
    value: float = np.nan
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_value: float = np.nan
    iterations: int = 0
    primal_residual: float = np.nan
    slackness_residual: float = np.nan

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Simplex:
    """Bounded revised simplex on  A x = b,  lo <= x <= hi."""

    def __init__(self, A, b, lo, hi, max_iter, bland_after):
        self.A, self.b, self.lo, self.hi = A, b, lo.copy(), hi.copy()
        self.m, self.nv = A.shape
        self.max_iter, self.bland_after = max_iter, bland_after
        self.iterations = 0

    def _refactor(self):
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis") from exc
        nonbasic = np.ones(self.A.shape[1], dtype=bool)
        nonbasic[self.basis] = False
        xb = self.Binv @ (self.b - self.A[:, nonbasic] @ self.x[nonbasic])
        self.x[self.basis] = xb

    def run(self, cost) -> Status:
        A, lo, hi = self.A, self.lo, self.hi
        self._refactor()
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(f"no convergence after {self.iterations} iterations")
            if since_refactor >= _REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0
            y = cost[self.basis] @ self.Binv
            d = cost - y @ A
            d[self.basis] = 0.0
            x = self.x
            inc = (d < -_OPT_TOL) & (x < hi - _PIVOT_TOL)
            dec = (d > _OPT_TOL) & (x > lo + _PIVOT_TOL)
            inc[self.basis] = dec[self.basis] = False
            elig = inc | dec
            if not elig.any():
                self.y, self.d = y, d
                return Status.OPTIMAL
            if self.iterations < self.bland_after:
                j = int(np.argmax(np.where(elig, np.abs(d), -1.0)))
            else:
                j = int(np.flatnonzero(elig)[0])
            sigma = 1.0 if inc[j] else -1.0
            w = self.Binv @ A[:, j]
            sw = sigma * w
            xb = x[self.basis]
            lb, ub = lo[self.basis], hi[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.full(self.m, np.inf)
                down = sw > _PIVOT_TOL
                up = sw < -_PIVOT_TOL
                ratio[down] = (xb[down] - lb[down]) / sw[down]
                ratio[up] = (ub[up] - xb[up]) / -sw[up]
            ratio = np.maximum(ratio, 0.0)
            t_flip = hi[j] - lo[j]
            t_best = ratio.min() if self.m else np.inf
            if not np.isfinite(t_best) and not np.isfinite(t_flip):
                return Status.UNBOUNDED
            self.iterations += 1
            if t_flip <= t_best:
                x[j] += sigma * t_flip
                x[self.basis] = xb - t_flip * sw
                continue
            ties = np.flatnonzero(ratio <= t_best + 1e-12)
            if self.iterations < self.bland_after:
                r = int(ties[np.argmax(np.abs(w[ties]))])
            else:
                r = int(ties[np.argmin(self.basis[ties])])
            leaving = self.basis[r]
            x[j] += sigma * t_best
            x[self.basis] = xb - t_best * sw
            x[leaving] = lb[r] if down[r] else ub[r]
            self.basis[r] = j
            piv = w[r]
            row = self.Binv[r] / piv
            self.Binv -= np.outer(w, row)
            self.Binv[r] = row
            since_refactor += 1


def _standard_form(lp: LinearProgram, margin: float):
    A, rels, rhs, lo, hi = lp.matrix()
    m, n = A.shape
    slack_sign = []
    rhs = rhs.copy()
    for i, rel in enumerate(rels):
        if rel in ("<=", "<"):
            slack_sign.append((i, 1.0))
            if rel == "<":
                rhs[i] -= margin
        elif rel in (">=", ">"):
            slack_sign.append((i, -1.0))
            if rel == ">":
                rhs[i] += margin
    S = np.zeros((m, len(slack_sign)))
    for k, (i, s) in enumerate(slack_sign):
        S[i, k] = s
    As = np.hstack([A, S])
    los = np.concatenate([lo, np.zeros(len(slack_sign))])
    his = np.concatenate([hi, np.full(len(slack_sign), np.inf)])
    return As, rhs, los, his, n


def solve(lp: LinearProgram, *, max_iter: int = 50_000, bland_after: int = 5_000,
          _margin: float = 0.0) -> LPSolution:
    """Solve ``lp``; returns an optimal basic solution with duals, or a status."""
    if lp.num_vars > 20_000:
        raise ValueError("too many variables for the dense solver")
    As, b, lo, hi, n = _standard_form(lp, _margin)
    m, nv = As.shape
    cost = np.concatenate([lp.objective, np.zeros(nv - n)])

    x0 = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    resid = b - As @ x0
    sgn = np.where(resid >= 0, 1.0, -1.0)
    Af = np.hstack([As, np.diag(sgn)])
    lof = np.concatenate([lo, np.zeros(m)])
    hif = np.concatenate([hi, np.full(m, np.inf)])

    sx = _Simplex(Af, b, lof, hif, max_iter, bland_after)
    sx.x = np.concatenate([x0, np.abs(resid)])
    sx.basis = np.arange(nv, nv + m)

    phase1 = np.concatenate([np.zeros(nv), np.ones(m)])
    if m:
        sx.run(phase1)
        infeas = sx.x[nv:].sum()
        if infeas > PRIMAL_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LPSolution(Status.INFEASIBLE, iterations=sx.iterations)
    sx.hi[nv:] = 0.0
    nonbasic_art = np.setdiff1d(np.arange(nv, nv + m), sx.basis)
    sx.x[nonbasic_art] = 0.0

    full_cost = np.concatenate([cost, np.zeros(m)])
    status = sx.run(full_cost)
    if status is Status.UNBOUNDED:
        return LPSolution(Status.UNBOUNDED, iterations=sx.iterations)
    sx._refactor()

    x = sx.x[:nv]
    # artificials may stay basic at zero; they carry zero cost
    y = full_cost[sx.basis] @ sx.Binv if m else np.zeros(0)
    d = cost - (y @ As if m else 0.0)
    d[sx.basis[sx.basis < nv]] = 0.0
    d = np.where(np.abs(d) <= _OPT_TOL, 0.0, d)
    xs = x[:n]
    value = float(lp.objective @ xs)

    d_lo, d_hi = np.maximum(d, 0.0), np.minimum(d, 0.0)
    with np.errstate(invalid="ignore"):
        bound_part = np.where(d_lo > 0, d_lo * lo, 0.0) + np.where(d_hi < 0, d_hi * hi, 0.0)
    dual_value = float(y @ b + np.nansum(bound_part))

    primal_res = float(np.abs(As @ x - b).max(initial=0.0))
    primal_res = max(primal_res, float(np.maximum(lo - x, 0).max(initial=0.0)),
                     float(np.maximum(x - hi, 0).max(initial=0.0)))
    with np.errstate(invalid="ignore"):
        gap_lo = np.where(np.isfinite(lo), x - lo, np.inf)
        gap_hi = np.where(np.isfinite(hi), hi - x, np.inf)
        cs = np.where(np.abs(d) <= _OPT_TOL, 0.0, np.abs(d) * np.minimum(gap_lo, gap_hi))
    return LPSolution(
        Status.OPTIMAL,
        x=xs.copy(),
        value=value,
        duals=y,
        reduced_costs=d[:n],
        dual_value=dual_value,
        iterations=sx.iterations,
        primal_residual=primal_res,
        slackness_residual=float(cs.max(initial=0.0)),
    )


def feasible(lp: LinearProgram, margin: float = STRICT_MARGIN) -> tuple[bool, np.ndarray | None]:
    """Phase-one feasibility.  Strict rows are tightened by ``margin``.

    The witness is re-checked against the original rows, so a ``True``
    answer is never produced for an infeasible system; a strict system
    whose slack is below ``margin`` may be reported infeasible.
    """
    probe = LinearProgram(np.zeros(lp.num_vars), list(lp.constraints), list(lp.bounds))
    sol = solve(probe, _margin=margin)
    if not sol.optimal:
        return False, None
    x = sol.x
    A, rels, rhs, lo, hi = lp.matrix()
    tol = 1e-9
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        return False, None
    lhs = A @ x
    for v, rel, b in zip(lhs, rels, rhs):
        ok = {
            "<=": v <= b + tol,
            ">=": v >= b - tol,
            "==": abs(v - b) <= tol,
            "<": v < b,
            ">": v > b,
        }[rel]
        if not ok:
            return False, None
    return True, x
