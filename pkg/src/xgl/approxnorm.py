"""Approximate Fourier l1 norms and the dual sign classes f* and f**.

For a point x the matching subset is S_x = {i : x_i = -1}; with bitmask
indexing this is the identity map, so "g(x) = sign(f^(S_x))" reads
``g[x] = sign(coeffs[x])``.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linprog
from .boolfn import ZERO_TOL, BoolFn, RealFn, characters, check_arity, fwht
from .errors import InconsistencyError, SolverError

MAX_LP_ARITY = 5
TIGHT_TOL = 1e-6
KKT_EPSILON = 0.25


@dataclass(frozen=True)
class ApproxNormResult:
    epsilon: float
    value: float
    witness: RealFn
    tight: bool


@dataclass(frozen=True)
class DualSignClass:
    """The box constraints defining f*: fixed signs plus free positions."""

    n: int
    fixed: dict
    free: tuple

    @classmethod
    def of(cls, f: BoolFn) -> "DualSignClass":
        c = fwht(f).coeffs
        nz = np.abs(c) > ZERO_TOL
        fixed = {int(x): int(np.sign(c[x])) for x in np.flatnonzero(nz)}
        return cls(f.n, fixed, tuple(int(x) for x in np.flatnonzero(~nz)))

    def contains(self, h, tol: float = 1e-9) -> bool:
        h = np.asarray(getattr(h, "values", h), dtype=float)
        if np.any(np.abs(h) > 1 + tol):
            return False
        return all(abs(h[x] - s) <= tol for x, s in self.fixed.items())


def _sign_split(f: BoolFn):
    c = fwht(f).coeffs
    nz = np.abs(c) > ZERO_TOL
    return np.where(nz, np.sign(c), 0.0), nz


def _l1_lp(n, lo, hi):
    """min ||h^||_1 over lo <= h <= hi, with split variables h^ = p - m."""
    N = 1 << n
    H = characters(n).astype(float) / N
    obj = np.concatenate([np.zeros(N), np.ones(2 * N)])
    lp = linprog.LinearProgram(obj, bounds=list(zip(lo, hi)) + [(0.0, np.inf)] * (2 * N))
    eye = np.eye(N)
    lp.add_rows(np.hstack([-H, eye, -eye]), "==", 0.0)
    sol = linprog.solve(lp)
    if not sol.optimal:
        raise SolverError(f"l1 LP returned {sol.status.value}")
    h = np.clip(sol.x[:N], lo, hi)
    return sol.value, h


def approx_l1(f: BoolFn, epsilon: float) -> ApproxNormResult:
    """min ||h^||_1 over real h with |h(x) - f(x)| <= epsilon for all x."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    check_arity(f.n, MAX_LP_ARITY)
    fv = f.values.astype(float)
    value, h = _l1_lp(f.n, fv - epsilon, fv + epsilon)
    if np.any(np.abs(h - fv) > epsilon + 1e-7):
        raise SolverError("witness left the epsilon box")
    l1_h = fwht(h).l1
    if abs(l1_h - value) > 1e-6:
        raise SolverError(f"witness norm {l1_h} disagrees with LP value {value}")
    exact = fwht(f).l1
    tight = abs(value - (1 - epsilon) * exact) <= TIGHT_TOL * max(1.0, value)
    return ApproxNormResult(epsilon, value, RealFn(f.n, h), bool(tight))


def fstar_min_l1(f: BoolFn) -> float:
    """min ||h^||_1 over h in f*."""
    check_arity(f.n, MAX_LP_ARITY)
    signs, nz = _sign_split(f)
    lo = np.where(nz, signs, -1.0)
    hi = np.where(nz, signs, 1.0)
    value, _ = _l1_lp(f.n, lo, hi)
    return value


def _fstarstar_system(values: np.ndarray, n: int, H: np.ndarray):
    """Solve for g in f* with f(y) g^(S_y) >= 0 for every y.

    Returns the certificate g, or None.
    """
    N = 1 << n
    c = H @ values / N
    nz = np.abs(c) > ZERO_TOL
    signs = np.sign(c)
    g = np.where(nz, signs, 0.0)
    scaled = values[:, None] * H           # row y: f(y) chi_{S_y}(x)
    if np.all(scaled @ g >= -1e-12):
        return g
    free = np.flatnonzero(~nz)
    if free.size == 0:
        return None
    base = scaled[:, nz] @ signs[nz]
    A = scaled[:, free]
    lp = linprog.LinearProgram(np.zeros(free.size), bounds=[(-1.0, 1.0)] * free.size)
    lp.add_rows(A, ">=", -base)
    ok, w = linprog.feasible(lp, margin=0.0)
    if not ok:
        return None
    g[free] = w
    return g


def in_fstarstar(f: BoolFn, cross_check: bool = True) -> tuple[bool, RealFn | None]:
    """Decide f in f** and return a certificate g in f* when it is.

    With ``cross_check`` the answer is compared against tightness of the
    approximate norm at epsilon = 0.25; a disagreement raises.
    """
    check_arity(f.n, MAX_LP_ARITY)
    H = characters(f.n).astype(float)
    g = _fstarstar_system(f.values.astype(float), f.n, H)
    member = g is not None
    if cross_check:
        tight = approx_l1(f, KKT_EPSILON).tight
        if tight != member:
            raise InconsistencyError(
                f"f** membership {member} but tightness {tight} for {f!r}"
            )
    return member, (RealFn(f.n, g) if member else None)


# -- symmetry group used to shrink exhaustive counts -------------------------
#
# Membership in f** is invariant under coordinate permutations, input
# shifts f(z ^ a), character modulation f(z) chi_b(z), and negation.

def _group_actions(n: int):
    """Index maps and sign vectors for every group element (up to negation)."""
    from itertools import permutations

    N = 1 << n
    z = np.arange(N)
    perms = []
    for p in permutations(range(n)):
        img = np.zeros(N, dtype=np.int64)
        for i, pi in enumerate(p):
            img |= ((z >> i) & 1) << pi
        perms.append(img)
    chi = characters(n).astype(np.int8)
    idx, sgn = [], []
    for img in perms:
        for a in range(N):
            src = img ^ a
            for b in range(N):
                idx.append(src)
                sgn.append(chi[b])
    return np.array(idx), np.array(sgn, dtype=np.int8)


def orbits(n: int):
    """Yield (representative_table_int, orbit_size) covering all 2^(2^n) functions."""
    check_arity(n, 4)
    N = 1 << n
    idx, sgn = _group_actions(n)
    weights = (1 << np.arange(N, dtype=np.int64))
    seen = np.zeros(1 << N, dtype=bool)
    for t in range(1 << N):
        if seen[t]:
            continue
        bits = (t >> np.arange(N)) & 1
        vals = 1 - 2 * bits
        images = vals[idx] * sgn
        images = np.concatenate([images, -images])
        codes = np.unique(((1 - images) // 2) @ weights)
        seen[codes] = True
        yield t, int(codes.size)


@dataclass(frozen=True)
class ClassifyResult:
    n: int
    members: int
    total: int
    examined: int
    lower_bound: bool

    def as_dict(self):
        return {
            "n": self.n,
            "members": self.members,
            "total": self.total,
            "examined": self.examined,
            "lower_bound": self.lower_bound,
        }


def _members_in_range(args):
    n, start, stop, cross_check = args
    H = characters(n).astype(float)
    N = 1 << n
    shifts = np.arange(N)
    count = 0
    for t in range(start, stop):
        vals = 1.0 - 2.0 * ((t >> shifts) & 1)
        member = _fstarstar_system(vals, n, H) is not None
        if cross_check:
            tight = approx_l1(BoolFn.from_values(vals.astype(int)), KKT_EPSILON).tight
            if tight != member:
                raise InconsistencyError(f"route disagreement at table {t}")
        count += member
    return count


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("XGL_THREADS", "1") or 1)
    return max(1, threads)


def classify_all(
    n: int,
    mode: str = "full",
    budget: int | None = None,
    *,
    sample: int = 1000,
    seed: int = 0,
    symmetry: bool = False,
    cross_check: bool = False,
    checkpoint: str | os.PathLike | None = None,
    chunk: int = 1 << 24,
    threads: int | None = None,
) -> ClassifyResult:
    """Count f in f** over all (or sampled) boolean functions of arity n.

    ``mode="full"`` for n <= 4 is exact; with ``symmetry`` it tests one
    representative per orbit.  For n = 5 the full mode walks table
    indices in checkpointed chunks and, when ``budget`` stops it early,
    reports the members found so far as a lower bound.  ``mode="sample"``
    tests ``sample`` uniformly random functions.
    """
    check_arity(n, MAX_LP_ARITY)
    total = 1 << (1 << n)
    if mode == "sample":
        rng = np.random.default_rng(seed)
        N = 1 << n
        H = characters(n).astype(float)
        hits = 0
        for _ in range(sample):
            vals = 1.0 - 2.0 * rng.integers(0, 2, size=N)
            hits += _fstarstar_system(vals, n, H) is not None
        return ClassifyResult(n, hits, total, sample, lower_bound=True)
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")

    if n <= 4 and symmetry and budget is None and checkpoint is None:
        members = 0
        for t, size in orbits(n):
            if _members_in_range((n, t, t + 1, cross_check)):
                members += size
        return ClassifyResult(n, members, total, total, lower_bound=False)

    limit = total if budget is None else min(total, budget)
    state = _load_checkpoint(checkpoint, n)
    done, members = state["next"], state["members"]
    workers = _threads(threads)
    while done < limit:
        stop = min(limit, done + chunk)
        pieces = np.linspace(done, stop, workers + 1).astype(np.int64)
        jobs = [(n, int(a), int(b), cross_check) for a, b in zip(pieces[:-1], pieces[1:]) if b > a]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(workers) as pool:
                members += sum(pool.map(_members_in_range, jobs))
        else:
            members += sum(map(_members_in_range, jobs))
        done = stop
        _save_checkpoint(checkpoint, n, done, members)
    return ClassifyResult(n, members, total, done, lower_bound=done < total)


def _load_checkpoint(path, n):
    if path is None:
        return {"next": 0, "members": 0}
    f = Path(path) / f"classify_n{n}.json"
    if not f.exists():
        return {"next": 0, "members": 0}
    state = json.loads(f.read_text())
    if state.get("n") != n:
        raise ValueError("checkpoint belongs to a different arity")
    return state


def _save_checkpoint(path, n, done, members):
    if path is None:
        return
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    tmp = d / f"classify_n{n}.json.tmp"
    tmp.write_text(json.dumps({"n": n, "next": done, "members": members}))
    tmp.replace(d / f"classify_n{n}.json")
