"""XOR-game biases: Fourier formula for XOR functions, brute-force oracle,
worst input distributions, and the equality-function analysis.

Pair functions f(x, y) are BoolFn objects of arity 2n with index
x | (y << n); explicit input distributions are (2^n, 2^n) arrays
indexed [x, y].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from . import linprog
from .boolfn import (
    BoolFn,
    Density,
    characters,
    check_arity,
    fwht,
    is_symmetric,
    parity,
    pointwise_product,
    weights_of,
)
from .errors import CapacityError, SolverError

MASS_TOL = 1e-9
ARGMAX_TOL = 1e-12
BRUTE_MAX_ARITY = 4
WORST_MAX_ARITY = 10
BISECT_TOL = 1e-12
BISECT_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class XorGameInstance:
    """An XOR game (f, mu) with f given on pairs and mu explicit."""

    n: int
    f: BoolFn
    mu: np.ndarray

    def __post_init__(self):
        N = 1 << self.n
        if self.f.n != 2 * self.n:
            raise ValueError("f must have arity 2n")
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (N, N):
            raise ValueError(f"mu must have shape {(N, N)}")
        if np.any(mu < 0) or abs(mu.sum() - 1) > MASS_TOL:
            raise ValueError("mu must be a probability distribution")
        mu = mu.copy()
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @property
    def table(self) -> np.ndarray:
        """f as a (2^n, 2^n) array of +-1 indexed [x, y]."""
        N = 1 << self.n
        return self.f.values.reshape(N, N).T

    @classmethod
    def from_table(cls, table, mu) -> "XorGameInstance":
        table = np.asarray(table)
        N = table.shape[0]
        n = N.bit_length() - 1
        return cls(n, BoolFn.from_values(table.T.ravel()), mu)

    @classmethod
    def xor_form(cls, g: BoolFn, q: Density) -> "XorGameInstance":
        if g.n != q.n:
            raise ValueError(f"arity mismatch: {g.n} vs {q.n}")
        N = 1 << g.n
        z = np.arange(N)[:, None] ^ np.arange(N)[None, :]
        return cls.from_table(g.values[z], q.weights[z] / N**2)

    def correlation(self, a, b) -> float:
        """E_mu[f(x,y) A(x) B(y)] for +-1 vectors A and B."""
        return float(np.asarray(a, float) @ (self.mu * self.table) @ np.asarray(b, float))


@dataclass(frozen=True)
class Strategy:
    """Deterministic strategy: Alice outputs a(x), Bob outputs b(y) xor shift."""

    a: BoolFn
    b: BoolFn
    sign_shift: int = 0

    @property
    def bob_values(self) -> np.ndarray:
        return self.b.values * (1 - 2 * self.sign_shift)


def _sign(v: float) -> int:
    return 1 if v >= 0 else -1


def bias_xor_form(g: BoolFn, q: Density) -> tuple[float, int]:
    """Largest |(gq)^(S)| and the smallest S attaining it."""
    c = np.abs(fwht(pointwise_product(g, q)).coeffs)
    beta = float(c.max())
    S = int(np.flatnonzero(c >= beta - ARGMAX_TOL)[0])
    return beta, S


def optimal_strategy(g: BoolFn, q: Density) -> Strategy:
    """Character strategy on the maximizing subset; Bob carries the sign."""
    coeffs = fwht(pointwise_product(g, q)).coeffs
    _, S = bias_xor_form(g, q)
    chi = parity(g.n, S)
    shift = 0 if _sign(coeffs[S]) > 0 else 1
    return Strategy(chi, chi, shift)


def strategy_correlation(instance: XorGameInstance, strategy: Strategy) -> float:
    return instance.correlation(strategy.a.values, strategy.bob_values)


def bias_bruteforce(instance: XorGameInstance) -> float:
    """Max over every Alice function, Bob best-responding per y."""
    if instance.n > BRUTE_MAX_ARITY:
        raise CapacityError(f"brute force is capped at n = {BRUTE_MAX_ARITY}")
    N = 1 << instance.n
    M = instance.mu * instance.table
    # Alice's output at x = 0 can be fixed to +1: negating A leaves |.| unchanged
    codes = np.arange(1 << (N - 1), dtype=np.int64)
    A = 1.0 - 2.0 * ((codes[:, None] >> np.arange(N - 1)) & 1)
    A = np.hstack([np.ones((A.shape[0], 1)), A])
    best = 0.0
    for start in range(0, A.shape[0], 1 << 14):
        block = A[start:start + (1 << 14)] @ M
        best = max(best, float(np.abs(block).sum(axis=1).max()))
    return best


def xor_averaged(instance: XorGameInstance) -> XorGameInstance:
    """Symmetrize mu under (x, y) -> (x ^ r, y ^ r) for uniform shared r."""
    N = 1 << instance.n
    mu = instance.mu
    avg = np.zeros_like(mu)
    x = np.arange(N)
    for r in range(N):
        avg += mu[np.ix_(x ^ r, x ^ r)]
    return XorGameInstance(instance.n, instance.f, avg / N)


def _symmetric_worst(g: BoolFn):
    """Reduced LP over weight classes; valid when g depends only on |z|.

    Averaging q over coordinate permutations permutes the spectrum of gq
    within each level |S|, so an optimal q may be taken symmetric.
    """
    n = g.n
    w = weights_of(n)
    gk = np.array([g.values[np.flatnonzero(w == k)[0]] for k in range(n + 1)], float)
    # K[s, k] = sum_{|z| = k} chi_S(z) for any |S| = s (Krawtchouk)
    K = np.array(
        [[sum((-1) ** j * comb(s, j) * comb(n - s, k - j) for j in range(k + 1))
          for k in range(n + 1)] for s in range(n + 1)],
        dtype=float,
    )
    sizes = np.array([comb(n, k) for k in range(n + 1)], float)
    C = K * gk / sizes                       # coefficient at level s = C[s] @ p
    obj = np.concatenate([np.zeros(n + 1), [1.0]])
    lp = linprog.LinearProgram(obj)
    lp.add(np.concatenate([np.ones(n + 1), [0.0]]), "==", 1.0)
    ones = np.ones((n + 1, 1))
    lp.add_rows(np.hstack([C, -ones]), "<=", 0.0)
    lp.add_rows(np.hstack([-C, -ones]), "<=", 0.0)
    sol = linprog.solve(lp)
    if not sol.optimal:
        raise SolverError(f"worst-distribution LP returned {sol.status.value}")
    p = np.clip(sol.x[: n + 1], 0.0, None)
    q = (p / sizes)[w] * (1 << n)
    return q, sol.value


def _full_worst(g: BoolFn):
    n, N = g.n, 1 << g.n
    G = characters(n) * g.values[None, :] / N           # row S: g(z) chi_S(z) / N
    obj = np.zeros(N + 1)
    obj[-1] = 1.0
    lp = linprog.LinearProgram(obj)
    lp.add(np.concatenate([np.ones(N), [0.0]]), "==", float(N))
    ones = np.ones((N, 1))
    lp.add_rows(np.hstack([G, -ones]), "<=", 0.0)
    lp.add_rows(np.hstack([-G, -ones]), "<=", 0.0)
    sol = linprog.solve(lp)
    if not sol.optimal:
        raise SolverError(f"worst-distribution LP returned {sol.status.value}")
    return np.clip(sol.x[:N], 0.0, None), sol.value


def worst_distribution(g: BoolFn, symmetric: bool | None = None) -> tuple[Density, float]:
    """min over densities q of ||(gq)^||_inf, as a linear program.

    ``symmetric=None`` uses the weight-class reduction whenever g is a
    symmetric function.
    """
    check_arity(g.n, WORST_MAX_ARITY)
    if symmetric is None:
        symmetric = is_symmetric(g)
    if symmetric and not is_symmetric(g):
        raise ValueError("symmetric reduction requested for a non-symmetric g")
    q, _ = _symmetric_worst(g) if symmetric else _full_worst(g)
    q = q * (q.size / q.sum())
    density = Density(g.n, q)
    beta, _ = bias_xor_form(g, density)
    return density, beta


def _bisect(fn, lo, hi, tol=BISECT_TOL, max_iter=BISECT_MAX_ITER):
    flo = fn(lo)
    if flo == 0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def eq_polynomial(lam: float, n: int) -> float:
    return 4 * lam**n - (2 * lam - 1) ** n - 1


def eq_worst_product_lambda(n: int) -> tuple[float, float]:
    """Root lambda* of 4 l^n - (2l - 1)^n - 1 on [1/2, 1] and the bias 1 - 2 lambda*^n.

    This is the worst i.i.d. bit distribution for the negated equality
    game; nu(0) = lambda*.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    lam = _bisect(lambda t: eq_polynomial(t, n), 0.5, 1.0)
    return lam, 1 - 2 * lam**n


def product_bias(nu0: float, n: int) -> float:
    """max_S |(OR_n q)^(S)| for q = (2 nu)^{tensor n}, in closed form."""
    return max(abs(2 * nu0**n - (2 * nu0 - 1) ** s) for s in range(n + 1))


def eq_mixture_protocol_bias(lam: float, weight: float = 1 / 3) -> float:
    """Bias of answering "unequal" w.p. ``weight`` and the random inner
    product test otherwise, when Pr(x = y) = lam."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    return weight * (1 - 2 * lam) + (1 - weight) * lam


EQ_PRODUCT_LIMIT = 2 * math.sqrt(3) - 3
EQ_GENERAL_LIMIT = 1 / 3
