"""Nonlocal boxes p(a, b | x, y): validation, CHSH probability, sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

PROB_TOL = 1e-12
CLASSICAL_DELTA = 0.5
TSIRELSON_DELTA = 1 / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class BoxDistribution:
    """Conditional distribution stored as p[a, b, x, y]."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2, 2, 2, 2):
            raise ValueError("box distribution must have shape (2, 2, 2, 2)")
        if np.any(p < -PROB_TOL):
            raise ValueError("probabilities must be non-negative")
        if np.any(np.abs(p.sum(axis=(0, 1)) - 1) > PROB_TOL):
            raise ValueError("p(., . | x, y) must sum to one for every input")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_function(cls, fn) -> "BoxDistribution":
        """Build from ``fn(a, b, x, y) -> probability``."""
        p = np.zeros((2, 2, 2, 2))
        for a, b, x, y in product((0, 1), repeat=4):
            p[a, b, x, y] = fn(a, b, x, y)
        return cls(p)

    @classmethod
    def deterministic(cls, alice, bob) -> "BoxDistribution":
        """a = alice(x, y), b = bob(x, y) with certainty."""
        return cls.from_function(
            lambda a, b, x, y: float(a == alice(x, y) and b == bob(x, y))
        )


@dataclass(frozen=True)
class IsotropicBox:
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")

    def distribution(self) -> BoxDistribution:
        win, lose = (1 + self.delta) / 4, (1 - self.delta) / 4
        return BoxDistribution.from_function(
            lambda a, b, x, y: win if (a ^ b) == (x & y) else lose
        )


def no_signaling_check(box: BoxDistribution, tol: float = PROB_TOL) -> bool:
    p = box.p
    alice = p.sum(axis=1)            # [a, x, y]
    bob = p.sum(axis=0)              # [b, x, y]
    return bool(
        np.all(np.abs(alice[:, :, 0] - alice[:, :, 1]) <= tol)
        and np.all(np.abs(bob[:, 0, :] - bob[:, 1, :]) <= tol)
    )


def chsh_probability(box: BoxDistribution) -> float:
    total = 0.0
    for a, b, x, y in product((0, 1), repeat=4):
        if (a ^ b) == (x & y):
            total += box.p[a, b, x, y]
    return total / 4


def sample(box: IsotropicBox, x, y, rng: np.random.Generator):
    """Draw outputs (a, b) for inputs x, y (scalars or equal-shape arrays).

    a is a fair coin; b = a ^ (x & y) ^ e with e ~ Bernoulli((1 - delta)/2).
    """
    x = np.asarray(x, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    shape = np.broadcast(x, y).shape
    a = rng.integers(0, 2, size=shape, dtype=np.uint8)
    e = (rng.random(size=shape) < (1 - box.delta) / 2).astype(np.uint8)
    b = a ^ (x & y) ^ e
    if shape == ():
        return int(a), int(b)
    return a, b
