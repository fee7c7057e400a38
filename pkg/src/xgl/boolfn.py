"""Boolean functions on {+1,-1}^n, densities, and Walsh-Hadamard spectra.

Indexing: a point z is an integer whose bit i is set iff z_{i+1} = -1
(classical bit 1).  A subset S is a bitmask in the same way, so the
character chi_S(z) is (-1)^popcount(S & z).  Boolean tables use the
encoding bit 0 -> +1 and bit 1 -> -1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import CapacityError

MAX_ARITY = 24
ZERO_TOL = 1e-9
MASS_TOL = 1e-9


def check_arity(n: int, cap: int = MAX_ARITY) -> int:
    n = int(n)
    if n < 0:
        raise ValueError(f"arity must be non-negative, got {n}")
    if n > cap:
        raise CapacityError(f"arity {n} exceeds cap {cap}")
    return n


def _arity_of_length(length: int) -> int:
    n = int(length).bit_length() - 1
    if length < 1 or (1 << n) != length:
        raise ValueError(f"table length {length} is not a power of two")
    return check_arity(n)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def popcount(a):
    """Vectorized popcount for non-negative integer arrays."""
    return np.bitwise_count(np.asarray(a, dtype=np.uint64))


def characters(n: int) -> np.ndarray:
    """The 2^n x 2^n matrix chi[S, z] = (-1)^|S & z| as int8."""
    check_arity(n, 14)
    idx = np.arange(1 << n, dtype=np.uint64)
    return (1 - 2 * (popcount(idx[:, None] & idx[None, :]) & 1)).astype(np.int8)


@dataclass(frozen=True, eq=False)
class BoolFn:
    """A +-1 valued function on {+1,-1}^n stored as a packed truth table."""

    n: int
    packed: np.ndarray

    def __post_init__(self):
        check_arity(self.n)
        need = max(1, (1 << self.n) // 8) if self.n >= 3 else 1
        if self.packed.dtype != np.uint8 or self.packed.size != need:
            raise ValueError("packed table has the wrong size for arity")
        object.__setattr__(self, "packed", _frozen(self.packed))

    @classmethod
    def from_bits(cls, bits) -> "BoolFn":
        bits = np.asarray(bits).astype(bool).ravel()
        n = _arity_of_length(bits.size)
        return cls(n, np.packbits(bits, bitorder="little"))

    @classmethod
    def from_values(cls, values) -> "BoolFn":
        values = np.asarray(values).ravel()
        if not np.all((values == 1) | (values == -1)):
            raise ValueError("values must be +1 or -1")
        return cls.from_bits(values == -1)

    @classmethod
    def from_int(cls, n: int, table: int) -> "BoolFn":
        """Bit z of ``table`` is the classical output on point z."""
        check_arity(n, 16)
        size = 1 << n
        if not 0 <= table < (1 << size):
            raise ValueError("table integer out of range for arity")
        raw = np.frombuffer(int(table).to_bytes(max(1, size // 8), "little"), np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[:size]
        return cls.from_bits(bits)

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[int], int]) -> "BoolFn":
        """Build from ``fn(z) -> classical bit`` over integer points z."""
        check_arity(n)
        return cls.from_bits([fn(z) & 1 for z in range(1 << n)])

    @cached_property
    def bits(self) -> np.ndarray:
        return _frozen(np.unpackbits(self.packed, bitorder="little")[: 1 << self.n])

    @cached_property
    def values(self) -> np.ndarray:
        return _frozen(1 - 2 * self.bits.astype(np.int8))

    def to_int(self) -> int:
        return int.from_bytes(self.packed.tobytes(), "little") & ((1 << (1 << self.n)) - 1)

    def __call__(self, z: int) -> int:
        return int(self.values[z])

    def __neg__(self) -> "BoolFn":
        return BoolFn.from_bits(1 - self.bits)

    def __eq__(self, other):
        return (
            isinstance(other, BoolFn)
            and self.n == other.n
            and np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.n, self.packed.tobytes()))

    def __repr__(self):
        return f"BoolFn(n={self.n}, bits={''.join(map(str, self.bits[:64]))})"

    # text format: "n=<k>" then 2^k characters 0/1, or a 0x-prefixed hex string
    @classmethod
    def from_text(cls, text: str) -> "BoolFn":
        n, body = _split_header(text)
        body = "".join(body.split())
        if body.lower().startswith("0x"):
            return cls.from_int(n, int(body, 16))
        if len(body) != 1 << n or set(body) - {"0", "1"}:
            raise ValueError(f"expected {1 << n} characters of 0/1")
        return cls.from_bits([c == "1" for c in body])

    def to_text(self) -> str:
        return f"n={self.n}\n{''.join(map(str, self.bits))}\n"


@dataclass(frozen=True, eq=False)
class RealFn:
    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size != 1 << check_arity(self.n):
            raise ValueError("RealFn length must be 2^n")
        if not np.all(np.isfinite(v)):
            raise ValueError("RealFn values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_array(cls, values) -> "RealFn":
        values = np.asarray(values, dtype=float).ravel()
        return cls(_arity_of_length(values.size), values)


@dataclass(frozen=True, eq=False)
class Density:
    """Non-negative weights q with sum 2^n (mean one)."""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        size = 1 << check_arity(self.n)
        if w.size != size:
            raise ValueError("Density length must be 2^n")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("Density weights must be finite and non-negative")
        if abs(w.sum() - size) > MASS_TOL * size:
            raise ValueError(f"Density weights must sum to 2^n={size}, got {w.sum()}")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def values(self) -> np.ndarray:
        return self.weights

    @classmethod
    def uniform(cls, n: int) -> "Density":
        return cls(n, np.ones(1 << check_arity(n)))

    @classmethod
    def from_probabilities(cls, p) -> "Density":
        """Scale a probability vector on {0,1}^n to a density."""
        p = np.asarray(p, dtype=float).ravel()
        n = _arity_of_length(p.size)
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        return cls(n, p * (p.size / p.sum()))

    @classmethod
    def product(cls, nu0: float, n: int) -> "Density":
        """q = (2 nu)^{tensor n} for the bit distribution nu = (nu0, 1 - nu0)."""
        if not 0.0 <= nu0 <= 1.0:
            raise ValueError("nu0 must lie in [0, 1]")
        check_arity(n)
        ones = popcount(np.arange(1 << n, dtype=np.uint64)).astype(float)
        return cls(n, (2 * nu0) ** (n - ones) * (2 * (1 - nu0)) ** ones)

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.size

    @classmethod
    def from_text(cls, text: str) -> "Density":
        n, body = _split_header(text)
        vals = [float(tok) for tok in body.split()]
        return cls(n, np.array(vals))

    def to_text(self) -> str:
        return f"n={self.n}\n" + " ".join(f"{w:.12g}" for w in self.weights) + "\n"


@dataclass(frozen=True, eq=False)
class Spectrum:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size != 1 << check_arity(self.n):
            raise ValueError("Spectrum length must be 2^n")
        object.__setattr__(self, "coeffs", _frozen(c))

    def __getitem__(self, S: int) -> float:
        return float(self.coeffs[S])

    @property
    def l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    @property
    def linf(self) -> float:
        return float(np.abs(self.coeffs).max())

    @property
    def l0(self) -> int:
        return int(np.count_nonzero(np.abs(self.coeffs) > ZERO_TOL))


def _split_header(text: str) -> tuple[int, str]:
    text = text.strip()
    head, _, body = text.partition("\n")
    head = head.strip()
    if not head.startswith("n="):
        raise ValueError("missing 'n=<k>' header")
    first, _, rest = head.partition(" ")
    n = check_arity(int(first[2:]))
    return n, (rest + "\n" + body).strip()


def wht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis."""
    a = np.array(a, dtype=float)
    lead, size = a.shape[:-1], a.shape[-1]
    _arity_of_length(size)
    h = 1
    while h < size:
        a = a.reshape(*lead, -1, 2, h)
        a = np.stack((a[..., 0, :] + a[..., 1, :], a[..., 0, :] - a[..., 1, :]), axis=-2)
        h *= 2
    return a.reshape(*lead, size)


def _values_of(f) -> np.ndarray:
    if isinstance(f, (BoolFn, RealFn, Density)):
        return np.asarray(f.values, dtype=float)
    return np.asarray(f, dtype=float).ravel()


def fwht(f) -> Spectrum:
    """Fourier coefficients 2^-n sum_z f(z) chi_S(z) of f."""
    v = _values_of(f)
    n = _arity_of_length(v.size)
    return Spectrum(n, wht(v) / v.size)


def inverse_fwht(s: Spectrum) -> RealFn:
    return RealFn(s.n, wht(s.coeffs))


def norms(s: Spectrum) -> tuple[float, float, int]:
    """(l1, linf, l0) of a spectrum; l0 counts |coeff| > ZERO_TOL."""
    return s.l1, s.linf, s.l0


def pointwise_product(g: BoolFn, q: Density) -> RealFn:
    if g.n != q.n:
        raise ValueError(f"arity mismatch: {g.n} vs {q.n}")
    return RealFn(g.n, g.values * q.weights)


def tensor(s1: Spectrum, s2: Spectrum) -> Spectrum:
    """Spectrum of the product function on disjoint variable sets.

    Coefficient index is S1 | (S2 << s1.n).
    """
    check_arity(s1.n + s2.n)
    return Spectrum(s1.n + s2.n, np.kron(s2.coeffs, s1.coeffs))


# -- built-in library -------------------------------------------------------

def or_fn(n: int) -> BoolFn:
    """OR_n: classical 0 only at the all-zero point, i.e. +1 at z = 0."""
    check_arity(n)
    bits = np.ones(1 << n, dtype=bool)
    bits[0] = False
    return BoolFn.from_bits(bits)


def and_fn(n: int) -> BoolFn:
    check_arity(n)
    bits = np.zeros(1 << n, dtype=bool)
    bits[-1] = True
    return BoolFn.from_bits(bits)


def parity(n: int, subset: int | None = None) -> BoolFn:
    check_arity(n)
    mask = (1 << n) - 1 if subset is None else subset
    z = np.arange(1 << n, dtype=np.uint64)
    return BoolFn.from_bits(popcount(z & np.uint64(mask)) & 1)


def eq_fn(n: int) -> BoolFn:
    """Equality as a function of z = x xor y: classical 1 iff z = 0."""
    return -or_fn(n)


def ip_fn(n: int) -> BoolFn:
    """Inner product of the two halves of z; bent for even n."""
    if n % 2:
        raise ValueError("ip needs an even arity")
    h = n // 2
    z = np.arange(1 << check_arity(n), dtype=np.uint64)
    lo, hi = z & np.uint64((1 << h) - 1), z >> np.uint64(h)
    return BoolFn.from_bits(popcount(lo & hi) & 1)


def bent2() -> BoolFn:
    """x1 AND x2, the n = 2 bent function."""
    return and_fn(2)


LIBRARY: dict[str, Callable[[int], BoolFn]] = {
    "or": or_fn,
    "and": and_fn,
    "parity": parity,
    "eq": eq_fn,
    "ip": ip_fn,
    "bent2": lambda n=2: bent2() if n == 2 else _bad_bent2(n),
}


def _bad_bent2(n):
    raise ValueError("bent2 is only defined for n = 2")


def library(name: str, n: int) -> BoolFn:
    try:
        make = LIBRARY[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(LIBRARY)}") from None
    return make(n)


def random_boolfn(n: int, rng: np.random.Generator) -> BoolFn:
    return BoolFn.from_bits(rng.integers(0, 2, size=1 << check_arity(n)))


def random_density(n: int, rng: np.random.Generator, sparsity: float = 0.0) -> Density:
    w = rng.exponential(size=1 << check_arity(n))
    if sparsity:
        w[rng.random(w.size) < sparsity] = 0.0
        if not w.any():
            w[rng.integers(w.size)] = 1.0
    return Density(n, w * (w.size / w.sum()))


def is_symmetric(g: BoolFn) -> bool:
    """True when g depends only on the Hamming weight of z."""
    w = popcount(np.arange(1 << g.n, dtype=np.uint64))
    b = g.bits
    return all(np.unique(b[w == k]).size <= 1 for k in range(g.n + 1))


def weights_of(n: int) -> np.ndarray:
    return popcount(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)
