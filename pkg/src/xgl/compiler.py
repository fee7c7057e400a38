"""Compile deterministic protocol trees into nonlocal-box XOR-game strategies.

Each internal node becomes one 1-bit selector gadget backed by a fresh
isotropic box: the sender feeds its message bit (the address), the other
party feeds the XOR of its two sub-strategy shares, and the sender folds
the selected share into its output.  A leaf c is played as (c, 0).

Pair functions and distributions follow the xorgame conventions: f is a
BoolFn of arity 2n indexed x | (y << n), mu is a (2^n, 2^n) array [x, y].
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from . import nlbox
from . import rng as rngmod
from .boolfn import BoolFn, library
from .errors import CapacityError, GuaranteeViolation

MAX_COMPILE_DEPTH = 20
MAX_BASELINE_DEPTH = 30
CHUNK = 1 << 16
ALICE, BOB = "A", "B"


@dataclass(frozen=True)
class Leaf:
    output: int

    def __post_init__(self):
        if self.output not in (0, 1):
            raise ValueError("leaf output must be a bit")


@dataclass(frozen=True)
class Node:
    sender: str
    predicate: BoolFn
    zero: "TreeNode"
    one: "TreeNode"

    def __post_init__(self):
        if self.sender not in (ALICE, BOB):
            raise ValueError("sender must be 'A' or 'B'")


TreeNode = Union[Leaf, Node]


def _depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_depth(node.zero), _depth(node.one))


def _count_internal(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + _count_internal(node.zero) + _count_internal(node.one)


@dataclass(frozen=True)
class ProtocolTree:
    n: int
    root: TreeNode

    def __post_init__(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Node):
                if node.predicate.n != self.n:
                    raise ValueError("predicate arity must equal the per-side arity n")
                stack += [node.zero, node.one]
            elif not isinstance(node, Leaf):
                raise TypeError(f"unexpected tree node {node!r}")

    @property
    def depth(self) -> int:
        return _depth(self.root)

    @property
    def internal_nodes(self) -> int:
        return _count_internal(self.root)

    def run(self):
        """Output bit and leaf depth for every input pair, as [x, y] arrays."""
        N = 1 << self.n
        x = np.repeat(np.arange(N), N)
        y = np.tile(np.arange(N), N)
        out = np.zeros(N * N, dtype=np.uint8)
        dep = np.zeros(N * N, dtype=np.int64)

        def walk(node, idx, d):
            if isinstance(node, Leaf):
                out[idx] = node.output
                dep[idx] = d
                return
            z = x[idx] if node.sender == ALICE else y[idx]
            bit = node.predicate.bits[z].astype(bool)
            walk(node.zero, idx[~bit], d + 1)
            walk(node.one, idx[bit], d + 1)

        walk(self.root, np.arange(N * N), 0)
        return out.reshape(N, N), dep.reshape(N, N)

    def function(self) -> BoolFn:
        """The pair function this tree computes."""
        out, _ = self.run()
        return BoolFn.from_bits(out.T.ravel())

    def padded(self, depth: int | None = None) -> "ProtocolTree":
        """Extend every root-leaf path to ``depth`` with message-free nodes.

        A padding node has a constant-zero predicate and the same leaf on
        both sides, so the computed function is unchanged.
        """
        k = self.depth if depth is None else depth
        if k < self.depth:
            raise ValueError("cannot pad below the tree depth")
        zero = BoolFn.from_bits(np.zeros(1 << self.n, dtype=bool))

        def pad(node, d):
            if isinstance(node, Leaf):
                for _ in range(k - d):
                    node = Node(ALICE, zero, node, node)
                return node
            return Node(node.sender, node.predicate, pad(node.zero, d + 1), pad(node.one, d + 1))

        return ProtocolTree(self.n, pad(self.root, 0))

    # -- file format ----------------------------------------------------------
    def to_dict(self) -> dict:
        def enc(node):
            if isinstance(node, Leaf):
                return {"leaf": node.output}
            return {
                "sender": node.sender,
                "predicate": hex(node.predicate.to_int()),
                "zero": enc(node.zero),
                "one": enc(node.one),
            }

        return {"n": self.n, "tree": enc(self.root)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> "ProtocolTree":
        n = int(data["n"])

        def pred(ref):
            if isinstance(ref, dict):
                path = Path(ref["file"])
                if base is not None and not path.is_absolute():
                    path = base / path
                f = BoolFn.from_text(path.read_text())
            elif ref.lower().startswith("0x"):
                f = BoolFn.from_int(n, int(ref, 16))
            elif set(ref) <= {"0", "1"} and len(ref) == 1 << n:
                f = BoolFn.from_bits([c == "1" for c in ref])
            else:
                f = library(ref, n)
            if f.n != n:
                raise ValueError("predicate arity does not match the header")
            return f

        def dec(rec):
            if "leaf" in rec:
                return Leaf(int(rec["leaf"]))
            return Node(rec["sender"], pred(rec["predicate"]), dec(rec["zero"]), dec(rec["one"]))

        return cls(n, dec(data["tree"]))

    @classmethod
    def from_json(cls, text: str, base: Path | None = None) -> "ProtocolTree":
        return cls.from_dict(json.loads(text), base)


def random_tree(n: int, depth: int, rng: np.random.Generator, full: bool = True) -> ProtocolTree:
    """Random tree with random senders, predicates, and leaf outputs.

    With ``full=False`` each internal position stops early w.p. 1/3.
    """
    def build(d):
        if d == depth or (not full and d > 0 and rng.random() < 1 / 3):
            return Leaf(int(rng.integers(2)))
        sender = ALICE if rng.integers(2) == 0 else BOB
        pred = BoolFn.from_bits(rng.integers(0, 2, size=1 << n))
        return Node(sender, pred, build(d + 1), build(d + 1))

    return ProtocolTree(n, build(0))


# -- compiled strategies ------------------------------------------------------

@dataclass(frozen=True)
class CompiledLeaf:
    output: int


@dataclass(frozen=True)
class CompiledNode:
    """One selector gadget: ``holder`` owns the address bit ``predicate``."""

    holder: str
    predicate: BoolFn
    slot: int
    zero: "CompiledPart"
    one: "CompiledPart"


CompiledPart = Union[CompiledLeaf, CompiledNode]


@dataclass(frozen=True)
class CompiledStrategy:
    n: int
    root: CompiledPart
    num_boxes: int
    tree: ProtocolTree


def compile(tree: ProtocolTree) -> CompiledStrategy:
    if tree.depth > MAX_COMPILE_DEPTH:
        raise CapacityError(f"depth {tree.depth} exceeds {MAX_COMPILE_DEPTH}")
    counter = [0]

    def build(node):
        if isinstance(node, Leaf):
            return CompiledLeaf(node.output)
        zero, one = build(node.zero), build(node.one)
        slot = counter[0]
        counter[0] += 1
        return CompiledNode(node.sender, node.predicate, slot, zero, one)

    root = build(tree.root)
    return CompiledStrategy(tree.n, root, counter[0], tree)


def isotropic_boxes(alice_coins: np.ndarray, errors: np.ndarray):
    """Box oracle from per-slot randomness.

    Alice's outcome is her coin; Bob's is coin ^ (in_A & in_B) ^ error.
    """
    def use(slot, alice_in, bob_in):
        a = alice_coins[slot]
        return a, a ^ (alice_in & bob_in) ^ errors[slot]

    return use


def sampled_boxes(delta: float, gen: np.random.Generator):
    """Box oracle drawing a fresh isotropic box per use from ``gen``."""
    box = nlbox.IsotropicBox(delta)

    def use(slot, alice_in, bob_in):
        return nlbox.sample(box, alice_in, bob_in, gen)

    return use


def play(strategy: CompiledStrategy, x, y, boxes):
    """Outputs (a, b) for input arrays x, y; ``boxes(slot, in_A, in_B)``
    returns the two box outcomes."""
    x = np.asarray(x)
    y = np.asarray(y)

    def go(part):
        if isinstance(part, CompiledLeaf):
            return (np.full(x.shape, part.output, np.uint8), np.zeros(y.shape, np.uint8))
        a0, b0 = go(part.zero)
        a1, b1 = go(part.one)
        if part.holder == ALICE:
            addr = part.predicate.bits[x]
            box_a, box_b = boxes(part.slot, addr, b0 ^ b1)
            return np.where(addr, a1, a0) ^ box_a, b0 ^ box_b
        addr = part.predicate.bits[y]
        box_a, box_b = boxes(part.slot, a0 ^ a1, addr)
        return a0 ^ box_a, np.where(addr, b1, b0) ^ box_b

    return go(strategy.root)


def _table(f: BoolFn, N: int) -> np.ndarray:
    return f.values.reshape(N, N).T.astype(float)


def _signs(f: BoolFn, out: np.ndarray) -> np.ndarray:
    return _table(f, out.shape[0]) * (1.0 - 2.0 * out)


def _check_inputs(n, f: BoolFn, mu):
    N = 1 << n
    if f.n != 2 * n:
        raise ValueError("f must be a pair function of arity 2n")
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (N, N) or np.any(mu < 0) or abs(mu.sum() - 1) > 1e-9:
        raise ValueError("mu must be a (2^n, 2^n) probability array")
    return mu


def exact_bias(strategy: CompiledStrategy, f: BoolFn, mu, delta: float) -> float:
    """sum mu(x,y) s(x,y) delta^d(x,y).

    s compares the leaf output with f and d is the leaf depth; the box
    errors met along the path are independent bias-delta coins.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    mu = _check_inputs(strategy.n, f, mu)
    out, dep = strategy.tree.run()
    return float(np.sum(mu * _signs(f, out) * float(delta) ** dep))


@dataclass(frozen=True)
class XorGameReport:
    exact_bias: float
    empirical_bias: float
    samples: int
    stderr: float

    @property
    def flagged(self) -> bool:
        return abs(self.empirical_bias - self.exact_bias) > 4 * self.stderr

    def as_dict(self):
        return {
            "exact_bias": self.exact_bias,
            "empirical_bias": self.empirical_bias,
            "samples": self.samples,
            "stderr": self.stderr,
            "flagged": self.flagged,
        }


def _draw_inputs(gen, mu, count):
    N = mu.shape[0]
    flat = gen.choice(N * N, size=count, p=mu.ravel())
    return flat // N, flat % N


def _run_chunks(work, samples, threads):
    pieces = list(rngmod.chunks(samples, CHUNK))
    if threads and threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(threads) as pool:
            sums = list(pool.map(lambda p: work(*p), pieces))
    else:
        sums = [work(*p) for p in pieces]
    return math.fsum(sums)


def simulate(strategy: CompiledStrategy, f: BoolFn, mu, delta: float, samples: int,
             seed: int = 0, threads: int | None = None) -> XorGameReport:
    """Monte Carlo play of the compiled strategy with isotropic boxes."""
    if samples < 1:
        raise ValueError("samples must be positive")
    mu = _check_inputs(strategy.n, f, mu)
    exact = exact_bias(strategy, f, mu, delta)
    fv = f.values
    n = strategy.n

    def work(index, count):
        gen = rngmod.stream(seed, 0, index)
        x, y = _draw_inputs(gen, mu, count)
        a, b = play(strategy, x, y, sampled_boxes(delta, rngmod.stream(seed, 2, index)))
        return float(np.sum(fv[x | (y << n)] * (1 - 2 * (a ^ b).astype(np.int64))))

    total = _run_chunks(work, samples, threads)
    stderr = math.sqrt(max(0.0, 1 - exact**2) / samples)
    return XorGameReport(exact, total / samples, samples, stderr)


def _flatten(tree: ProtocolTree):
    nodes = []

    def visit(node):
        i = len(nodes)
        nodes.append(node)
        if isinstance(node, Node):
            visit(node.zero)
            visit(node.one)
        return i

    visit(tree.root)
    index = {id(node): i for i, node in enumerate(nodes)}
    K, N = len(nodes), 1 << tree.n
    is_leaf = np.array([isinstance(v, Leaf) for v in nodes])
    from_bob = np.array([isinstance(v, Node) and v.sender == BOB for v in nodes])
    pred = np.zeros((K, N), dtype=np.uint8)
    child = np.zeros((K, 2), dtype=np.int64)
    out = np.zeros(K, dtype=np.uint8)
    for i, v in enumerate(nodes):
        if isinstance(v, Leaf):
            out[i] = v.output
            child[i] = i
        else:
            pred[i] = v.predicate.bits
            child[i] = index[id(v.zero)], index[id(v.one)]
    return is_leaf, from_bob, pred, child, out


def buhrman_baseline(tree: ProtocolTree, f: BoolFn, mu, samples: int,
                     seed: int = 0, threads: int | None = None) -> XorGameReport:
    """Guess the transcript with shared coins; inconsistent parties answer at random."""
    depth = tree.depth
    if depth > MAX_BASELINE_DEPTH:
        raise CapacityError(f"depth {depth} exceeds {MAX_BASELINE_DEPTH}")
    if samples < 1:
        raise ValueError("samples must be positive")
    mu = _check_inputs(tree.n, f, mu)
    out_xy, dep = tree.run()
    exact = float(np.sum(mu * _signs(f, out_xy) * 0.5 ** dep))
    is_leaf, from_bob, pred, child, leaf_out = _flatten(tree)
    fv = f.values
    n = tree.n

    def work(index, count):
        gen = rngmod.stream(seed, 1, index)
        x, y = _draw_inputs(gen, mu, count)
        guess = gen.integers(0, 2, size=(depth, count), dtype=np.uint8)
        coin_a = gen.integers(0, 2, size=count, dtype=np.uint8)
        coin_b = gen.integers(0, 2, size=count, dtype=np.uint8)
        node = np.zeros(count, dtype=np.int64)
        alice_ok = np.ones(count, dtype=bool)
        bob_ok = np.ones(count, dtype=bool)
        for level in range(depth):
            live = ~is_leaf[node]
            if not live.any():
                break
            bob = from_bob[node]
            sent = np.where(bob, pred[node, y], pred[node, x])
            wrong = live & (sent != guess[level])
            alice_ok &= ~(wrong & ~bob)
            bob_ok &= ~(wrong & bob)
            node = child[node, guess[level]]
        a = np.where(alice_ok, leaf_out[node], coin_a)
        b = np.where(bob_ok, 0, coin_b)
        return float(np.sum(fv[x | (y << n)] * (1 - 2 * (a ^ b).astype(np.int64))))

    total = _run_chunks(work, samples, threads)
    stderr = math.sqrt(max(0.0, 1 - exact**2) / samples)
    return XorGameReport(exact, total / samples, samples, stderr)


def approximate_protocol_bias(protocol, f: BoolFn, h: BoolFn, mu, delta: float,
                              epsilon: float) -> float:
    """Bias against h of the compiled protocol for f, padded to full depth.

    ``protocol`` is a tree or a list of (weight, tree) pairs (public-coin
    randomized protocol).  Every path is padded to the largest depth R,
    so the chain error is exactly a bias-delta^R coin on every input.
    The result is checked against delta^R ((1 - eps) E[f h] - eps).
    """
    mixture = [(1.0, protocol)] if isinstance(protocol, ProtocolTree) else list(protocol)
    weights = np.array([w for w, _ in mixture], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
        raise ValueError("mixture weights must form a distribution")
    n = mixture[0][1].n
    mu = _check_inputs(n, f, mu)
    _check_inputs(n, h, mu)
    R = max(t.depth for _, t in mixture)
    N = 1 << n
    err = np.zeros((N, N))
    value = 0.0
    for w, tree in mixture:
        out, _ = tree.run()
        err += w * (_signs(f, out) < 0)
        value += w * exact_bias(compile(tree.padded(R)), h, mu, delta)
    worst = float(err[mu > 0].max(initial=0.0))
    if worst > epsilon + 1e-12:
        raise ValueError(f"protocol errs with probability {worst} > epsilon on some input")
    fh = float(np.sum(mu * _table(f, N) * _table(h, N)))
    bound = float(delta) ** R * ((1 - epsilon) * fh - epsilon)
    if value < bound - 1e-12:
        raise GuaranteeViolation(f"bias {value} below guaranteed {bound}")
    return value
