import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from xgl import rng as rngmod
from xgl.boolfn import BoolFn, Density, fwht, inverse_fwht, tensor
from xgl.linprog import LinearProgram, solve
from xgl.nlbox import BoxDistribution, IsotropicBox, no_signaling_check
from xgl.xorgame import bias_xor_form

CASES = settings(max_examples=200, deadline=None)


@st.composite
def boolfns(draw, lo=1, hi=7):
    n = draw(st.integers(lo, hi))
    bits = draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    return BoolFn.from_bits(bits)


@st.composite
def densities(draw, n):
    w = draw(st.lists(st.floats(0.0, 10.0), min_size=1 << n, max_size=1 << n))
    w = np.asarray(w) + 1e-3
    return Density.from_probabilities(w)


@st.composite
def real_vectors(draw):
    n = draw(st.integers(0, 8))
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).normal(size=1 << n)


@CASES
@given(real_vectors())
def test_parseval(v):
    assert np.isclose(np.mean(v**2), np.sum(fwht(v).coeffs ** 2))


@CASES
@given(real_vectors())
def test_roundtrip(v):
    assert np.allclose(inverse_fwht(fwht(v)).values, v)


@CASES
@given(boolfns(hi=4), boolfns(hi=4))
def test_tensor_spectrum(f1, f2):
    prod = BoolFn.from_values(np.kron(f2.values, f1.values))
    assert np.allclose(fwht(prod).coeffs, tensor(fwht(f1), fwht(f2)).coeffs)


@CASES
@given(st.data())
def test_xor_bias_multiplies(data):
    g1, g2 = data.draw(boolfns(hi=3)), data.draw(boolfns(hi=3))
    q1, q2 = data.draw(densities(g1.n)), data.draw(densities(g2.n))
    g = BoolFn.from_values(np.kron(g2.values, g1.values))
    q = Density(g1.n + g2.n, np.kron(q2.weights, q1.weights))
    b = bias_xor_form(g, q)[0]
    assert np.isclose(b, bias_xor_form(g1, q1)[0] * bias_xor_form(g2, q2)[0])


@CASES
@given(st.data())
def test_bias_shift_invariant(data):
    g = data.draw(boolfns(hi=4))
    q = data.draw(densities(g.n))
    a = data.draw(st.integers(0, (1 << g.n) - 1))
    z = np.arange(1 << g.n) ^ a
    shifted = bias_xor_form(BoolFn.from_values(g.values[z]), Density(g.n, q.weights[z]))[0]
    assert np.isclose(shifted, bias_xor_form(g, q)[0])


@CASES
@given(boolfns(hi=5))
def test_bias_at_most_one(g):
    beta, _ = bias_xor_form(g, Density.uniform(g.n))
    assert 0 <= beta <= 1 + 1e-12


@CASES
@given(st.floats(0, 1), st.lists(st.floats(0, 1), min_size=16, max_size=16))
def test_local_mixtures_are_no_signaling(delta, ws):
    # isotropic box mixed with a shared-coin local strategy
    w = ws[0]
    local = BoxDistribution.from_function(lambda a, b, x, y: 0.5 * (a == b ^ x))
    iso = IsotropicBox(delta).distribution()
    assert no_signaling_check(BoxDistribution(w * local.p + (1 - w) * iso.p))


@CASES
@given(st.integers(0, 2**63 - 1), st.lists(st.integers(0, 2**16), max_size=3))
def test_stream_reproducible(seed, path):
    assert np.array_equal(rngmod.stream(seed, *path).random(4), rngmod.stream(seed, *path).random(4))


@CASES
@given(st.integers(0, 10**6), st.integers(1, 5000))
def test_chunks_partition(total, size):
    pieces = list(rngmod.chunks(total, size))
    assert sum(c for _, c in pieces) == total
    assert [i for i, _ in pieces] == list(range(len(pieces)))


@CASES
@given(st.integers(0, 2**32 - 1))
def test_lp_strong_duality(seed):
    gen = np.random.default_rng(seed)
    m, n = gen.integers(1, 8, size=2)
    A = gen.normal(size=(m, n))
    x0 = gen.random(n)
    b = A @ x0 + gen.random(m)          # x0 is strictly feasible
    c = gen.random(n) - 0.2
    lp = LinearProgram(c, [(A[i], "<=", b[i]) for i in range(m)], [(0.0, 5.0)] * n)
    sol = solve(lp)
    assert sol.optimal
    assert abs(sol.value - sol.dual_value) <= 1e-7 * (1 + abs(sol.value))
    assert np.all(A @ sol.x <= b + 1e-7)
