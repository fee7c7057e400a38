import math

import numpy as np
import pytest

from xgl.bounds import (
    BoundReport,
    discrepancy_bound,
    ic_bound_maximize,
    ls_xor_bound,
    nlbox_bound,
    equality_constants,
)
from xgl.boolfn import library, or_fn, parity
from xgl.compiler import compile, exact_bias, random_tree


def test_discrepancy_examples():
    assert discrepancy_bound(1, 0.5) == 1
    assert discrepancy_bound(0.5, 0.5) == 0
    assert discrepancy_bound(1, 2.0**-3) == 3
    assert discrepancy_bound(1, 0) == math.inf


def test_discrepancy_domain():
    with pytest.raises(ValueError):
        discrepancy_bound(0, 0.5)


def test_nlbox_tsirelson_doubles():
    for rho, beta in [(1, 0.25), (0.8, 0.1)]:
        v = nlbox_bound(rho, 1 / math.sqrt(2), beta)
        assert abs(v - 2 * math.log2(rho / beta)) < 1e-12


def test_nlbox_classical_reduces():
    for rho, beta in [(1, 0.25), (0.7, 0.3)]:
        assert nlbox_bound(rho, 0.5, beta) == discrepancy_bound(rho, beta)


def test_nlbox_monotone_in_delta():
    vals = [nlbox_bound(1, d, 0.2) for d in np.linspace(0.5, 0.99, 30)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("delta", [1.0, 0.49, -1])
def test_nlbox_domain(delta):
    with pytest.raises(ValueError):
        nlbox_bound(1, delta, 0.5)


def test_nlbox_equality_constant():
    assert abs(nlbox_bound(1, 1 / math.sqrt(2), 1 / 3) - 2 * math.log2(3)) < 1e-12


def test_equality_constants():
    general, product = equality_constants()
    assert abs(general - 3.169925) < 1e-6
    assert abs(product - 2 * math.log2(1 + 2 / math.sqrt(3))) < 1e-12
    assert abs(product - 2.2150) < 5e-5  # four-digit rounding


def test_equality_limit_identity():
    assert abs(1 / (2 * math.sqrt(3) - 3) - (1 + 2 / math.sqrt(3))) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("eps", [0.05, 0.2, 0.4])
def test_ls_or(n, eps):
    expected = 2 * math.log2((1 - 2 * eps) * (3 - 2.0 ** (2 - n)))
    assert abs(ls_xor_bound(or_fn(n), eps) - expected) < 1e-7


def test_ls_zero_error():
    assert ls_xor_bound(parity(3), 0) == 0
    assert ls_xor_bound(or_fn(2), 0) == 2
    assert abs(ls_xor_bound(library("ip", 4), 0) - 4) < 1e-12


def test_ls_domain():
    with pytest.raises(ValueError):
        ls_xor_bound(or_fn(2), 0.5)


@pytest.mark.parametrize("extra, lam, value", [
    (2, 1 / 5, math.log2(5)),
    (1, 1 / 3, math.log2(3)),
    (0, 1 / 2, 1.0),
])
def test_ic(extra, lam, value):
    got_lam, got = ic_bound_maximize(extra)
    assert abs(got_lam - lam) < 1e-12 and abs(got - value) < 1e-12


def test_ic_two_directions():
    assert abs(2 * ic_bound_maximize(2)[1] - 4.64) < 5e-3


def test_ic_numeric_check_runs_on_odd_inputs():
    for extra in (0.3, 1.7, 5.0):
        ic_bound_maximize(extra)


def test_end_to_end_tightness(rng):
    for k in (1, 2, 3):
        tree = random_tree(2, k, rng)
        mu = np.full((4, 4), 1 / 16)
        for delta in (0.6, 1 / math.sqrt(2), 0.9):
            beta = exact_bias(compile(tree), tree.function(), mu, delta)
            assert abs(nlbox_bound(1, delta, beta) - k) < 1e-9


def test_report_dict():
    assert BoundReport("x", {"rho": 1}, 2.0).as_dict() == {"name": "x", "inputs": {"rho": 1}, "value": 2.0}
