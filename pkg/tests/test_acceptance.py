"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import io
import json
import math
import time

import numpy as np
import pytest
from conftest import record

from xgl import rng as rngmod
from xgl.approxnorm import approx_l1, classify_all, fstar_min_l1
from xgl.boolfn import BoolFn, Density, fwht, inverse_fwht, library, or_fn, random_boolfn, random_density, tensor
from xgl.cli import run
from xgl.compiler import buhrman_baseline, compile, exact_bias, random_tree, simulate
from xgl.nlbox import IsotropicBox, no_signaling_check
from xgl.xorgame import (
    EQ_PRODUCT_LIMIT,
    XorGameInstance,
    bias_bruteforce,
    bias_xor_form,
    eq_worst_product_lambda,
    worst_distribution,
)


def cli_json(*argv):
    out = io.StringIO()
    assert run(list(argv), out, io.StringIO()) == 0
    return json.loads(out.getvalue())


def test_criterion_01_or_norm_identity():
    t0 = time.perf_counter()
    errs = [abs(cli_json("norms", "--fn", "or", "--n", str(n))["l1"] - (3 - 2.0 ** (2 - n))) for n in range(1, 6)]
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-9 and dt < 1
    assert record("1", ok, f"OR_n l1 norm, n=1..5, max error {max(errs):.1e}, {dt:.2f}s")


def test_criterion_02_chsh_and_game():
    t0 = time.perf_counter()
    table = np.array([[1 - 2 * (x & y) for y in range(2)] for x in range(2)])
    beta = bias_bruteforce(XorGameInstance.from_table(table, np.full((2, 2), 0.25)))
    dt = time.perf_counter() - t0
    assert record("2", beta == 0.5 and dt < 1, f"AND game brute-force bias {beta!r}, {dt:.3f}s")


def test_criterion_03_bent_saturation():
    t0 = time.perf_counter()
    beta, _ = bias_xor_form(library("bent2", 2), Density.uniform(2))
    dt = time.perf_counter() - t0
    ok = abs(beta - 0.5) <= 1e-12 and dt < 1
    assert record("3", ok, f"bent n=2 uniform bias {beta!r}, {dt:.3f}s")


def test_criterion_04_oracle_equivalence():
    gen = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        g, q = random_boolfn(3, gen), random_density(3, gen, sparsity=float(gen.uniform(0, 0.5)))
        worst = max(worst, abs(bias_xor_form(g, q)[0] - bias_bruteforce(XorGameInstance.xor_form(g, q))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    assert record("4", ok, f"100 random n=3 games, max |fourier - brute| {worst:.1e}, {dt:.2f}s")


def test_criterion_05_equality_worst_distribution():
    t0 = time.perf_counter()
    betas = [worst_distribution(or_fn(n))[1] for n in range(2, 11)]
    in_range = all(1 / 3 - 1e-12 <= b <= 1 / 3 + 5 / n for n, b in zip(range(2, 11), betas))
    monotone = all(b2 <= b1 + 1e-12 for b1, b2 in zip(betas, betas[1:]))
    lam3, _ = eq_worst_product_lambda(3)
    _, b40 = eq_worst_product_lambda(40)
    dt = time.perf_counter() - t0
    lam_err = abs(lam3 - (3 - math.sqrt(3)) / 2)
    ok = in_range and monotone and lam_err <= 1e-10 and abs(b40 - EQ_PRODUCT_LIMIT) <= 2e-2 and dt < 60
    assert record("5", ok, f"beta(OR_2..10)={[round(b, 4) for b in betas]}, lambda*(3) err {lam_err:.1e}, "
                          f"beta(40)={b40:.5f}, {dt:.1f}s")


def test_criterion_06_compiler_certifies_box_bound():
    gen = np.random.default_rng(6)
    deltas = (0.5, 1 / math.sqrt(2), 0.9)
    t0 = time.perf_counter()
    exact_err, agree, trials = 0.0, 0, 100
    for i in range(trials):
        k, delta = 1 + i % 3, deltas[(i // 3) % 3]
        tree = random_tree(3, k, gen)
        mu = gen.random((8, 8))
        mu /= mu.sum()
        strategy, f = compile(tree), tree.function()
        exact_err = max(exact_err, abs(exact_bias(strategy, f, mu, delta) - delta**k))
        rep = simulate(strategy, f, mu, delta, 10**6, seed=1000 + i)
        agree += not rep.flagged
    base_ok = True
    for k in (1, 2, 3):
        tree = random_tree(3, k, gen)
        rep = buhrman_baseline(tree, tree.function(), np.full((8, 8), 1 / 64), 10**6, seed=k)
        base_ok &= rep.exact_bias == 2.0**-k and abs(rep.empirical_bias - 2.0**-k) <= 4 * rep.stderr
    dt = time.perf_counter() - t0
    ok = exact_err <= 1e-12 and agree >= 99 and base_ok and dt < 300
    assert record("6", ok, f"exact vs delta^k max err {exact_err:.1e}, MC within 4 sigma {agree}/{trials}, "
                          f"baseline {'ok' if base_ok else 'off'}, {dt:.0f}s")


def test_criterion_07_classification_counts():
    t0 = time.perf_counter()
    r3 = classify_all(3, cross_check=True)
    r4 = classify_all(4)
    dt = time.perf_counter() - t0
    ok = (r3.members, r3.total) == (256, 256) and (r4.members, r4.total) == (51200, 65536) and not r4.lower_bound
    assert record("7", ok, f"n=3 {r3.members}/{r3.total} (both routes agree), n=4 {r4.members}/{r4.total}, {dt:.1f}s")


def test_criterion_08_approximate_norm_sandwich():
    gen = np.random.default_rng(8)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(50):
        f = random_boolfn(4, gen)
        s = fwht(f)
        star = fstar_min_l1(f)
        bad += not (s.l1 - 1e-6 <= star <= math.sqrt(s.l0) + 1e-6)
        for eps in (0.1, 0.25):
            v = approx_l1(f, eps).value
            bad += not ((1 - eps) * s.l1 - eps * star - 1e-6 <= v <= (1 - eps) * s.l1 + 1e-6)
    dt = time.perf_counter() - t0
    assert record("8", bad == 0 and dt < 300, f"50 random n=4 functions, {bad} sandwich violations, {dt:.1f}s")


def test_criterion_09_constants():
    t0 = time.perf_counter()
    consts = cli_json("bound", "exm")
    ic2 = cli_json("bound", "ic", "--extra", "2")
    ic1 = cli_json("bound", "ic", "--extra", "1")
    dt = time.perf_counter() - t0
    general_ok = abs(consts["general"] - 3.169925) <= 1e-5
    product_ok = abs(consts["product"] - 2.215066) <= 1e-5
    ic_ok = (abs(ic2["lambda_star"] - 0.2) <= 1e-9 and abs(ic2["value"] - math.log2(5)) <= 1e-9
             and abs(ic1["lambda_star"] - 1 / 3) <= 1e-9 and abs(ic1["value"] - math.log2(3)) <= 1e-9)
    ok = general_ok and product_ok and ic_ok and dt < 1
    detail = (f"general {consts['general']:.6f}, product {consts['product']:.6f} (target 2.215066, "
              f"off by {abs(consts['product'] - 2.215066):.1e}; 2 log2(1+2/sqrt3) = 2.214975), ic ok={ic_ok}, {dt:.3f}s")
    record("9", ok, detail)
    assert general_ok and ic_ok and dt < 1


@pytest.mark.xfail(strict=True, reason="2 log2(1 + 2/sqrt 3) = 2.214975, not 2.215066")
def test_criterion_09_product_constant_target():
    assert abs(cli_json("bound", "exm")["product"] - 2.215066) <= 1e-5


def test_criterion_10_property_suites():
    gen = np.random.default_rng(10)
    t0 = time.perf_counter()
    fails = {"parseval": 0, "roundtrip": 0, "tensor": 0, "no-signaling": 0, "seed": 0}
    tree = random_tree(2, 2, gen)
    strategy, f, mu = compile(tree), tree.function(), np.full((4, 4), 1 / 16)
    for i in range(1000):
        v = gen.normal(size=1 << int(gen.integers(0, 9)))
        s = fwht(v)
        fails["parseval"] += not np.isclose(np.mean(v**2), np.sum(s.coeffs**2))
        fails["roundtrip"] += not np.allclose(inverse_fwht(s).values, v)
        n1, n2 = gen.integers(1, 4, size=2)
        g1, g2 = random_boolfn(int(n1), gen), random_boolfn(int(n2), gen)
        q1, q2 = random_density(int(n1), gen), random_density(int(n2), gen)
        g = BoolFn.from_values(np.kron(g2.values, g1.values))
        q = Density(int(n1 + n2), np.kron(q2.weights, q1.weights))
        fails["tensor"] += not (
            np.allclose(fwht(g).coeffs, tensor(fwht(g1), fwht(g2)).coeffs)
            and np.isclose(bias_xor_form(g, q)[0], bias_xor_form(g1, q1)[0] * bias_xor_form(g2, q2)[0])
        )
        fails["no-signaling"] += not no_signaling_check(IsotropicBox(float(gen.random())).distribution())
        seed = int(gen.integers(2**62))
        same = np.array_equal(rngmod.stream(seed, i).random(3), rngmod.stream(seed, i).random(3))
        if i % 10 == 0:
            a = simulate(strategy, f, mu, 0.8, 2000, seed=seed)
            same &= a == simulate(strategy, f, mu, 0.8, 2000, seed=seed, threads=2)
        fails["seed"] += not same
    dt = time.perf_counter() - t0
    ok = not any(fails.values()) and dt < 120
    assert record("10", ok, f"1000 cases each, failures {fails}, {dt:.1f}s")
