"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line that pytest prints in its terminal
summary under "acceptance criteria".
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate as si
from scipy.special import comb

from conftest import ACCEPTANCE_LINES
from oracles import exact_racah_cg, wigner_small_d
from polyosc.bases import (
    CartesianState,
    HypersphericalState,
    ModelParams,
    angular_inner_product,
    cartesian_inner_product,
    energy,
    enumerate_cartesian,
    enumerate_hyperspherical,
    node_momenta,
    radial_function,
    radial_residual,
)
from polyosc.transition import (
    admissible,
    basis_values_at,
    calibrate_signs,
    cell_cg_args,
    cell_phase,
    collect_cell_data,
    k_telescoping_check,
    oracle_matrix,
    orthogonality_defect,
    transition_matrix,
)
from polyosc.tree import all_tree_shapes, format_coordinate_map, parse_tree, random_tree

FIG1 = "((x1 (x2 x3)) ((x4 x5) x6))"
K_DRAWS = 5
SEED = 20240611


def record(number, title, ok, detail):
    line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_params(rng, D):
    k = rng.uniform(0.2, 2.5, size=D)
    signs = [int(rng.choice([-1, 1])) if x <= 0.5 else 1 for x in k]
    return ModelParams(k=tuple(float(x) for x in k), signs=tuple(signs), omega=float(rng.uniform(0.5, 2.0)))


def sweep_cases():
    """(tree, params, N) for every shape at D = 2, 3, 4 plus the six-leaf
    example tree, five strength draws each."""
    rng = np.random.default_rng(SEED)
    trees = [(t, 3) for D in (2, 3, 4) for t in all_tree_shapes(D)] + [(parse_tree(FIG1), 2)]
    cases = []
    for tree, N_max in trees:
        for _ in range(K_DRAWS):
            params = random_params(rng, tree.D)
            cases.extend((tree, params, N) for N in range(N_max + 1))
    return cases


@pytest.fixture(scope="module")
def sweep():
    start = time.perf_counter()
    out = []
    for tree, params, N in sweep_cases():
        W = transition_matrix(tree, params, N)
        O = oracle_matrix(tree, params, N)
        out.append((tree, params, N, W, O))
    return out, time.perf_counter() - start


def test_criterion_1_oracle_equivalence(sweep):
    results, elapsed = sweep
    worst = 0.0
    flipped = 0
    for tree, params, N, W, O in results:
        signs = calibrate_signs(W, O, atol=1e-8)
        flipped += int(np.sum(signs < 0))
        worst = max(worst, float(np.abs(W.values - O.values * signs).max()))
    ok = worst <= 1e-8 and elapsed <= 60.0
    record(
        1, "oracle equivalence", ok,
        f"max|W - W_oracle| = {worst:.2e} (tol 1e-08) over {len(results)} matrices, "
        f"{flipped} column sign flips, {elapsed:.1f} s (limit 60 s)",
    )


def test_criterion_2_orthogonality(sweep):
    results, _ = sweep
    worst = max(orthogonality_defect(W) for *_, W, _ in results)
    record(2, "orthogonality", worst <= 1e-9, f"max|W W^T - I| = {worst:.2e} (tol 1e-09) over {len(results)} matrices")


def test_criterion_3_telescoping():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    pairs = 0
    while pairs < 200:
        D = int(rng.integers(2, 7))
        tree = random_tree(D, rng)
        params = random_params(rng, D)
        N = int(rng.integers(0, 6))
        carts = enumerate_cartesian(D, N)
        hypers = enumerate_hyperspherical(tree, N)
        c = carts[int(rng.integers(0, len(carts)))]
        h = hypers[int(rng.integers(0, len(hypers)))]
        if not admissible(tree, params, c, h):
            continue
        lhs, rhs = k_telescoping_check(tree, params, c, h)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
        pairs += 1
    record(3, "telescoping identity", worst <= 1e-11, f"max relative deviation = {worst:.2e} (tol 1e-11) over {pairs} pairs")


def test_criterion_4_pointwise(sweep):
    results, _ = sweep
    rng = np.random.default_rng(SEED + 4)
    worst_fwd = worst_inv = 0.0
    for tree, params, N, W, _ in results:
        for _ in range(20):
            r = float(rng.uniform(0.2, 2.5) / math.sqrt(params.omega))
            theta = [float(t) for t in rng.uniform(0.02, math.pi / 2 - 0.02, size=tree.D - 1)]
            cart, hyper = basis_values_at(W, (r, theta))
            scale_c = np.abs(cart).max()
            scale_h = np.abs(hyper).max()
            worst_fwd = max(worst_fwd, float(np.abs(cart - W.values @ hyper).max() / scale_c))
            worst_inv = max(worst_inv, float(np.abs(hyper - W.values.T @ cart).max() / scale_h))
    ok = max(worst_fwd, worst_inv) <= 1e-8
    record(
        4, "pointwise expansion", ok,
        f"forward {worst_fwd:.2e}, inverse {worst_inv:.2e} (tol 1e-08), 20 points x {len(results)} cases",
    )


def test_criterion_5_half_integer_reduction():
    worst_cells = 0.0
    worst_wigner = 0.0
    entries = 0
    for D in (2, 3):
        params = ModelParams(k=(0.5,) * D)
        for tree in all_tree_shapes(D):
            for N in range(4):
                W = transition_matrix(tree, params, N)
                for i, c in enumerate(W.rows):
                    for j, h in enumerate(W.cols):
                        value = 1.0
                        for cell in collect_cell_data(tree, params, c, h):
                            args = cell_cg_args(cell)
                            for x in (args.a + args.alpha, args.b + args.beta, args.c + args.gamma, args.a + args.b + args.c):
                                # every factorial argument is an integer or half-integer
                                assert Fraction(x).limit_denominator(8).denominator in (1, 2)
                            value *= (-1) ** cell_phase(cell) * exact_racah_cg(*args.as_tuple())
                        worst_cells = max(worst_cells, abs(value - W.values[i, j]))
                        entries += 1
                        if D == 2:
                            d = wigner_small_d(N + 1, c.n[0] - c.n[1], h.q[0] + 1, math.pi / 2)
                            ref = (-1) ** c.n[0] * math.sqrt(2) * d
                            worst_wigner = max(worst_wigner, abs(ref - W.values[i, j]))
    ok = max(worst_cells, worst_wigner) <= 1e-12
    record(
        5, "k = 1/2 reduction", ok,
        f"exact factorial CG products {worst_cells:.2e}, D=2 Wigner d {worst_wigner:.2e} (tol 1e-12), {entries} entries",
    )


def test_criterion_6_basis_integrity():
    rng = np.random.default_rng(SEED + 6)
    worst_radial = worst_angular = worst_cart = worst_fd = 0.0
    for _ in range(8):
        D = int(rng.integers(2, 7))
        params = random_params(rng, D)
        tree = random_tree(D, rng)
        N = int(rng.integers(0, 4))
        for h in enumerate_hyperspherical(tree, N)[:5]:
            l = node_momenta(tree, params, h).root
            norm = si.quad(
                lambda r: radial_function(params, l, h.n_r, r) ** 2 * r ** (D - 1),
                0, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200,
            )[0]
            worst_radial = max(worst_radial, abs(norm - 1.0))
            worst_angular = max(worst_angular, abs(angular_inner_product(tree, params, h, h) - 1.0))
            for r in (0.4, 1.0, 1.9):
                worst_fd = max(worst_fd, radial_residual(params, l, h.n_r, r / math.sqrt(params.omega), energy(params, N)))
    for D in (2, 3):
        params = random_params(rng, D)
        states = [s for N in range(3) for s in enumerate_cartesian(D, N)]
        for a in states:
            for b in states:
                expected = 2.0**-D if a == b else 0.0
                worst_cart = max(worst_cart, abs(cartesian_inner_product(params, a, b) - expected))
    ok = max(worst_radial, worst_angular, worst_cart) <= 1e-9 and worst_fd <= 1e-5
    record(
        6, "basis integrity", ok,
        f"radial {worst_radial:.1e}, angular {worst_angular:.1e}, Cartesian 2^-D {worst_cart:.1e} (tol 1e-09); "
        f"FD residual {worst_fd:.1e} (tol 1e-05)",
    )


def test_criterion_7_fig1_golden():
    expected = [
        r"{\tilde x_1} = \cos\theta_1\cos\theta_2",
        r"{\tilde x_2} = \cos\theta_1\sin\theta_2\cos\theta_3",
        r"{\tilde x_3} = \cos\theta_1\sin\theta_2\sin\theta_3",
        r"{\tilde x_4} = \sin\theta_1\cos\theta_4\cos\theta_5",
        r"{\tilde x_5} = \sin\theta_1\cos\theta_4\sin\theta_5",
        r"{\tilde x_6} = \sin\theta_1\sin\theta_4",
    ]
    got = format_coordinate_map(parse_tree(FIG1), style="latex")
    mismatches = sum(a != b for a, b in zip(got, expected)) + abs(len(got) - len(expected))
    record(7, "six-leaf coordinate map", mismatches == 0, f"{len(expected) - mismatches}/6 lines string-equal (pre-order angles)")


def test_criterion_8_state_counts():
    bad = []
    checked = 0
    for D in range(2, 7):
        for tree in all_tree_shapes(D):
            for N in range(6):
                expected = comb(N + D - 1, D - 1, exact=True)
                nc = len(enumerate_cartesian(D, N))
                nh = len(enumerate_hyperspherical(tree, N))
                checked += 1
                if not nc == nh == expected:
                    bad.append((D, N, nc, nh, expected))
    record(8, "state counts", not bad, f"{checked} (tree, N) cases, {len(bad)} mismatches")
