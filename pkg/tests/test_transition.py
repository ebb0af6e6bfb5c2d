import math

import numpy as np
import pytest

from oracles import wigner_small_d
from polyosc.bases import CartesianState, HypersphericalState, ModelParams, node_momenta
from polyosc.transition import (
    CellData,
    SignCalibrationError,
    StateMismatchError,
    admissible,
    calibrate_signs,
    cell_cg_args,
    cell_coefficient,
    cell_phase,
    collect_cell_data,
    expand_pointwise,
    expand_pointwise_inverse,
    k_telescoping_check,
    oracle_matrix,
    oracle_transition,
    orthogonality_defect,
    transition_coefficient,
    transition_matrix,
)
from polyosc.tree import all_tree_shapes, parse_tree, random_tree

FIG1 = "((x1 (x2 x3)) ((x4 x5) x6))"
TWO = parse_tree("(x1 x2)")


def random_params(rng, D):
    k = rng.uniform(0.2, 2.5, size=D)
    signs = [int(rng.choice([-1, 1])) if x <= 0.5 else 1 for x in k]
    return ModelParams(k=tuple(k), signs=tuple(signs), omega=float(rng.uniform(0.5, 2.0)))


# --- cells ---------------------------------------------------------------


def test_collect_single_cell():
    p = ModelParams(k=(0.3, 0.4))
    (cell,) = collect_cell_data(TWO, p, CartesianState((1, 0)), HypersphericalState(0, (1,)))
    assert (cell.N_s, cell.N_r) == pytest.approx((2.8, 0.9))
    assert (cell.l_s, cell.l_r, cell.l) == pytest.approx((0.8, 0.9, 3.7))
    assert (cell.v_s, cell.v_r, cell.q) == (0, 0, 1)


def test_root_identity():
    rng = np.random.default_rng(5)
    for _ in range(20):
        D = int(rng.integers(2, 7))
        t = random_tree(D, rng)
        p = random_params(rng, D)
        N = int(rng.integers(0, 4))
        from polyosc.bases import enumerate_cartesian, enumerate_hyperspherical

        c = enumerate_cartesian(D, N)[int(rng.integers(0, math.comb(N + D - 1, D - 1)))]
        h = enumerate_hyperspherical(t, N)[-1]
        root = [cell for cell in collect_cell_data(t, p, c, h) if cell.angle == 1][0]
        assert root.N_s + root.N_r == pytest.approx(2 * h.n_r + node_momenta(t, p, h).root, abs=1e-12)


def test_fig1_ground_cells():
    t = parse_tree(FIG1)
    p = ModelParams(k=(0.3, 0.9, 1.4, 0.25, 2.0, 0.7))
    cells = collect_cell_data(t, p, CartesianState((0,) * 6), HypersphericalState(0, (0,) * 5))
    assert len(cells) == 5
    for cell in cells:
        assert cell.q == 0
        assert cell.N_s == pytest.approx(cell.l_s) and cell.N_r == pytest.approx(cell.l_r)
        assert cell_phase(cell) == 0


def test_state_mismatch():
    p = ModelParams(k=(0.3, 0.4))
    with pytest.raises(StateMismatchError):
        collect_cell_data(TWO, p, CartesianState((1, 0)), HypersphericalState(0, (0,)))
    with pytest.raises(StateMismatchError):
        transition_coefficient(TWO, p, CartesianState((1, 1)), HypersphericalState(0, (1,)))


def test_cell_data_invariants():
    with pytest.raises(ValueError):
        CellData(1, 0.8, 0.9, 0, 0, 2.8, 0.9, 3.0, 1)
    with pytest.raises(ValueError):
        CellData(1, 0.8, 0.9, 0, 0, 1.8, 0.9, 3.7, 1)


def test_cell_args_identities():
    rng = np.random.default_rng(9)
    for _ in range(50):
        D = int(rng.integers(2, 6))
        t = random_tree(D, rng)
        p = random_params(rng, D)
        n = tuple(int(x) for x in rng.integers(0, 3, size=D))
        N = sum(n)
        q = [0] * (D - 1)
        for _ in range(int(rng.integers(0, N + 1))):
            q[int(rng.integers(0, D - 1))] += 1
        h = HypersphericalState(N - sum(q), tuple(q))
        for cell in collect_cell_data(t, p, CartesianState(n), h):
            A = cell_cg_args(cell)
            assert A.gamma == pytest.approx(A.alpha + A.beta, abs=1e-12)
            assert A.c - A.gamma == pytest.approx(cell.q, abs=1e-12)
            assert A.c - A.a - A.beta == pytest.approx(cell_phase(cell), abs=1e-12)


def test_cell_args_example_accepted():
    p = ModelParams(k=(0.3, 0.4))
    (cell,) = collect_cell_data(TWO, p, CartesianState((1, 0)), HypersphericalState(0, (1,)))
    A = cell_cg_args(cell)
    assert A.integer_parts() == (0, 1, 1, 0)
    assert A.selection_ok()


def test_ground_cell_is_stretched():
    p = ModelParams(k=(0.3, 0.4))
    (cell,) = collect_cell_data(TWO, p, CartesianState((0, 0)), HypersphericalState(0, (0,)))
    A = cell_cg_args(cell)
    assert A.a + A.b == pytest.approx(A.c)
    assert cell_coefficient(cell) == pytest.approx(1.0, abs=1e-14)


def test_cell_coefficient_against_integral():
    p = ModelParams(k=(0.3, 0.4))
    for n in [(1, 0), (0, 1)]:
        c, h = CartesianState(n), HypersphericalState(0, (1,))
        assert transition_coefficient(TWO, p, c, h) == pytest.approx(oracle_transition(TWO, p, c, h), abs=1e-9)
    a = transition_coefficient(TWO, p, CartesianState((1, 0)), HypersphericalState(0, (1,)))
    b = transition_coefficient(TWO, p, CartesianState((0, 1)), HypersphericalState(0, (1,)))
    assert a != pytest.approx(b, abs=1e-3)


# --- matrices ------------------------------------------------------------


def test_ground_state_is_one():
    rng = np.random.default_rng(1)
    for D in range(2, 7):
        t = random_tree(D, rng)
        p = random_params(rng, D)
        W = transition_matrix(t, p, 0)
        assert W.values.shape == (1, 1)
        assert W.values[0, 0] == pytest.approx(1.0, abs=1e-13)
        O = oracle_matrix(t, p, 0)
        assert O.values[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_half_integer_two_by_two():
    p = ModelParams(k=(0.5, 0.5))
    W = transition_matrix(TWO, p, 1)
    for i, c in enumerate(W.rows):
        for j, h in enumerate(W.cols):
            ref = (-1) ** c.n[0] * math.sqrt(2) * wigner_small_d(2, c.n[0] - c.n[1], h.q[0] + 1, math.pi / 2)
            assert W.values[i, j] == pytest.approx(ref, abs=1e-14)
    # hand values: entries of magnitude 1/sqrt(2)
    np.testing.assert_allclose(np.abs(W.values), math.sqrt(0.5), atol=1e-15)


def test_two_dimensional_orthogonality():
    rng = np.random.default_rng(22)
    for _ in range(5):
        W = transition_matrix(TWO, random_params(rng, 2), 2)
        assert W.values.shape == (3, 3)
        assert orthogonality_defect(W) <= 1e-9


def test_three_dimensional_chain_against_oracle():
    t = parse_tree("((x1 x2) x3)")
    p = ModelParams(k=(0.3, 0.7, 1.2), signs=(-1, 1, 1))
    W = transition_matrix(t, p, 2)
    O = oracle_matrix(t, p, 2)
    assert W.values.shape == (6, 6)
    assert np.abs(W.values - O.values).max() <= 1e-8
    np.testing.assert_array_equal(calibrate_signs(W, O), np.ones(6))


def test_oracle_row_norms():
    rng = np.random.default_rng(4)
    for N in range(4):
        O = oracle_matrix(TWO, random_params(rng, 2), N).values
        np.testing.assert_allclose(np.sum(O * O, axis=1), 1.0, atol=1e-8)


def test_oracle_sweep_small():
    rng = np.random.default_rng(8)
    for D in (2, 3, 4):
        for t in all_tree_shapes(D):
            p = random_params(rng, D)
            for N in range(3):
                W = transition_matrix(t, p, N)
                O = oracle_matrix(t, p, N)
                assert np.abs(W.values - O.values).max() <= 1e-8


def test_tree_independence():
    rng = np.random.default_rng(13)
    for D in (3, 4):
        shapes = all_tree_shapes(D)
        p = random_params(rng, D)
        for N in range(4):
            W1 = transition_matrix(shapes[0], p, N).values
            W2 = transition_matrix(shapes[-1], p, N).values
            if N > 0:
                assert np.abs(W1 - W2).max() > 1e-3
            assert orthogonality_defect(W1.T @ W2) <= 1e-9


def test_parallel_assembly_is_bitwise_identical():
    t = parse_tree(FIG1)
    p = ModelParams(k=(0.3, 0.9, 1.4, 0.25, 2.0, 0.7))
    serial = transition_matrix(t, p, 2, workers=1)
    threaded = transition_matrix(t, p, 2, workers=4)
    np.testing.assert_array_equal(serial.values, threaded.values)


def test_negative_N():
    with pytest.raises(ValueError):
        transition_matrix(TWO, ModelParams(k=(0.3, 0.4)), -1)


# --- telescoping ---------------------------------------------------------


def test_telescoping_ground_state():
    t = parse_tree("((x1 x2) (x3 x4))")
    p = ModelParams(k=(0.3, 0.8, 1.1, 0.45), signs=(1, 1, 1, -1))
    c, h = CartesianState((0, 0, 0, 0)), HypersphericalState(0, (0, 0, 0))
    lhs, rhs = k_telescoping_check(t, p, c, h)
    l = node_momenta(t, p, h).root
    closed = math.sqrt(math.prod(math.gamma(v + 1) for v in p.nu) / math.gamma(l + 2))
    assert lhs == pytest.approx(closed, rel=1e-12)
    assert rhs == pytest.approx(closed, rel=1e-12)


def test_telescoping_random_d4():
    rng = np.random.default_rng(31)
    done = 0
    while done < 50:
        t = random_tree(4, rng)
        p = random_params(rng, 4)
        N = int(rng.integers(0, 5))
        n = [0] * 4
        q = [0] * 3
        for _ in range(N):
            n[int(rng.integers(0, 4))] += 1
        for _ in range(int(rng.integers(0, N + 1))):
            q[int(rng.integers(0, 3))] += 1
        c, h = CartesianState(tuple(n)), HypersphericalState(N - sum(q), tuple(q))
        if not admissible(t, p, c, h):
            with pytest.raises(ValueError):
                k_telescoping_check(t, p, c, h)
            continue
        lhs, rhs = k_telescoping_check(t, p, c, h)
        assert abs(lhs - rhs) / rhs <= 1e-11
        done += 1


def test_inadmissible_entries_vanish():
    t = parse_tree("((x1 x2) x3)")
    p = ModelParams(k=(0.3, 0.7, 1.2))
    c, h = CartesianState((0, 0, 2)), HypersphericalState(0, (0, 2))
    assert not admissible(t, p, c, h)
    assert transition_coefficient(t, p, c, h) == 0.0
    assert abs(oracle_transition(t, p, c, h)) < 1e-10


# --- pointwise -----------------------------------------------------------


def test_pointwise_ground_state():
    t = parse_tree("(x1 (x2 x3))")
    p = ModelParams(k=(0.3, 0.7, 1.2))
    lhs, rhs = expand_pointwise(t, p, CartesianState((0, 0, 0)), (1.1, [0.4, 0.9]))
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_pointwise_two_dimensional():
    rng = np.random.default_rng(17)
    p = random_params(rng, 2)
    W = transition_matrix(TWO, p, 2)
    pairs = []
    for _ in range(20):
        point = (float(rng.uniform(0.2, 2.5)), [float(rng.uniform(0.01, 1.56))])
        pairs += [expand_pointwise(TWO, p, c, point, W) for c in W.rows]
        pairs += [expand_pointwise_inverse(TWO, p, h, point, W) for h in W.cols]
    scale = max(abs(lhs) for lhs, _ in pairs)
    assert max(abs(lhs - rhs) for lhs, rhs in pairs) <= 1e-8 * scale


def test_pointwise_domain():
    p = ModelParams(k=(0.3, 0.4))
    with pytest.raises(ValueError):
        expand_pointwise(TWO, p, CartesianState((0, 0)), (1.0, [0.0]))
    with pytest.raises(ValueError):
        expand_pointwise(TWO, p, CartesianState((0, 0)), (-1.0, [0.3]))


# --- calibration ---------------------------------------------------------


def test_calibrate_signs():
    A = np.array([[0.6, 0.8], [0.8, -0.6]])
    np.testing.assert_array_equal(calibrate_signs(A, A * [1, -1]), [1, -1])
    with pytest.raises(SignCalibrationError):
        calibrate_signs(A, A * [[1, 1], [-1, 1]])
    with pytest.raises(SignCalibrationError):
        calibrate_signs(A, A * 1.01)


@pytest.mark.parametrize("D", [2, 3, 4])
def test_free_lower_branch_at_one_half(D):
    # k = 1/2 with the lower sign puts c at -1/2 for q = 0 cells; the 0 * inf
    # factor there must be taken as its finite limit, not dropped
    p = ModelParams(k=(0.5,) * D, signs=(-1,) * D)
    for tree in all_tree_shapes(D):
        for N in range(3):
            W = transition_matrix(tree, p, N)
            O = oracle_matrix(tree, p, N)
            assert np.abs(W.values - O.values).max() < 1e-12
            assert orthogonality_defect(W) < 1e-12


def test_lower_branch_limit_is_continuous():
    tree = parse_tree("((x1 x2) x3)")
    W = transition_matrix(tree, ModelParams(k=(0.5, 0.5, 0.3), signs=(-1, -1, -1)), 2)
    W_near = transition_matrix(tree, ModelParams(k=(0.5 - 1e-9, 0.5 - 1e-9, 0.3), signs=(-1, -1, -1)), 2)
    assert np.abs(W.values - W_near.values).max() < 1e-7
