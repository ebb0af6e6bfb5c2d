"""Cartesian <-> hyperspherical transition matrices.

For a fixed principal quantum number ``N`` the unit-normalised Cartesian
state (``2**(D/2)`` times the textbook product) expands over hyperspherical
states of the same energy,

    2**(D/2) Psi_n(x) = sum_q W[n, q] Psi_{n_r, q}(r, theta).

Every entry factorises over the cells of the tree into continued
Clebsch-Gordan coefficients with a phase ``(-1)**(c - a - beta)``. The
:func:`oracle_transition` route evaluates the same entry from the
integral representation instead (leading large-``r`` asymptotics plus one
tanh-sinh quadrature per cell) and shares no code with the CG product beyond
the cell bookkeeping.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bases import (
    CartesianState,
    HypersphericalState,
    ModelParams,
    cartesian_wavefunction,
    enumerate_cartesian,
    enumerate_hyperspherical,
    hyperspherical_point,
    hyperspherical_wavefunction,
    node_momenta,
)
from .cg import INTEGER_TOL, CGArgs, CGArgsError, cell_constant, cell_integral, cg_continued
from .special import DEFAULT_TOL, log_gamma_ratio
from .tree import Tree

__all__ = [
    "StateMismatchError",
    "SignCalibrationError",
    "CellData",
    "TransitionMatrix",
    "collect_cell_data",
    "vertex_excess",
    "admissible",
    "cell_cg_args",
    "cell_phase",
    "cell_coefficient",
    "transition_coefficient",
    "transition_matrix",
    "oracle_transition",
    "oracle_matrix",
    "k_telescoping_check",
    "expand_pointwise",
    "expand_pointwise_inverse",
    "basis_values_at",
    "orthogonality_defect",
    "calibrate_signs",
]


class StateMismatchError(ValueError):
    """Cartesian and hyperspherical states belong to different energies."""


class SignCalibrationError(ArithmeticError):
    """Product and oracle matrices differ by more than a per-column sign."""


def _as_int(x: float, what: str) -> int:
    n = round(x)
    if abs(x - n) > INTEGER_TOL:
        raise ValueError(f"{what} = {x!r} is not an integer")
    return int(n)


@dataclass(frozen=True)
class CellData:
    """Inputs of one cell: child momenta ``l_s, l_r``, child node counts
    ``v_s, v_r``, the sums ``N_s, N_r`` of shifted Cartesian numbers over the
    leaves of each side, the cell momentum ``l`` and its ``q``.

    ``N_s - l_s`` and ``N_r - l_r`` are even integers. They may be negative
    for states where a subtree holds more angular than Cartesian quanta; such
    entries vanish.
    """

    angle: int
    l_s: float
    l_r: float
    v_s: int
    v_r: int
    N_s: float
    N_r: float
    l: float
    q: int

    def __post_init__(self):
        if abs(2 * self.q - (self.l - self.l_s - self.l_r)) > INTEGER_TOL:
            raise ValueError("cell momenta violate 2q = l - l_s - l_r")
        for side, N, l in (("left", self.N_s, self.l_s), ("right", self.N_r, self.l_r)):
            excess = _as_int(N - l, f"{side} N - l")
            if excess % 2:
                raise ValueError(f"{side} N - l = {excess} is odd")

    def integral_inputs(self) -> tuple:
        return (self.l_s, self.v_s, self.N_s, self.l_r, self.v_r, self.N_r, self.q)


def _check_pair(tree: Tree, params: ModelParams, cart: CartesianState, hyper: HypersphericalState):
    if tree.D != params.D or len(cart.n) != params.D:
        raise ValueError("tree, params and Cartesian state disagree on D")
    if cart.N != hyper.N:
        raise StateMismatchError(f"Cartesian N = {cart.N} but hyperspherical N = {hyper.N}")


def _vertex_N(tree: Tree, params: ModelParams, cart: CartesianState) -> list[float]:
    """Sum of shifted Cartesian numbers ``2 n_i +- k_i + 1/2`` below each vertex."""
    nu = params.nu
    out = [0.0] * len(tree.nodes)
    for node in tree.postorder():
        if node.is_leaf:
            i = node.leaf - 1
            out[node.index] = 2 * cart.n[i] + nu[i] + 0.5
        else:
            out[node.index] = out[node.left] + out[node.right]
    return out


def collect_cell_data(
    tree: Tree, params: ModelParams, cart: CartesianState, hyper: HypersphericalState
) -> list[CellData]:
    """One :class:`CellData` per internal node, in angle order."""
    _check_pair(tree, params, cart, hyper)
    l = node_momenta(tree, params, hyper).l
    Nv = _vertex_N(tree, params, cart)
    cells = []
    for node in tree.internal:
        left, right = tree.children(node)
        cells.append(
            CellData(
                angle=node.angle,
                l_s=l[left.index], l_r=l[right.index],
                v_s=left.v, v_r=right.v,
                N_s=Nv[left.index], N_r=Nv[right.index],
                l=l[node.index], q=hyper.q[node.angle - 1],
            )
        )
    return cells


def vertex_excess(
    tree: Tree, params: ModelParams, cart: CartesianState, hyper: HypersphericalState
) -> list[int]:
    """``(N_v - l_v) / 2`` for every vertex (Cartesian minus angular quanta below it)."""
    _check_pair(tree, params, cart, hyper)
    l = node_momenta(tree, params, hyper).l
    Nv = _vertex_N(tree, params, cart)
    return [_as_int(0.5 * (n - m), "vertex excess") for n, m in zip(Nv, l)]


def admissible(tree, params, cart, hyper) -> bool:
    """True when no subtree carries more angular than Cartesian quanta;
    every other entry of the matrix is exactly zero."""
    return min(vertex_excess(tree, params, cart, hyper)) >= 0


def cell_cg_args(cell: CellData) -> CGArgs:
    ls, lr, vs, vr, Ns, Nr, l = cell.l_s, cell.l_r, cell.v_s, cell.v_r, cell.N_s, cell.N_r, cell.l
    args = CGArgs(
        a=0.25 * (ls - lr + Ns + Nr + vs - 1),
        alpha=0.25 * (lr + ls + Ns - Nr + vs - 1),
        b=0.25 * (lr - ls + Ns + Nr + vr - 1),
        beta=0.25 * (lr + ls + Nr - Ns + vr - 1),
        c=0.5 * (l + 0.5 * (vs - 1) + 0.5 * (vr - 1)),
        gamma=0.5 * (ls + lr + 0.5 * (vs - 1) + 0.5 * (vr - 1)),
    )
    args.integer_parts()
    if abs(args.alpha + args.beta - args.gamma) > INTEGER_TOL:
        raise CGArgsError(f"cell {cell.angle}: gamma != alpha + beta")
    return args


def cell_phase(cell: CellData) -> int:
    """Exponent ``c - a - beta = (l - l_s - N_r) / 2``."""
    return _as_int(0.5 * (cell.l - cell.l_s - cell.N_r), "cell phase")


def cell_coefficient(cell: CellData) -> float:
    sign = -1 if cell_phase(cell) % 2 else 1
    return sign * cg_continued(cell_cg_args(cell))


def transition_coefficient(
    tree: Tree, params: ModelParams, cart: CartesianState, hyper: HypersphericalState
) -> float:
    value = 1.0
    for cell in collect_cell_data(tree, params, cart, hyper):
        value *= cell_coefficient(cell)
        if value == 0.0:
            break
    return value


@dataclass(frozen=True)
class TransitionMatrix:
    """Dense ``W`` with Cartesian rows and hyperspherical columns."""

    tree: Tree
    params: ModelParams
    N: int
    rows: tuple[CartesianState, ...]
    cols: tuple[HypersphericalState, ...]
    values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.rows)


def _workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("POLYOSC_THREADS")
        workers = int(env) if env else 1
    return max(1, workers)


def _assemble(entry, tree, params, N, workers) -> TransitionMatrix:
    rows = tuple(enumerate_cartesian(tree.D, N))
    cols = tuple(enumerate_hyperspherical(tree, N))

    def row(cart):
        return [entry(tree, params, cart, hyper) for hyper in cols]

    n_workers = _workers(workers)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            data = list(pool.map(row, rows))
    else:
        data = [row(c) for c in rows]
    values = np.array(data, dtype=float).reshape(len(rows), len(cols))
    values.setflags(write=False)
    return TransitionMatrix(tree, params, N, rows, cols, values)


def transition_matrix(tree: Tree, params: ModelParams, N: int, workers: int | None = None) -> TransitionMatrix:
    """Matrix of :func:`transition_coefficient` over all states at ``N``.

    ``workers`` defaults to ``$POLYOSC_THREADS`` (or 1); the result does not
    depend on it.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    return _assemble(transition_coefficient, tree, params, N, workers)


# --- integral representation ----------------------------------------------


def oracle_transition(
    tree: Tree,
    params: ModelParams,
    cart: CartesianState,
    hyper: HypersphericalState,
    tol: float = DEFAULT_TOL,
) -> float:
    """Entry from the integral representation, one quadrature per cell.

    Matching the large-``r`` leading terms of both sides gives

        W = M * prod_cells int cos^N_s sin^N_r f_cell cos^v_s sin^v_r dtheta,

    with ``M = (-1)^(N - n_r) / sqrt(2) * sqrt(2^(2D) n_r! Gamma(n_r + l + D/2)
    / prod_i n_i! Gamma(n_i +- k_i + 1))`` and the cell functions carrying
    their reduced-cell factors (1/2 for two leaf children, 1/sqrt(2) for one).
    """
    _check_pair(tree, params, cart, hyper)
    D = params.D
    l_root = node_momenta(tree, params, hyper).root
    g = log_gamma_ratio(
        [hyper.n_r + 1, hyper.n_r + l_root + 0.5 * D],
        [x for n, nu in zip(cart.n, params.nu) for x in (n + 1, n + nu + 1)],
    )
    sign = -1 if (cart.N - hyper.n_r) % 2 else 1
    M = sign / math.sqrt(2.0) * math.exp(0.5 * (2 * D * math.log(2.0) + g.log_abs))
    value = M
    for cell, node in zip(collect_cell_data(tree, params, cart, hyper), tree.internal):
        leaves = sum(1 for c in tree.children(node) if c.is_leaf)
        value *= 2.0 ** (-0.5 * leaves) * cell_integral(*cell.integral_inputs(), tol)
    return value


def oracle_matrix(
    tree: Tree, params: ModelParams, N: int, tol: float = DEFAULT_TOL, workers: int | None = None
) -> TransitionMatrix:
    def entry(t, p, c, h):
        return oracle_transition(t, p, c, h, tol)

    return _assemble(entry, tree, params, N, workers)


def k_telescoping_check(
    tree: Tree, params: ModelParams, cart: CartesianState, hyper: HypersphericalState
) -> tuple[float, float]:
    """Product of the per-cell constants ``K`` and its closed telescoped form.

    Only defined for admissible pairs; elsewhere single factors diverge.
    """
    if not admissible(tree, params, cart, hyper):
        raise ValueError("K constants diverge for a pair with a negative vertex excess")
    log_lhs = 0.0
    for cell in collect_cell_data(tree, params, cart, hyper):
        K = cell_constant(*cell.integral_inputs())
        if K.sign < 0:
            raise ArithmeticError("cell constant is not real")
        log_lhs += K.log_abs
    D = params.D
    l_root = node_momenta(tree, params, hyper).root
    g = log_gamma_ratio(
        [x for n, nu in zip(cart.n, params.nu) for x in (n + 1, n + nu + 1)],
        [hyper.n_r + l_root + 0.5 * D, hyper.n_r + 1],
    )
    return math.exp(log_lhs), math.exp(0.5 * g.log_abs)


# --- pointwise expansion --------------------------------------------------


def _point(tree: Tree, point) -> tuple[float, list[float], list[float]]:
    r, theta = point
    theta = [float(t) for t in theta]
    if len(theta) != tree.D - 1:
        raise ValueError(f"expected {tree.D - 1} angles")
    if not r > 0 or any(not 0 < t < math.pi / 2 for t in theta):
        raise ValueError("point must be interior: r > 0 and 0 < theta < pi/2")
    return float(r), theta, [float(x) for x in hyperspherical_point(tree, r, theta)]


def expand_pointwise(
    tree: Tree, params: ModelParams, cart: CartesianState, point, W: TransitionMatrix | None = None
) -> tuple[float, float]:
    """Both sides of the Cartesian expansion at ``point = (r, theta)``.

    ``lhs`` is the Cartesian function rescaled by ``2**(D/2)`` to unit norm on
    the orthant; ``rhs`` is the sum of ``W * Psi_hyper``.
    """
    r, theta, x = _point(tree, point)
    lhs = 2.0 ** (0.5 * params.D) * cartesian_wavefunction(params, cart, x)
    if W is None:
        W = transition_matrix(tree, params, cart.N)
    i = W.rows.index(cart)
    terms = [W.values[i, j] * hyperspherical_wavefunction(tree, params, h, r, theta) for j, h in enumerate(W.cols)]
    return float(lhs), math.fsum(terms)


def expand_pointwise_inverse(
    tree: Tree, params: ModelParams, hyper: HypersphericalState, point, W: TransitionMatrix | None = None
) -> tuple[float, float]:
    """Hyperspherical function against ``sum_n W[n, q] 2**(D/2) Psi_n``."""
    r, theta, x = _point(tree, point)
    lhs = hyperspherical_wavefunction(tree, params, hyper, r, theta)
    if W is None:
        W = transition_matrix(tree, params, hyper.N)
    j = W.cols.index(hyper)
    scale = 2.0 ** (0.5 * params.D)
    terms = [W.values[i, j] * scale * cartesian_wavefunction(params, c, x) for i, c in enumerate(W.rows)]
    return float(lhs), math.fsum(terms)


def basis_values_at(W: TransitionMatrix, point) -> tuple[np.ndarray, np.ndarray]:
    """All unit-normalised Cartesian (rows) and hyperspherical (columns)
    basis values at ``point = (r, theta)``.

    The expansion then reads ``cart ~ W.values @ hyper`` and its inverse
    ``hyper ~ W.values.T @ cart``.
    """
    tree, params = W.tree, W.params
    r, theta, x = _point(tree, point)
    scale = 2.0 ** (0.5 * params.D)
    cart = np.array([scale * cartesian_wavefunction(params, c, x) for c in W.rows])
    hyper = np.array([hyperspherical_wavefunction(tree, params, h, r, theta) for h in W.cols])
    return cart, hyper


# --- matrix checks --------------------------------------------------------


def orthogonality_defect(W) -> float:
    """``max(|W W^T - I|, |W^T W - I|)`` entrywise."""
    A = np.asarray(getattr(W, "values", W), dtype=float)
    eye = np.eye(A.shape[0])
    return float(max(np.abs(A @ A.T - eye).max(), np.abs(A.T @ A - eye).max()))


def calibrate_signs(product, oracle, atol: float = 1e-8) -> np.ndarray:
    """Per-column signs ``s`` with ``product[:, j] ~ s[j] * oracle[:, j]``.

    Raises :class:`SignCalibrationError` if magnitudes differ by more than
    ``atol`` or a column needs different signs in different rows.
    """
    P = np.asarray(getattr(product, "values", product), dtype=float)
    O = np.asarray(getattr(oracle, "values", oracle), dtype=float)
    if P.shape != O.shape:
        raise ValueError("matrix shapes differ")
    bad = np.abs(np.abs(P) - np.abs(O)) > atol
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise SignCalibrationError(f"|W| differs at ({i}, {j}): {P[i, j]!r} vs {O[i, j]!r}")
    signs = np.ones(P.shape[1])
    for j in range(P.shape[1]):
        live = np.abs(O[:, j]) > atol
        if not live.any():
            continue
        ratio = np.sign(P[live, j] * O[live, j])
        if not (np.all(ratio == ratio[0])):
            raise SignCalibrationError(f"column {j} needs row-dependent signs")
        signs[j] = ratio[0]
    return signs
