"""Cartesian and hyperspherical eigenbases of the singular oscillator

    V = 1/2 sum_i (Omega^2 x_i^2 + (k_i^2 - 1/4) / x_i^2),   x_i > 0.

Normalisation conventions:

* Cartesian functions are the textbook products and integrate to ``2**-D``
  over the positive orthant.
* Hyperspherical functions (radial times angular) are unit-normalised over
  the orthant. ``angular_function(..., paper_factors=True)`` restores the
  extra ``1/2`` and ``1/sqrt(2)`` cell factors of the reduced leaf cells,
  which brings the angular part down to ``2**(-D/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .special import integrate, jacobi, jacobi_norm_constant, laguerre, log_gamma_ratio
from .tree import Tree, unit_vector_unchecked

__all__ = [
    "ModelParams",
    "CartesianState",
    "HypersphericalState",
    "NodeMomenta",
    "energy",
    "cartesian_factor",
    "cartesian_wavefunction",
    "node_momenta",
    "cell_function",
    "angular_function",
    "radial_function",
    "hyperspherical_wavefunction",
    "radial_residual",
    "enumerate_cartesian",
    "enumerate_hyperspherical",
    "cartesian_inner_product",
    "radial_inner_product",
    "angular_inner_product",
    "hyperspherical_inner_product",
]


@dataclass(frozen=True)
class ModelParams:
    """Oscillator frequency, singular strengths and the branch sign per axis.

    ``signs`` defaults to all ``+1``. A ``-1`` branch is only allowed where
    ``k_i <= 1/2``.
    """

    k: tuple[float, ...]
    signs: tuple[int, ...] | None = None
    omega: float = 1.0

    def __post_init__(self):
        k = tuple(float(x) for x in self.k)
        signs = (1,) * len(k) if self.signs is None else tuple(int(s) for s in self.signs)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "signs", signs)
        if len(k) < 2:
            raise ValueError("need at least two dimensions")
        if len(signs) != len(k):
            raise ValueError(f"{len(signs)} signs given for {len(k)} strengths")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        for i, (ki, si) in enumerate(zip(k, signs), start=1):
            if not ki > 0:
                raise ValueError(f"k_{i} must be positive, got {ki}")
            if si not in (1, -1):
                raise ValueError(f"sign_{i} must be +1 or -1, got {si}")
            if si == -1 and ki > 0.5:
                raise ValueError(f"k_{i} = {ki} > 1/2 requires the + branch")

    @property
    def D(self) -> int:
        return len(self.k)

    @property
    def nu(self) -> tuple[float, ...]:
        """Signed strengths ``+-k_i``."""
        return tuple(s * k for s, k in zip(self.signs, self.k))

    @property
    def leaf_momenta(self) -> tuple[float, ...]:
        return tuple(0.5 + v for v in self.nu)


@dataclass(frozen=True, order=True)
class CartesianState:
    n: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(x) for x in self.n))
        if any(x < 0 for x in self.n):
            raise ValueError("Cartesian quantum numbers must be nonnegative")

    @property
    def N(self) -> int:
        return sum(self.n)

    def to_json(self) -> list[int]:
        return list(self.n)


@dataclass(frozen=True, order=True)
class HypersphericalState:
    """Radial quantum number and one ``q`` per internal node, in angle order."""

    n_r: int
    q: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "n_r", int(self.n_r))
        object.__setattr__(self, "q", tuple(int(x) for x in self.q))
        if self.n_r < 0 or any(x < 0 for x in self.q):
            raise ValueError("hyperspherical quantum numbers must be nonnegative")

    @property
    def N(self) -> int:
        return self.n_r + sum(self.q)

    def to_json(self) -> dict:
        return {"n_r": self.n_r, "q": list(self.q)}


@dataclass(frozen=True)
class NodeMomenta:
    """Separation constant ``l`` for every tree vertex, indexed like ``Tree.nodes``."""

    l: tuple[float, ...]

    @property
    def root(self) -> float:
        return self.l[0]


def energy(params: ModelParams, N: int) -> float:
    return params.omega * (2 * N + params.D + sum(params.nu))


# --- Cartesian basis ------------------------------------------------------


def cartesian_factor(n: int, nu: float, omega: float, x):
    """One-dimensional factor ``psi_n(x, nu)``; integrates to 1/2 on ``(0, inf)``."""
    x = np.asarray(x, dtype=float)
    t = omega * x * x
    g = log_gamma_ratio([n + 1], [n + nu + 1])
    norm = math.sqrt(math.sqrt(omega)) * math.exp(0.5 * g.log_abs)
    out = norm * np.exp(-0.5 * t) * np.sqrt(t) ** (0.5 + nu) * laguerre(n, nu, t)
    return out if out.ndim else float(out)


def cartesian_wavefunction(params: ModelParams, state: CartesianState, x: Sequence[float]):
    x = [np.asarray(xi, dtype=float) for xi in x]
    if len(x) != params.D or len(state.n) != params.D:
        raise ValueError("dimension mismatch between params, state and point")
    if any(np.any(xi <= 0) for xi in x):
        raise ValueError("Cartesian coordinates must be positive")
    value = 1.0
    for n, nu, xi in zip(state.n, params.nu, x):
        value = value * cartesian_factor(n, nu, params.omega, xi)
    return value


# --- hyperspherical basis -------------------------------------------------


def _check_hyper(tree: Tree, params: ModelParams, state: HypersphericalState):
    if params.D != tree.D:
        raise ValueError(f"tree has {tree.D} leaves but params describe D = {params.D}")
    if len(state.q) != tree.D - 1:
        raise ValueError(f"state needs {tree.D - 1} q values, got {len(state.q)}")


def node_momenta(tree: Tree, params: ModelParams, state: HypersphericalState) -> NodeMomenta:
    """Leaves carry ``1/2 +- k_i``; a node carries ``2q + l_left + l_right``."""
    _check_hyper(tree, params, state)
    l = [0.0] * len(tree.nodes)
    lm = params.leaf_momenta
    for node in tree.postorder():
        if node.is_leaf:
            l[node.index] = lm[node.leaf - 1]
        else:
            l[node.index] = 2 * state.q[node.angle - 1] + l[node.left] + l[node.right]
    return NodeMomenta(tuple(l))


def cell_function(l_s: float, v_s: int, l_r: float, v_r: int, q: int, theta, cos=None, sin=None):
    """Unit-normalised cell solution on ``[0, pi/2]`` with weight
    ``cos^v_s sin^v_r``. ``cos``/``sin`` may be passed in precomputed."""
    theta = np.asarray(theta, dtype=float)
    a_s = l_s + 0.5 * (v_s - 1)
    a_r = l_r + 0.5 * (v_r - 1)
    c = np.cos(theta) if cos is None else cos
    s = np.sin(theta) if sin is None else sin
    # cos(2 theta) from c and s keeps accuracy at both ends
    x = c * c - s * s
    return jacobi_norm_constant(q, a_s, a_r) * c**l_s * s**l_r * jacobi(q, a_r, a_s, x)


def _cell_inputs(tree: Tree, l: Sequence[float], node):
    left, right = tree.children(node)
    return l[left.index], left.v, l[right.index], right.v


def angular_function(
    tree: Tree,
    params: ModelParams,
    state: HypersphericalState,
    theta: Sequence,
    paper_factors: bool = False,
):
    """Product of cell functions over all internal nodes.

    ``theta`` holds ``D - 1`` angles (scalars or broadcastable arrays) in
    ``[0, pi/2]``.
    """
    _check_hyper(tree, params, state)
    if len(theta) != tree.D - 1:
        raise ValueError(f"expected {tree.D - 1} angles, got {len(theta)}")
    theta = [np.asarray(t, dtype=float) for t in theta]
    if any(np.any(t < 0) or np.any(t > math.pi / 2) for t in theta):
        raise ValueError("angles must lie in [0, pi/2]")
    l = node_momenta(tree, params, state).l
    value = 1.0
    for node in tree.internal:
        l_s, v_s, l_r, v_r = _cell_inputs(tree, l, node)
        value = value * cell_function(l_s, v_s, l_r, v_r, state.q[node.angle - 1], theta[node.angle - 1])
        if paper_factors:
            leaves = sum(1 for c in tree.children(node) if c.is_leaf)
            value = value * 2.0 ** (-0.5 * leaves)
    return value


def radial_function(params: ModelParams, l: float, n_r: int, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    if not l >= 0:
        raise ValueError("hypermomentum must be nonnegative")
    D, om = params.D, params.omega
    g = log_gamma_ratio([n_r + 1], [n_r + l + 0.5 * D])
    log_norm = 0.5 * (math.log(2.0) + (l + 0.5 * D) * math.log(om) + g.log_abs)
    t = om * r * r
    out = math.exp(log_norm) * np.exp(-0.5 * t) * r**l * laguerre(n_r, l + 0.5 * (D - 2), t)
    return out if out.ndim else float(out)


def hyperspherical_wavefunction(
    tree: Tree, params: ModelParams, state: HypersphericalState, r, theta: Sequence
):
    l = node_momenta(tree, params, state).root
    return radial_function(params, l, state.n_r, r) * angular_function(tree, params, state, theta)


def radial_residual(params: ModelParams, l: float, n_r: int, r: float, E: float | None = None) -> float:
    """Relative residual of the radial equation at ``r`` by central differences.

    ``E`` defaults to ``Omega (2 n_r + l + D/2)``. The residual is divided by
    the sum of the magnitudes of the individual terms.
    """
    D, om = params.D, params.omega
    if E is None:
        E = om * (2 * n_r + l + 0.5 * D)
    h = 1e-4 / math.sqrt(om)
    rm, r0, rp = radial_function(params, l, n_r, np.array([r - h, r, r + h]))
    d2 = (rp - 2 * r0 + rm) / (h * h)
    d1 = (rp - rm) / (2 * h)
    terms = [d2, (D - 1) / r * d1, 2 * E * r0, -l * (l + D - 2) / r**2 * r0, -(om * r) ** 2 * r0]
    return abs(math.fsum(terms)) / math.fsum(abs(t) for t in terms)


# --- state enumeration ----------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_cartesian(D: int, N: int) -> list[CartesianState]:
    """All ``n`` with ``sum(n) == N``, lexicographic."""
    if D < 1 or N < 0:
        raise ValueError("need D >= 1 and N >= 0")
    return [CartesianState(n) for n in _compositions(N, D)]


def enumerate_hyperspherical(tree: Tree, N: int) -> list[HypersphericalState]:
    """All ``q`` with ``sum(q) <= N`` (lexicographic in ``q``), ``n_r = N - sum(q)``."""
    if N < 0:
        raise ValueError("need N >= 0")
    states = []
    for full in _compositions(N, tree.D):
        # full = (q_1, ..., q_{D-1}, n_r) keeps q lexicographic
        states.append(HypersphericalState(full[-1], full[:-1]))
    return states


# --- inner products by quadrature -----------------------------------------


def _radial_cutoff(params: ModelParams, extent: float) -> float:
    return math.sqrt((2.0 * extent + 120.0) / params.omega)


def cartesian_inner_product(params: ModelParams, a: CartesianState, b: CartesianState, tol: float = 1e-12) -> float:
    """Orthant overlap as a product of one-dimensional quadratures."""
    total = 1.0
    for na, nb, nu in zip(a.n, b.n, params.nu):
        hi = _radial_cutoff(params, 2 * (na + nb) + 2 * nu + 2)
        total *= integrate(
            lambda x: cartesian_factor(na, nu, params.omega, x) * cartesian_factor(nb, nu, params.omega, x),
            0.0, hi, tol,
        )
    return total


def radial_inner_product(params: ModelParams, l1: float, n1: int, l2: float, n2: int, tol: float = 1e-12) -> float:
    D = params.D
    hi = _radial_cutoff(params, 2 * (n1 + n2) + l1 + l2 + D)
    return integrate(
        lambda r: radial_function(params, l1, n1, r) * radial_function(params, l2, n2, r) * r ** (D - 1),
        0.0, hi, tol,
    )


def angular_inner_product(
    tree: Tree, params: ModelParams, a: HypersphericalState, b: HypersphericalState, tol: float = 1e-12
) -> float:
    """Overlap on the orthant of the sphere; the measure factorises per cell
    into ``cos^v_s sin^v_r dtheta``."""
    la = node_momenta(tree, params, a).l
    lb = node_momenta(tree, params, b).l
    total = 1.0
    for node in tree.internal:
        j = node.angle - 1
        sa = _cell_inputs(tree, la, node)
        sb = _cell_inputs(tree, lb, node)
        v_s, v_r = sa[1], sa[3]

        def integrand(t, t_lo, t_hi, sa=sa, sb=sb, j=j, v_s=v_s, v_r=v_r):
            c, s = np.sin(t_hi), np.sin(t_lo)
            fa = cell_function(sa[0], sa[1], sa[2], sa[3], a.q[j], t, cos=c, sin=s)
            fb = cell_function(sb[0], sb[1], sb[2], sb[3], b.q[j], t, cos=c, sin=s)
            return fa * fb * c**v_s * s**v_r

        total *= integrate(integrand, 0.0, math.pi / 2, tol, with_distances=True)
    return total


def hyperspherical_inner_product(
    tree: Tree, params: ModelParams, a: HypersphericalState, b: HypersphericalState, tol: float = 1e-12
) -> float:
    la = node_momenta(tree, params, a).root
    lb = node_momenta(tree, params, b).root
    return radial_inner_product(params, la, a.n_r, lb, b.n_r, tol) * angular_inner_product(tree, params, a, b, tol)


def hyperspherical_point(tree: Tree, r, theta: Sequence) -> list:
    """Cartesian coordinates ``r * x~(theta)``."""
    return [r * c for c in unit_vector_unchecked(tree, theta)]
