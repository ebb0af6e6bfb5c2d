"""Scalar special-function kernels: signed log-gamma, Laguerre and Jacobi
recurrences, and a tanh-sinh quadrature with level doubling.

Polynomial evaluators accept numpy arrays for ``x`` so that the quadrature
can evaluate integrands on a whole level of nodes at once.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple

import numpy as np

POLE_TOL = 1e-12
DEFAULT_TOL = 1e-11
DEFAULT_MAX_LEVEL = 12


class PoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


class ConvergenceError(ArithmeticError):
    """Quadrature levels failed to stabilise before the level cap."""


class SignedLogGamma(NamedTuple):
    log_abs: float
    sign: int

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs)


def is_pole(x: float, tol: float = POLE_TOL) -> bool:
    return x <= 0.5 and abs(x - round(x)) < tol and round(x) <= 0


def log_gamma_signed(x: float) -> SignedLogGamma:
    """Return ``log|Gamma(x)|`` and the sign of ``Gamma(x)``.

    Raises :class:`PoleError` when ``x`` is within ``POLE_TOL`` of a
    nonpositive integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"log_gamma_signed: non-finite argument {x!r}")
    if is_pole(x):
        raise PoleError(f"Gamma has a pole at x = {x!r}")
    if x > 0:
        return SignedLogGamma(math.lgamma(x), 1)
    # Gamma is negative on (-1, 0), (-3, -2), ...
    sign = -1 if math.floor(x) % 2 else 1
    return SignedLogGamma(math.lgamma(x), sign)


def log_gamma_ratio(numer: Iterable[float], denom: Iterable[float] = ()) -> SignedLogGamma:
    """Signed log of ``prod Gamma(numer) / prod Gamma(denom)``."""
    total = 0.0
    sign = 1
    for x in numer:
        g = log_gamma_signed(x)
        total += g.log_abs
        sign *= g.sign
    for x in denom:
        g = log_gamma_signed(x)
        total -= g.log_abs
        sign *= g.sign
    return SignedLogGamma(total, sign)


def laguerre(n: int, nu: float, x):
    """Associated Laguerre polynomial ``L_n^nu(x)`` by forward recurrence."""
    if n < 0:
        raise ValueError("laguerre: n must be nonnegative")
    if nu <= -1:
        raise ValueError("laguerre: nu must exceed -1")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + nu - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + 1 + nu - x) * cur - (m + nu) * prev) / (m + 1)
    return cur if cur.ndim else float(cur)


def jacobi(q: int, alpha: float, beta: float, x):
    """Jacobi polynomial ``P_q^(alpha, beta)(x)`` by the three-term recurrence."""
    if q < 0:
        raise ValueError("jacobi: q must be nonnegative")
    if alpha <= -1 or beta <= -1:
        raise ValueError("jacobi: alpha and beta must exceed -1")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if q == 0:
        return prev if prev.ndim else float(prev)
    ab = alpha + beta
    cur = 0.5 * (ab + 2.0) * x + 0.5 * (alpha - beta)
    for n in range(2, q + 1):
        s = 2 * n + ab
        a = 2 * n * (n + ab) * (s - 2)
        b = (s - 1) * (s * (s - 2) * x + alpha * alpha - beta * beta)
        c = 2 * (n + alpha - 1) * (n + beta - 1) * s
        prev, cur = cur, (b * cur - c * prev) / a
    return cur if cur.ndim else float(cur)


def jacobi_norm_constant(q: int, alpha: float, beta: float) -> float:
    """Constant making ``N (1+x)^.. (1-x)^.. P_q`` unit-normalised on the cell.

    ``N^2 = 2 (2q+a+b+1) Gamma(q+1) Gamma(q+a+b+1) / (Gamma(q+a+1) Gamma(q+b+1))``;
    symmetric in ``alpha`` and ``beta``.
    """
    if q == 0:
        # (a+b+1) Gamma(a+b+1) = Gamma(a+b+2) stays finite at a + b = -1
        g = log_gamma_ratio([alpha + beta + 2], [alpha + 1, beta + 1])
        return math.sqrt(2.0) * math.exp(0.5 * g.log_abs)
    g = log_gamma_ratio(
        [q + 1, q + alpha + beta + 1], [q + alpha + 1, q + beta + 1]
    )
    return math.sqrt(2.0 * (2 * q + alpha + beta + 1)) * math.exp(0.5 * g.log_abs)


# --- tanh-sinh quadrature -------------------------------------------------

_T_MAX = 6.2


@lru_cache(maxsize=None)
def _level_nodes(level: int):
    """Nodes ``t >= 0`` new to ``level`` with complements ``1 - tanh(..)`` and weights.

    Level 0 holds ``t = 0, 1, 2, ...``; level ``k`` adds the odd multiples
    of ``2**-k``.
    """
    h = 2.0 ** -level
    if level == 0:
        t = np.arange(0.0, _T_MAX + 0.5 * h, h)
    else:
        t = np.arange(h, _T_MAX, 2 * h)
    u = 0.5 * math.pi * np.sinh(t)
    e = np.exp(-2.0 * u)
    comp = 2.0 * e / (1.0 + e)
    weight = 0.5 * math.pi * np.cosh(t) * 4.0 * e / (1.0 + e) ** 2
    keep = comp > 0
    t, comp, weight = t[keep], comp[keep], weight[keep]
    t.setflags(write=False)
    comp.setflags(write=False)
    weight.setflags(write=False)
    return t, comp, weight


def _level_sum(
    f: Callable, lo: float, hi: float, level: int, with_distances: bool
) -> tuple[float, float]:
    t, comp, weight = _level_nodes(level)
    half = 0.5 * (hi - lo)
    d = half * comp
    right = hi - d
    left = lo + d
    if with_distances:
        # abscissae may round onto an endpoint; the exact distances still differ
        mask_r = mask_l = d > 0
    else:
        mask_r = (d > 0) & (right < hi) & (right > lo)
        mask_l = (d > 0) & (left > lo) & (left < hi)
    if level == 0:
        # t = 0 appears once; it sits at the midpoint
        mask_l = mask_l & (t > 0)
    xs = np.concatenate([right[mask_r], left[mask_l]])
    ws = np.concatenate([weight[mask_r], weight[mask_l]])
    if with_distances:
        width = hi - lo
        to_hi = np.concatenate([d[mask_r], width - d[mask_l]])
        from_lo = np.concatenate([width - d[mask_r], d[mask_l]])
        vals = np.asarray(f(xs, from_lo, to_hi), dtype=float)
    else:
        vals = np.asarray(f(xs), dtype=float)
    if vals.shape != xs.shape:
        vals = np.broadcast_to(vals, xs.shape)
    terms = ws * vals
    if not np.all(np.isfinite(terms)):
        raise ConvergenceError("integrand is not finite at a quadrature node")
    return half * math.fsum(terms), half * float(np.sum(np.abs(terms)))


def integrate(
    f: Callable,
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    max_level: int = DEFAULT_MAX_LEVEL,
    *,
    with_distances: bool = False,
) -> float:
    """Integrate ``f`` over ``(lo, hi)`` with the tanh-sinh rule.

    ``f`` must accept a numpy array of abscissae. Integrable algebraic
    endpoint singularities are fine because the nodes never touch the
    endpoints. Each level halves the step; the result is returned once two
    successive levels agree to ``tol`` (absolute), or to the roundoff floor
    of the weighted sum if that is larger.

    With ``with_distances=True`` the integrand is called as
    ``f(x, x - lo, hi - x)`` where both distances are exact rather than
    recovered by cancellation. On ``(0, pi/2)`` this lets ``cos(x)`` be
    evaluated as ``sin(hi - x)``, which keeps full relative accuracy next to
    the upper endpoint.
    """
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("integrate: limits must be finite")
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate(f, hi, lo, tol, max_level, with_distances=with_distances)
    s, s_abs = _level_sum(f, lo, hi, 0, with_distances)
    estimate = s
    h = 1.0
    for level in range(1, max_level + 1):
        h *= 0.5
        ds, ds_abs = _level_sum(f, lo, hi, level, with_distances)
        s += ds
        s_abs += ds_abs
        new = h * s
        floor = 64 * np.finfo(float).eps * h * s_abs
        change = abs(new - estimate)
        if level >= 3 and change <= max(tol, floor):
            return new
        estimate = new
    raise ConvergenceError(
        f"tanh-sinh did not converge to {tol:g} within {max_level} levels "
        f"(last change {change:.3g})"
    )
