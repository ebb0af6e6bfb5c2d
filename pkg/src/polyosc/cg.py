"""SU(2) Clebsch-Gordan coefficients continued to real arguments.

The coefficient ``C^{c gamma}_{a alpha; b beta}`` is evaluated from Racah's
single-sum formula with every factorial ``x!`` replaced by ``Gamma(x + 1)``.
The continuation stays a terminating sum as long as ``a - alpha``,
``b - beta``, ``c - gamma`` and ``a + b - c`` are integers, which is exactly
the structure produced by tree cells. Everything is accumulated as
logarithms with separate signs and exponentiated once per term.

The second half of the module is the quadrature route: the overlap of a cell
function with ``cos^N_s sin^N_r`` and the normalising constant ``K`` that
turns it into a coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special import (
    DEFAULT_TOL,
    PoleError,
    SignedLogGamma,
    integrate,
    is_pole,
    jacobi,
    jacobi_norm_constant,
    log_gamma_ratio,
    log_gamma_signed,
)

__all__ = [
    "CGArgs",
    "CGArgsError",
    "INTEGER_TOL",
    "cg_continued",
    "cg_terms",
    "cell_integral",
    "cell_constant",
    "cg_from_integral",
]

INTEGER_TOL = 1e-9


class CGArgsError(ValueError):
    """Arguments lack the integer structure the continued formula needs."""


@dataclass(frozen=True)
class CGArgs:
    a: float
    alpha: float
    b: float
    beta: float
    c: float
    gamma: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.a, self.alpha, self.b, self.beta, self.c, self.gamma)

    def integer_parts(self) -> tuple[int, int, int, int]:
        """``(a - alpha, b - beta, c - gamma, a + b - c)`` rounded to integers.

        Raises :class:`CGArgsError` if any is further than ``INTEGER_TOL``
        from an integer.
        """
        diffs = {
            "a - alpha": self.a - self.alpha,
            "b - beta": self.b - self.beta,
            "c - gamma": self.c - self.gamma,
            "a + b - c": self.a + self.b - self.c,
        }
        out = []
        for name, value in diffs.items():
            nearest = round(value)
            if abs(value - nearest) > INTEGER_TOL:
                raise CGArgsError(f"{name} = {value!r} is not an integer")
            out.append(int(nearest))
        return tuple(out)

    def selection_ok(self) -> bool:
        if abs(self.alpha + self.beta - self.gamma) > INTEGER_TOL:
            return False
        return all(m >= 0 for m in self.integer_parts())


def _prefactor(args: CGArgs, m: tuple[int, int, int, int]) -> SignedLogGamma:
    a, al, b, be, c, ga = args.as_tuple()
    m_a, m_b, m_c, m_abc = m
    numer = [m_abc + 1, a - b + c + 1, -a + b + c + 1, a + al + 1, m_a + 1, b + be + 1, m_b + 1, m_c + 1]
    if m_c == 0:
        # c = gamma: (2c + 1) Gamma(c + gamma + 1) = Gamma(2c + 2), finite at 2c + 1 = 0
        numer.append(2 * c + 2)
        log_2c1 = 0.0
    else:
        if not 2 * c + 1 > 0:
            raise CGArgsError(f"2c + 1 = {2 * c + 1!r} must be positive")
        numer.append(c + ga + 1)
        log_2c1 = math.log(2 * c + 1)
    try:
        g = log_gamma_ratio(numer, [a + b + c + 2])
    except PoleError as exc:
        raise CGArgsError(f"prefactor diverges for {args}: {exc}") from None
    if g.sign < 0:
        raise CGArgsError(f"negative product under the square root for {args}")
    return SignedLogGamma(0.5 * (log_2c1 + g.log_abs), 1)


def cg_terms(args: CGArgs) -> tuple[SignedLogGamma, list[tuple[int, SignedLogGamma]]]:
    """Log prefactor and the surviving ``(z, log|term|, sign)`` of the Racah sum.

    Terms with a Gamma pole in the denominator are exact zeros and are left
    out.
    """
    m = args.integer_parts()
    m_a, _, m_c, m_abc = m
    pre = _prefactor(args, m)
    # b + beta - z and c - b + alpha + z are real; the other four are integers
    b_plus = args.b + args.beta
    shift = args.c - args.b + args.alpha
    z_lo = max(0, m_a - m_c)
    z_hi = min(m_abc, m_a)
    terms = []
    for z in range(z_lo, z_hi + 1):
        if is_pole(b_plus - z + 1) or is_pole(shift + z + 1):
            continue
        g1 = log_gamma_signed(b_plus - z + 1)
        g2 = log_gamma_signed(shift + z + 1)
        log_den = (
            math.lgamma(z + 1)
            + math.lgamma(m_abc - z + 1)
            + math.lgamma(m_a - z + 1)
            + math.lgamma(m_c - m_a + z + 1)
            + g1.log_abs
            + g2.log_abs
        )
        sign = (-1 if z % 2 else 1) * g1.sign * g2.sign
        terms.append((z, SignedLogGamma(-log_den, sign)))
    return pre, terms


def cg_continued(args: CGArgs) -> float:
    """Continued Clebsch-Gordan coefficient.

    Returns exactly ``0.0`` when ``gamma != alpha + beta``, when one of the
    integer differences is negative, or when a projection or triangle
    combination (``a + alpha``, ``a - b + c``, ...) is a negative integer,
    i.e. the projection lies outside the multiplet as in ordinary SU(2).
    """
    if abs(args.alpha + args.beta - args.gamma) > INTEGER_TOL:
        return 0.0
    if any(x < 0 for x in args.integer_parts()):
        return 0.0
    a, al, b, be, c, ga = args.as_tuple()
    # with c = gamma the c + gamma factor merges with 2c + 1 (see _prefactor)
    top = 2 * c + 1 if abs(c - ga) < INTEGER_TOL else c + ga
    if any(is_pole(x + 1) for x in (a + al, b + be, top, a - b + c, -a + b + c)):
        return 0.0
    pre, terms = cg_terms(args)
    if not terms:
        return 0.0
    top = max(t.log_abs for _, t in terms)
    total = math.fsum(t.sign * math.exp(t.log_abs - top) for _, t in terms)
    return total * math.exp(pre.log_abs + top)


# --- integral representation ----------------------------------------------


@lru_cache(maxsize=65536)
def cell_integral(
    l_s: float, v_s: int, N_s: float, l_r: float, v_r: int, N_r: float, q: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """``int_0^{pi/2} cos^N_s sin^N_r f(theta) cos^v_s sin^v_r dtheta`` for the
    unit-normalised cell function ``f`` with momenta ``l_s, l_r`` and
    ``2q = l - l_s - l_r``."""
    a_s = l_s + 0.5 * (v_s - 1)
    a_r = l_r + 0.5 * (v_r - 1)
    norm = jacobi_norm_constant(q, a_s, a_r)
    p_cos = N_s + v_s + l_s
    p_sin = N_r + v_r + l_r

    def integrand(t, t_lo, t_hi):
        c = np.sin(t_hi)
        s = np.sin(t_lo)
        return c**p_cos * s**p_sin * jacobi(q, a_r, a_s, c * c - s * s)

    return norm * integrate(integrand, 0.0, math.pi / 2, tol, with_distances=True)


def cell_constant(l_s: float, v_s: int, N_s: float, l_r: float, v_r: int, N_r: float, q: int) -> SignedLogGamma:
    """Log of the constant ``K`` linking a cell integral to its coefficient."""
    l = 2 * q + l_s + l_r
    g = log_gamma_ratio(
        [
            0.5 * (N_s - l_s) + 1,
            0.5 * (N_s + l_s) + 0.5 * (v_s + 1),
            0.5 * (N_r - l_r) + 1,
            0.5 * (N_r + l_r) + 0.5 * (v_r + 1),
        ],
        [0.5 * (N_r + N_s + l) + 0.5 * (v_r + v_s) + 1, 0.5 * (N_s + N_r - l) + 1],
    )
    return SignedLogGamma(0.5 * g.log_abs, g.sign)


def cg_from_integral(
    l_s: float, v_s: int, N_s: float, l_r: float, v_r: int, N_r: float, q: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """Coefficient recovered from the cell overlap by quadrature:
    ``C = sqrt(2) (-1)^(q + (l - l_s - N_r)/2) F / K``."""
    l = 2 * q + l_s + l_r
    phase = 0.5 * (l - l_s - N_r)
    p = round(phase)
    if abs(phase - p) > INTEGER_TOL:
        raise CGArgsError(f"(l - l_s - N_r)/2 = {phase!r} is not an integer")
    F = cell_integral(l_s, v_s, N_s, l_r, v_r, N_r, q, tol)
    K = cell_constant(l_s, v_s, N_s, l_r, v_r, N_r, q)
    if K.sign < 0:
        raise CGArgsError("cell constant is not real for these arguments")
    sign = -1 if (q + p) % 2 else 1
    return sign * math.sqrt(2.0) * F * math.exp(-K.log_abs)
