"""Strengths k = 1/2 on every axis.

With k = 1/2 and the + branch each axis behaves like the odd states of an
ordinary oscillator. In two dimensions the transition matrix is then a slice
of a Wigner rotation matrix at a right angle:

    W[n, q] = (-1)^n1 sqrt(2) d^(N+1)_{n1-n2, q+1}(pi/2).
"""
import math

from polyosc import ModelParams, parse_tree, transition_matrix


def small_d(j, m1, m2, beta):
    f = math.factorial
    pre = math.sqrt(f(j + m1) * f(j - m1) * f(j + m2) * f(j - m2))
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    total = 0.0
    for k in range(max(0, m2 - m1), min(j + m2, j - m1) + 1):
        total += (-1) ** (m1 - m2 + k) / (f(j + m2 - k) * f(k) * f(m1 - m2 + k) * f(j - m1 - k)) \
            * c ** (2 * j + m2 - m1 - 2 * k) * s ** (m1 - m2 + 2 * k)
    return pre * total


tree = parse_tree("(x1 x2)")
params = ModelParams(k=(0.5, 0.5))
for N in range(5):
    W = transition_matrix(tree, params, N)
    worst = 0.0
    for i, c in enumerate(W.rows):
        for j, h in enumerate(W.cols):
            ref = (-1) ** c.n[0] * math.sqrt(2) * small_d(N + 1, c.n[0] - c.n[1], h.q[0] + 1, math.pi / 2)
            worst = max(worst, abs(ref - W.values[i, j]))
    print(f"N = {N}: {len(W.rows)}x{len(W.cols)} matrix, max deviation from the rotation matrix {worst:.1e}")
