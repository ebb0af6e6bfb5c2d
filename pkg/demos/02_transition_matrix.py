"""Transition matrix in two dimensions, checked three ways.

The closed form multiplies one continued Clebsch-Gordan coefficient per
cell. The oracle gets the same numbers from one-dimensional overlap
integrals. Finally both bases are evaluated at a point and the expansion is
summed by hand.
"""
import numpy as np

from polyosc import ModelParams, oracle_matrix, parse_tree, transition_matrix
from polyosc.transition import basis_values_at, orthogonality_defect

np.set_printoptions(precision=6, suppress=True)

tree = parse_tree("(x1 x2)")
params = ModelParams(k=(0.3, 0.4), signs=(1, -1), omega=1.0)

for N in range(4):
    W = transition_matrix(tree, params, N)
    O = oracle_matrix(tree, params, N)
    print(f"N = {N}: rows {[c.n for c in W.rows]}, cols {[(h.n_r, h.q) for h in W.cols]}")
    print(W.values)
    print(f"  |W - oracle| = {np.abs(W.values - O.values).max():.1e},  |W W^T - I| = {orthogonality_defect(W):.1e}")

W = transition_matrix(tree, params, 3)
cart, hyper = basis_values_at(W, (1.3, [0.7]))
print("\nCartesian values at r = 1.3, theta = 0.7:", cart)
print("W @ hyperspherical values:              ", W.values @ hyper)
