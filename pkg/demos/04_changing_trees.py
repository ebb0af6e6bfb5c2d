"""Two trees, one Cartesian basis.

Different trees give different hyperspherical bases at the same energy.
Going through the Cartesian basis, W1^T W2 converts one into the other and
is itself orthogonal.
"""
import numpy as np

from polyosc import ModelParams, parse_tree, transition_matrix
from polyosc.transition import orthogonality_defect

np.set_printoptions(precision=4, suppress=True)

params = ModelParams(k=(0.7, 1.3, 0.45, 2.1), signs=(1, 1, -1, 1), omega=0.8)
balanced = parse_tree("((x1 x2) (x3 x4))")
chain = parse_tree("(x1 (x2 (x3 x4)))")

N = 2
W1 = transition_matrix(balanced, params, N).values
W2 = transition_matrix(chain, params, N).values
R = W1.T @ W2
print(f"{R.shape[0]} states at N = {N}")
print("balanced -> chain overlap matrix:")
print(R)
print(f"orthogonality defect of the overlap: {orthogonality_defect(R):.1e}")
