"""Coordinate trees.

A binary tree over the labels x1..xD fixes a set of angles on the positive
orthant of the unit sphere: every internal node owns one angle, a left edge
contributes its cosine and a right edge its sine. Angles are numbered in
depth-first pre-order.
"""
import math

import numpy as np

from polyosc.tree import all_tree_shapes, angles_to_unit_vector, cell_type, format_coordinate_map, parse_tree

tree = parse_tree("((x1 (x2 x3)) ((x4 x5) x6))")
print(f"tree {tree}: D = {tree.D}, root v = {tree.root.v}")
for line in format_coordinate_map(tree):
    print("  " + line)

print("\ncell types by angle:")
for node in tree.internal:
    print(f"  t{node.angle}: {cell_type(tree, node).value}  (leaves below: {tree.leaves_under(node)})")

theta = [math.pi / 3, math.pi / 4, math.pi / 6, math.pi / 3, math.pi / 4]
x = angles_to_unit_vector(tree, theta)
print("\nunit vector at", np.round(theta, 4), "->", np.round(x, 6), " |x|^2 =", float(x @ x))

print("\nnumber of tree shapes per dimension:", [len(all_tree_shapes(D)) for D in range(2, 8)])
