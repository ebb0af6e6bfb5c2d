"""Binary trees describing polyspherical coordinate systems.

A tree with ``D`` leaves ``x1 .. xD`` and ``D - 1`` internal nodes fixes a
parametrisation of the positive orthant of the unit sphere: every internal
node carries one angle, a step down to a left child contributes ``cos`` of
that angle and a step to a right child contributes ``sin``.

Textual form::

    tree := leaf | "(" tree tree ")"
    leaf := "x" integer

Whitespace is ignored. Internal nodes receive angle indices ``1 .. D-1`` in
depth-first pre-order, so ``"((x1 (x2 x3)) ((x4 x5) x6))"`` gives
``x4 = sin(t1)*cos(t4)*cos(t5)``.
"""
from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Node",
    "Tree",
    "CellType",
    "TreeSyntaxError",
    "parse_tree",
    "render_tree",
    "tree_from_json",
    "tree_to_json",
    "cell_type",
    "coordinate_map",
    "format_coordinate_map",
    "angles_to_unit_vector",
    "all_tree_shapes",
    "random_tree",
]


class TreeSyntaxError(ValueError):
    """Malformed tree text. ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str = "", position: int | None = None):
        super().__init__(message)
        self.message = message
        self.text = text
        self.position = position

    def diagnostic(self) -> str:
        if self.position is None:
            return self.message
        return f"{self.message}\n  {self.text}\n  {' ' * self.position}^"

    def __str__(self) -> str:
        if self.position is None:
            return self.message
        return f"{self.message} (at offset {self.position})"


class CellType(str, enum.Enum):
    """Cell kinds by which children are leaves."""

    LEAF_LEAF = "a"
    LEAF_SUBTREE = "b"
    SUBTREE_LEAF = "c"
    SUBTREE_SUBTREE = "d"


@dataclass(frozen=True)
class Node:
    index: int
    leaf: int | None = None  # coordinate label for leaves
    left: int | None = None
    right: int | None = None
    parent: int | None = None
    angle: int | None = None  # 1-based, internal nodes only
    v: int = 0  # internal nodes in the subtree

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None


@dataclass(frozen=True)
class Tree:
    """Immutable binary tree; ``nodes`` are stored in pre-order, root first."""

    nodes: tuple[Node, ...]

    @property
    def root(self) -> Node:
        return self.nodes[0]

    @cached_property
    def D(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    @cached_property
    def leaf_order(self) -> tuple[int, ...]:
        return tuple(n.leaf for n in self.nodes if n.is_leaf)

    @cached_property
    def internal(self) -> tuple[Node, ...]:
        """Internal nodes ordered by angle index."""
        return tuple(n for n in self.nodes if not n.is_leaf)

    @cached_property
    def _leaf_index(self) -> dict[int, int]:
        return {n.leaf: n.index for n in self.nodes if n.is_leaf}

    def leaf_node(self, label: int) -> Node:
        return self.nodes[self._leaf_index[label]]

    def angle_node(self, angle: int) -> Node:
        return self.internal[angle - 1]

    def children(self, node: Node | int) -> tuple[Node, Node]:
        node = self._node(node)
        if node.is_leaf:
            raise ValueError(f"node {node.index} is a leaf")
        return self.nodes[node.left], self.nodes[node.right]

    def leaves_under(self, node: Node | int) -> tuple[int, ...]:
        node = self._node(node)
        return self._leaves_under[node.index]

    @cached_property
    def _leaves_under(self) -> tuple[tuple[int, ...], ...]:
        out: list[tuple[int, ...]] = [()] * len(self.nodes)
        for node in reversed(self.nodes):
            if node.is_leaf:
                out[node.index] = (node.leaf,)
            else:
                out[node.index] = out[node.left] + out[node.right]
        return tuple(out)

    def postorder(self) -> Iterator[Node]:
        """Children before parents (reverse pre-order is enough for that)."""
        return reversed(self.nodes)

    def _node(self, node: Node | int) -> Node:
        return self.nodes[node] if isinstance(node, int) else node

    def __str__(self) -> str:
        return render_tree(self)


# --- construction ---------------------------------------------------------


def _build(nested) -> Tree:
    """Tree from nested ``(left, right)`` pairs with integer leaves."""
    nodes: list[dict] = []
    counter = itertools.count(1)

    def visit(obj, parent):
        idx = len(nodes)
        rec = {"index": idx, "parent": parent}
        nodes.append(rec)
        if isinstance(obj, int):
            rec["leaf"] = obj
            rec["v"] = 0
            return 0
        left, right = obj
        rec["angle"] = next(counter)
        rec["left"] = len(nodes)
        v_left = visit(left, idx)
        rec["right"] = len(nodes)
        v_right = visit(right, idx)
        rec["v"] = v_left + v_right + 1
        return rec["v"]

    visit(nested, None)
    tree = Tree(tuple(Node(**rec) for rec in nodes))
    labels = sorted(tree.leaf_order)
    if labels != list(range(1, tree.D + 1)):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        missing = sorted(set(range(1, tree.D + 1)) - set(labels))
        raise TreeSyntaxError(
            f"leaf labels must be x1..x{tree.D} each exactly once "
            f"(duplicates: {dupes or 'none'}, missing: {missing or 'none'})"
        )
    return tree


def _nested(tree: Tree, node: Node | None = None):
    node = tree.root if node is None else node
    if node.is_leaf:
        return node.leaf
    left, right = tree.children(node)
    return (_nested(tree, left), _nested(tree, right))


_TOKEN = re.compile(r"\s*(?:(?P<open>\()|(?P<close>\))|(?P<leaf>x\d+)|(?P<bad>\S))")


def parse_tree(text: str) -> Tree:
    """Parse the parenthesised tree notation.

    >>> parse_tree("(x1 (x2 x3))").D
    3
    """
    tokens: list[tuple[str, object, int]] = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastgroup)
        if m.lastgroup == "bad":
            raise TreeSyntaxError(f"unexpected character {m.group('bad')!r}", text, start)
        value = int(m.group("leaf")[1:]) if m.lastgroup == "leaf" else None
        tokens.append((m.lastgroup, value, start))
        pos = m.end()
    if not tokens:
        raise TreeSyntaxError("empty tree", text, len(text))
    end = len(text)
    i = 0

    def expect_tree():
        nonlocal i
        if i >= len(tokens):
            raise TreeSyntaxError("expected a leaf or '(' but reached end of input", text, end)
        kind, value, where = tokens[i]
        if kind == "leaf":
            i += 1
            if value < 1:
                raise TreeSyntaxError("leaf labels start at x1", text, where)
            return value
        if kind != "open":
            raise TreeSyntaxError("expected a leaf or '('", text, where)
        i += 1
        left = expect_tree()
        right = expect_tree()
        if i >= len(tokens):
            raise TreeSyntaxError("expected ')' but reached end of input", text, end)
        kind, _, where = tokens[i]
        if kind != "close":
            raise TreeSyntaxError("expected ')': nodes are binary", text, where)
        i += 1
        return (left, right)

    nested = expect_tree()
    if isinstance(nested, int):
        raise TreeSyntaxError("a tree needs at least two leaves", text, 0)
    if i != len(tokens):
        raise TreeSyntaxError("trailing input after tree", text, tokens[i][2])
    return _build(nested)


def render_tree(tree: Tree) -> str:
    def fmt(obj):
        if isinstance(obj, int):
            return f"x{obj}"
        return f"({fmt(obj[0])} {fmt(obj[1])})"

    return fmt(_nested(tree))


def tree_to_json(tree: Tree) -> dict:
    def conv(obj):
        if isinstance(obj, int):
            return {"leaf": obj}
        return {"left": conv(obj[0]), "right": conv(obj[1])}

    return conv(_nested(tree))


def tree_from_json(obj: dict) -> Tree:
    def conv(o):
        if not isinstance(o, dict):
            raise TreeSyntaxError(f"tree JSON nodes must be objects, got {type(o).__name__}")
        if set(o) == {"leaf"}:
            if not isinstance(o["leaf"], int) or isinstance(o["leaf"], bool):
                raise TreeSyntaxError("leaf label must be an integer")
            return o["leaf"]
        if set(o) == {"left", "right"}:
            return (conv(o["left"]), conv(o["right"]))
        raise TreeSyntaxError(f"tree JSON node has keys {sorted(o)}")

    nested = conv(obj)
    if isinstance(nested, int):
        raise TreeSyntaxError("a tree needs at least two leaves")
    return _build(nested)


# --- queries --------------------------------------------------------------


def cell_type(tree: Tree, node: Node | int) -> CellType:
    left, right = tree.children(node)
    if left.is_leaf and right.is_leaf:
        return CellType.LEAF_LEAF
    if left.is_leaf:
        return CellType.LEAF_SUBTREE
    if right.is_leaf:
        return CellType.SUBTREE_LEAF
    return CellType.SUBTREE_SUBTREE


def coordinate_map(tree: Tree) -> dict[int, tuple[tuple[int, str], ...]]:
    """For each leaf label, the ``(angle, 'cos' | 'sin')`` factors from root to leaf."""
    out = {}
    for label in range(1, tree.D + 1):
        factors = []
        node = tree.leaf_node(label)
        while node.parent is not None:
            parent = tree.nodes[node.parent]
            factors.append((parent.angle, "cos" if parent.left == node.index else "sin"))
            node = parent
        out[label] = tuple(reversed(factors))
    return out


def format_coordinate_map(tree: Tree, style: str = "plain") -> list[str]:
    """One line per leaf, ``x1 = cos(t1)*cos(t2)``; ``style='latex'`` gives
    ``{\\tilde x_1} = \\cos\\theta_1\\cos\\theta_2``."""
    lines = []
    for label, factors in coordinate_map(tree).items():
        if style == "plain":
            rhs = "*".join(f"{fn}(t{j})" for j, fn in factors)
            lines.append(f"x{label} = {rhs}")
        elif style == "latex":
            rhs = "".join(f"\\{fn}\\theta_{j}" for j, fn in factors)
            lines.append(f"{{\\tilde x_{label}}} = {rhs}")
        else:
            raise ValueError(f"unknown style {style!r}")
    return lines


def unit_vector_unchecked(tree: Tree, theta: Sequence) -> list:
    """Components of the unit vector; ``theta`` entries may be numpy arrays."""
    cos = [np.cos(t) for t in theta]
    sin = [np.sin(t) for t in theta]
    comps = []
    for label, factors in coordinate_map(tree).items():
        value = 1.0
        for j, fn in factors:
            value = value * (cos[j - 1] if fn == "cos" else sin[j - 1])
        comps.append(value)
    return comps


def angles_to_unit_vector(tree: Tree, theta: Sequence[float]) -> np.ndarray:
    """Map ``D - 1`` angles in ``[0, pi/2]`` to ``(x~_1, ..., x~_D)``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (tree.D - 1,):
        raise ValueError(f"expected {tree.D - 1} angles, got shape {theta.shape}")
    if np.any(theta < 0) or np.any(theta > math.pi / 2):
        raise ValueError("angles must lie in [0, pi/2]")
    return np.array(unit_vector_unchecked(tree, theta))


# --- generators -----------------------------------------------------------


def _shapes(labels: tuple[int, ...]):
    if len(labels) == 1:
        yield labels[0]
        return
    for split in range(1, len(labels)):
        for left in _shapes(labels[:split]):
            for right in _shapes(labels[split:]):
                yield (left, right)


def all_tree_shapes(D: int) -> list[Tree]:
    """Every binary tree shape with leaves ``x1 .. xD`` in order (Catalan many)."""
    if D < 2:
        raise ValueError("D must be at least 2")
    return [_build(n) for n in _shapes(tuple(range(1, D + 1)))]


def random_tree(D: int, rng: np.random.Generator, permute: bool = True) -> Tree:
    """Random binary tree over ``D`` leaves by recursive random splitting."""
    if D < 2:
        raise ValueError("D must be at least 2")
    labels = list(range(1, D + 1))
    if permute:
        labels = [int(x) for x in rng.permutation(labels)]

    def grow(ls):
        if len(ls) == 1:
            return ls[0]
        split = int(rng.integers(1, len(ls)))
        return (grow(ls[:split]), grow(ls[split:]))

    return _build(grow(labels))
