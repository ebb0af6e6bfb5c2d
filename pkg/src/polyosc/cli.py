"""Command-line front end.

    polyosc tree   --tree "((x1 x2) x3)"
    polyosc states --tree "((x1 x2) x3)" --N 2
    polyosc matrix --tree "(x1 x2)" --k 0.3,0.4 --signs +,- --N 1 --format json
    polyosc verify --tree "(x1 x2)" --N 2 --seed 1
    polyosc eval   --tree "(x1 x2)" --k 0.5,0.5 --basis cartesian --state 0,0 --point 1,1
    polyosc cg     0.5 0.5 0.5 -0.5 1 0

Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
failure. ``$POLYOSC_THREADS`` sets the number of worker threads used while
assembling matrices.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .bases import (
    CartesianState,
    HypersphericalState,
    ModelParams,
    cartesian_wavefunction,
    enumerate_cartesian,
    enumerate_hyperspherical,
    hyperspherical_wavefunction,
    node_momenta,
    radial_function,
    angular_function,
)
from .cg import CGArgs, CGArgsError, cg_continued
from .matrix_io import dump_matrix, format_number, format_signs, parse_signs
from .special import ConvergenceError
from .transition import (
    admissible,
    k_telescoping_check,
    oracle_matrix,
    transition_matrix,
    basis_values_at,
)
from .tree import Tree, TreeSyntaxError, format_coordinate_map, parse_tree

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

K_RANGE = (0.2, 2.5)


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tree: Tree
    params: ModelParams
    N: int
    tol: float
    format: str
    seed: int
    out: str | None


def read_tree(arg: str) -> Tree:
    """``arg`` is DSL text, or the path of a file holding it."""
    text = arg
    if not arg.lstrip().startswith("(") and os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    return parse_tree(text)


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{what}: expected a comma separated list of numbers, got {text!r}") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{what}: expected a comma separated list of integers, got {text!r}") from None


def default_strengths(D: int, seed: int) -> list[float]:
    rng = np.random.default_rng(seed)
    return [float(x) for x in rng.uniform(*K_RANGE, size=D)]


def load_config(args) -> RunConfig:
    tree = read_tree(args.tree)
    D = tree.D
    k = _floats(args.k, "--k") if args.k else default_strengths(D, args.seed)
    if len(k) != D:
        raise InputError(f"--k has {len(k)} entries but the tree has {D} leaves")
    try:
        signs = parse_signs(args.signs) if args.signs else None
    except ValueError as exc:
        raise InputError(f"--signs: {exc}") from None
    if signs is not None and len(signs) != D:
        raise InputError(f"--signs has {len(signs)} entries but the tree has {D} leaves")
    try:
        params = ModelParams(k=tuple(k), signs=signs, omega=args.omega)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    N = getattr(args, "N", 0)
    if N < 0:
        raise InputError("--N must be nonnegative")
    if not args.tol > 0:
        raise InputError("--tol must be positive")
    return RunConfig(tree, params, N, args.tol, getattr(args, "format", "csv"), args.seed, getattr(args, "out", None))


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ------------------------------------------------------------


def cmd_tree(args) -> int:
    tree = read_tree(args.tree)
    lines = format_coordinate_map(tree, style=args.style)
    if args.oneline:
        print("; ".join(lines))
    else:
        print("\n".join(lines))
    return EXIT_OK


def cmd_states(args) -> int:
    tree = read_tree(args.tree)
    if args.N < 0:
        raise InputError("--N must be nonnegative")
    cart = enumerate_cartesian(tree.D, args.N)
    hyper = enumerate_hyperspherical(tree, args.N)
    print(f"# {len(cart)} states at N={args.N}")
    print("cartesian: " + " ".join("(" + ",".join(map(str, s.n)) + ")" for s in cart))
    print("hyperspherical: " + " ".join(f"({s.n_r};" + ",".join(map(str, s.q)) + ")" for s in hyper))
    return EXIT_OK


def cmd_matrix(args) -> int:
    cfg = load_config(args)
    W = transition_matrix(cfg.tree, cfg.params, cfg.N)
    _emit(dump_matrix(W, cfg.format), cfg.out)
    return EXIT_OK


def _random_point(tree: Tree, omega: float, rng) -> tuple[float, list[float]]:
    r = float(rng.uniform(0.3, 2.5) / math.sqrt(omega))
    theta = [float(t) for t in rng.uniform(0.05, math.pi / 2 - 0.05, size=tree.D - 1)]
    return r, theta


def run_checks(cfg: RunConfig, n_points: int = 20) -> list[dict]:
    """Run the four matrix checks; each result has ``name``, ``value``,
    ``ok`` and a ``where`` string naming the worst state pair."""
    tree, params, N, tol = cfg.tree, cfg.params, cfg.N, cfg.tol
    W = transition_matrix(tree, params, N)
    A = W.values
    report = []

    eye = np.eye(len(W.rows))
    dev = np.abs(A @ A.T - eye)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    dev2 = np.abs(A.T @ A - eye)
    value = float(max(dev.max(), dev2.max()))
    report.append(dict(name="orthogonality", value=value, ok=value <= tol,
                       where=f"rows {W.rows[i].n} / {W.rows[j].n}"))

    O = oracle_matrix(tree, params, N).values
    dev = np.abs(A - O)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    value = float(dev.max())
    report.append(dict(name="oracle", value=value, ok=value <= tol,
                       where=f"{W.rows[i].n} x {W.cols[j].to_json()}"))

    worst, where = 0.0, "-"
    for c in W.rows:
        for h in W.cols:
            if not admissible(tree, params, c, h):
                continue
            lhs, rhs = k_telescoping_check(tree, params, c, h)
            rel = abs(lhs - rhs) / abs(rhs)
            if rel >= worst:
                worst, where = rel, f"{c.n} x {h.to_json()}"
    report.append(dict(name="telescoping", value=worst, ok=worst <= tol, where=where))

    rng = np.random.default_rng(cfg.seed)
    worst, where = 0.0, "-"
    labels = [str(c.n) for c in W.rows] + [str(h.to_json()) for h in W.cols]
    for _ in range(n_points):
        point = _random_point(tree, params.omega, rng)
        cart, hyper = basis_values_at(W, point)
        lhs = np.concatenate([cart, hyper])
        rhs = np.concatenate([A @ hyper, A.T @ cart])
        scale = max(np.abs(cart).max(), np.abs(hyper).max())
        dev = np.abs(lhs - rhs) / scale if scale > 0 else np.abs(lhs - rhs)
        idx = int(np.argmax(dev))
        if dev[idx] >= worst:
            worst = float(dev[idx])
            where = f"{labels[idx]} at r={point[0]:.6g}, theta={[round(t, 6) for t in point[1]]}"
    report.append(dict(name="pointwise", value=worst, ok=worst <= tol, where=where))
    return report


def cmd_verify(args) -> int:
    cfg = load_config(args)
    report = run_checks(cfg, args.points)
    print(f"# tree={cfg.tree} k={','.join(format_number(x) for x in cfg.params.k)} "
          f"signs={format_signs(cfg.params.signs)} N={cfg.N} tol={cfg.tol:g}")
    failed = False
    for item in report:
        status = "ok" if item["ok"] else "FAIL"
        line = f"{item['name']:<14s} {item['value']:.3e}  {status}"
        if not item["ok"]:
            line += f"  worst: {item['where']}"
            failed = True
        print(line)
    return EXIT_VERIFY if failed else EXIT_OK


def _parse_hyper_state(text: str, D: int) -> HypersphericalState:
    head, sep, tail = text.partition(";")
    if not sep:
        raise InputError("hyperspherical --state is 'n_r;q1,q2,...'")
    q = _ints(tail, "--state")
    if len(q) != D - 1:
        raise InputError(f"--state needs {D - 1} q values, got {len(q)}")
    try:
        return HypersphericalState(_ints(head, "--state")[0], tuple(q))
    except (ValueError, IndexError) as exc:
        raise InputError(f"--state: {exc}") from None


def cmd_eval(args) -> int:
    cfg = load_config(args)
    tree, params = cfg.tree, cfg.params
    if args.basis == "cartesian":
        n = _ints(args.state, "--state")
        x = _floats(args.point, "--point")
        if len(n) != tree.D or len(x) != tree.D:
            raise InputError(f"--state and --point need {tree.D} entries")
        if any(xi <= 0 for xi in x):
            raise InputError("Cartesian point must lie in the open positive orthant")
        try:
            state = CartesianState(tuple(n))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        print(format_number(cartesian_wavefunction(params, state, x)))
        return EXIT_OK
    state = _parse_hyper_state(args.state, tree.D)
    head, sep, tail = args.point.partition(";")
    if not sep:
        raise InputError("hyperspherical --point is 'r;theta1,theta2,...'")
    r = _floats(head, "--point")
    theta = _floats(tail, "--point")
    if len(r) != 1 or len(theta) != tree.D - 1:
        raise InputError(f"--point needs r and {tree.D - 1} angles")
    r = r[0]
    if r < 0:
        raise InputError("r must be nonnegative")
    if any(not 0 <= t <= math.pi / 2 for t in theta):
        raise InputError("angles must lie in [0, pi/2] for the positive orthant")
    l = node_momenta(tree, params, state)
    R = radial_function(params, l.root, state.n_r, r)
    Y = angular_function(tree, params, state, theta)
    print(format_number(hyperspherical_wavefunction(tree, params, state, r, theta)))
    print(f"# R={format_number(R)} Y={format_number(Y)}")
    for node in tree.nodes:
        label = f"x{node.leaf}" if node.is_leaf else f"t{node.angle}"
        print(f"# l[{label}]={format_number(l.l[node.index])}")
    return EXIT_OK


def cmd_cg(args) -> int:
    cg_args = CGArgs(*args.values)
    try:
        parts = cg_args.integer_parts()
        value = cg_continued(cg_args)
    except CGArgsError as exc:
        raise InputError(str(exc)) from None
    print(format_number(value))
    names = ("a - alpha", "b - beta", "c - gamma", "a + b - c")
    print("# " + " ".join(f"{n}={v}" for n, v in zip(names, parts)))
    print(f"# gamma - alpha - beta={format_number(cg_args.gamma - cg_args.alpha - cg_args.beta)}")
    return EXIT_OK


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyosc",
        description="Cartesian/hyperspherical transition matrices for the singular oscillator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def model_flags(p, with_N=True):
        p.add_argument("--tree", required=True, help="tree DSL, e.g. '((x1 x2) x3)', or a file holding it")
        p.add_argument("--k", help="comma separated strengths (default: random in (0.2, 2.5) from --seed)")
        p.add_argument("--signs", help="comma separated branch signs, e.g. --signs=-,+,+ (default all +)")
        p.add_argument("--omega", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-8)
        if with_N:
            p.add_argument("--N", type=int, default=0)

    p = sub.add_parser("tree", help="print the coordinate map of a tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--style", choices=["plain", "latex"], default="plain")
    p.add_argument("--oneline", action="store_true", help="join the lines with '; '")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("states", help="list the Cartesian and hyperspherical states at N")
    p.add_argument("--tree", required=True)
    p.add_argument("--N", type=int, default=0)
    p.set_defaults(func=cmd_states)

    p = sub.add_parser("matrix", help="emit the transition matrix")
    model_flags(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("verify", help="check orthogonality, oracle agreement, telescoping and pointwise expansion")
    model_flags(p)
    p.add_argument("--points", type=int, default=20, help="random points for the pointwise check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="evaluate a basis function at a point")
    model_flags(p, with_N=False)
    p.add_argument("--basis", choices=["cartesian", "hyper"], required=True)
    p.add_argument("--state", required=True, help="cartesian 'n1,n2,...' or hyper 'n_r;q1,q2,...'")
    p.add_argument("--point", required=True, help="cartesian 'x1,x2,...' or hyper 'r;theta1,...'")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cg", help="continued Clebsch-Gordan coefficient (debugging aid)")
    p.add_argument("values", type=float, nargs=6, metavar=("a", "alpha", "b", "beta", "c", "gamma"))
    p.set_defaults(func=cmd_cg)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConvergenceError, ArithmeticError, CGArgsError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TreeSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.position is not None:
            print(exc.diagnostic().split("\n", 1)[1], file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
