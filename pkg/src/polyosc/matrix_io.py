"""Reading and writing transition matrices as CSV and JSON.

CSV layout::

    # polyosc transition matrix
    # tree=((x1 x2) x3)
    # k=0.3,0.7,1.2
    # signs=-,+,+
    # N=1
    # omega=1
    n \\ (n_r; q),"(1; 0, 0)","(0; 1, 0)","(0; 0, 1)"
    "(1, 0, 0)",0.57735026918962573,...

Every number is written with 17 significant digits so both formats
round-trip bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import re

import jsonschema
import numpy as np

from .bases import CartesianState, HypersphericalState, ModelParams
from .transition import TransitionMatrix
from .tree import parse_tree, render_tree

__all__ = [
    "MATRIX_SCHEMA",
    "MatrixFormatError",
    "format_number",
    "format_signs",
    "parse_signs",
    "matrix_to_json",
    "matrix_from_json",
    "matrix_to_csv",
    "matrix_from_csv",
    "dump_matrix",
    "load_matrix",
]

FORMAT_TAG = "polyosc-transition-matrix"

MATRIX_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "tree", "k", "signs", "N", "omega", "rows", "cols", "values"],
    "properties": {
        "format": {"const": FORMAT_TAG},
        "tree": {"type": "string"},
        "k": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
        "signs": {"type": "array", "items": {"enum": ["+", "-"]}, "minItems": 2},
        "N": {"type": "integer", "minimum": 0},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "rows": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
        "cols": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n_r", "q"],
                "additionalProperties": False,
                "properties": {
                    "n_r": {"type": "integer", "minimum": 0},
                    "q": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                },
            },
        },
        "values": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}


class MatrixFormatError(ValueError):
    """Malformed or inconsistent matrix file."""


def format_number(x: float) -> str:
    return "%.17g" % x


def format_signs(signs) -> str:
    return ",".join("+" if s > 0 else "-" for s in signs)


def parse_signs(text) -> tuple[int, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out = []
    for s in items:
        s = s.strip()
        if s not in ("+", "-"):
            raise ValueError(f"sign must be '+' or '-', got {s!r}")
        out.append(1 if s == "+" else -1)
    return tuple(out)


def _signs(params: ModelParams) -> tuple[int, ...]:
    return params.signs if params.signs is not None else (1,) * params.D


def _metadata(W: TransitionMatrix) -> dict:
    return {
        "tree": render_tree(W.tree),
        "k": [float(x) for x in W.params.k],
        "signs": ["+" if s > 0 else "-" for s in _signs(W.params)],
        "N": W.N,
        "omega": float(W.params.omega),
    }


def _rebuild(meta: dict, rows, cols, values) -> TransitionMatrix:
    try:
        tree = parse_tree(meta["tree"])
        params = ModelParams(k=tuple(meta["k"]), signs=parse_signs(meta["signs"]), omega=meta["omega"])
    except ValueError as exc:
        raise MatrixFormatError(f"bad metadata: {exc}") from None
    N = int(meta["N"])
    rows = tuple(rows)
    cols = tuple(cols)
    values = np.array(values, dtype=float)
    if values.shape != (len(rows), len(cols)):
        raise MatrixFormatError(f"values have shape {values.shape}, headers give {(len(rows), len(cols))}")
    if any(len(r.n) != tree.D or r.N != N for r in rows):
        raise MatrixFormatError("a Cartesian row state does not match D or N")
    if any(len(c.q) != tree.D - 1 or c.N != N for c in cols):
        raise MatrixFormatError("a hyperspherical column state does not match D or N")
    values.setflags(write=False)
    return TransitionMatrix(tree, params, N, rows, cols, values)


# --- JSON ----------------------------------------------------------------


def matrix_to_json(W: TransitionMatrix) -> dict:
    out = {"format": FORMAT_TAG}
    out.update(_metadata(W))
    out["rows"] = [r.to_json() for r in W.rows]
    out["cols"] = [c.to_json() for c in W.cols]
    out["values"] = [[float(v) for v in row] for row in W.values]
    return out


def matrix_from_json(obj: dict) -> TransitionMatrix:
    try:
        jsonschema.validate(obj, MATRIX_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise MatrixFormatError(f"schema violation: {exc.message}") from None
    rows = [CartesianState(tuple(r)) for r in obj["rows"]]
    cols = [HypersphericalState(c["n_r"], tuple(c["q"])) for c in obj["cols"]]
    return _rebuild(obj, rows, cols, obj["values"])


# --- CSV -----------------------------------------------------------------

CORNER = "n \\ (n_r; q)"
_CART_RE = re.compile(r"^\(\s*(\d+(?:\s*,\s*\d+)*)\s*,?\s*\)$")
_HYPER_RE = re.compile(r"^\(\s*(\d+)\s*;\s*(\d+(?:\s*,\s*\d+)*)?\s*\)$")


def _cart_label(s: CartesianState) -> str:
    return "(" + ", ".join(map(str, s.n)) + ")"


def _hyper_label(s: HypersphericalState) -> str:
    return f"({s.n_r}; " + ", ".join(map(str, s.q)) + ")"


def _parse_cart(label: str) -> CartesianState:
    m = _CART_RE.match(label.strip())
    if not m:
        raise MatrixFormatError(f"bad Cartesian state label {label!r}")
    return CartesianState(tuple(int(x) for x in m.group(1).split(",")))


def _parse_hyper(label: str) -> HypersphericalState:
    m = _HYPER_RE.match(label.strip())
    if not m:
        raise MatrixFormatError(f"bad hyperspherical state label {label!r}")
    q = tuple(int(x) for x in m.group(2).split(",")) if m.group(2) else ()
    return HypersphericalState(int(m.group(1)), q)


def matrix_to_csv(W: TransitionMatrix) -> str:
    meta = _metadata(W)
    buf = io.StringIO()
    buf.write("# polyosc transition matrix\n")
    buf.write(f"# tree={meta['tree']}\n")
    buf.write("# k=" + ",".join(format_number(x) for x in meta["k"]) + "\n")
    buf.write("# signs=" + ",".join(meta["signs"]) + "\n")
    buf.write(f"# N={meta['N']}\n")
    buf.write(f"# omega={format_number(meta['omega'])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([CORNER] + [_hyper_label(c) for c in W.cols])
    for r, row in zip(W.rows, W.values):
        writer.writerow([_cart_label(r)] + [format_number(v) for v in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> TransitionMatrix:
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    missing = {"tree", "k", "signs", "N", "omega"} - set(meta)
    if missing:
        raise MatrixFormatError(f"missing metadata: {', '.join(sorted(missing))}")
    try:
        parsed = {
            "tree": meta["tree"],
            "k": [float(x) for x in meta["k"].split(",")],
            "signs": meta["signs"],
            "N": int(meta["N"]),
            "omega": float(meta["omega"]),
        }
    except ValueError as exc:
        raise MatrixFormatError(f"bad metadata value: {exc}") from None
    table = list(csv.reader(body))
    if not table:
        raise MatrixFormatError("no header row")
    cols = [_parse_hyper(c) for c in table[0][1:]]
    rows, values = [], []
    for rec in table[1:]:
        rows.append(_parse_cart(rec[0]))
        try:
            values.append([float(v) for v in rec[1:]])
        except ValueError as exc:
            raise MatrixFormatError(f"bad matrix entry: {exc}") from None
        if len(values[-1]) != len(cols):
            raise MatrixFormatError(f"row {rec[0]} has {len(values[-1])} entries, expected {len(cols)}")
    return _rebuild(parsed, rows, cols, values)


def dump_matrix(W: TransitionMatrix, fmt: str = "csv") -> str:
    if fmt == "csv":
        return matrix_to_csv(W)
    if fmt == "json":
        return json.dumps(matrix_to_json(W), indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def load_matrix(text: str, fmt: str | None = None) -> TransitionMatrix:
    """Parse either format; ``fmt=None`` sniffs a leading ``{``."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "csv"
    if fmt == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"invalid JSON: {exc}") from None
        return matrix_from_json(obj)
    if fmt == "csv":
        return matrix_from_csv(text)
    raise ValueError(f"unknown format {fmt!r}")
