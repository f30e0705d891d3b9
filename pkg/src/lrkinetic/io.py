"""CSV serialization: phase-space fields, potential dumps, report tables.

Numbers are written with 17 significant digits so 64-bit floats round-trip
bit-exactly through the text format.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .phasespace import PhaseSpaceGrid, WignerField

FMT = "%.17g"


def _fmt(v: float) -> str:
    return FMT % float(v)


def write_wigner_csv(
    w: WignerField, path, stderr: np.ndarray | None = None, extra_meta: dict | None = None
) -> None:
    """Write a field as CSV: metadata sidecar line, header, one row per (x, k).

    An optional standard-error array of the same shape adds a fourth column;
    ``extra_meta`` key-value pairs are appended to the sidecar line (readers
    ignore keys they do not know).
    """
    g = w.grid
    meta = (
        f"# n_x={g.n_x} n_k={g.n_k} L_x={_fmt(g.L_x)} L_k={_fmt(g.L_k)} "
        f"time_stamp={_fmt(w.time_stamp)}"
    )
    for key, value in (extra_meta or {}).items():
        meta += f" {key}={_fmt(value) if isinstance(value, float) else value}"
    lines = [meta]
    lines.append("x,k,value,stderr" if stderr is not None else "x,k,value")
    xs = g.x()
    ks = g.k()
    vals = w.values
    if stderr is not None and np.asarray(stderr).shape != vals.shape:
        raise ValueError("stderr array must match the field shape")
    for i in range(g.n_x):
        xi = _fmt(xs[i])
        for j in range(g.n_k):
            row = f"{xi},{_fmt(ks[j])},{_fmt(vals[i, j])}"
            if stderr is not None:
                row += f",{_fmt(stderr[i, j])}"
            lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n")


def read_wigner_csv(path) -> tuple[WignerField, np.ndarray | None]:
    """Inverse of :func:`write_wigner_csv`; returns (field, stderr-or-None)."""
    text = Path(path).read_text().strip().split("\n")
    meta_line = text[0]
    if not meta_line.startswith("# "):
        raise ValueError(f"{path}: missing metadata sidecar line")
    meta = dict(item.split("=") for item in meta_line[2:].split())
    grid = PhaseSpaceGrid(
        n_x=int(meta["n_x"]),
        n_k=int(meta["n_k"]),
        L_x=float(meta["L_x"]),
        L_k=float(meta["L_k"]),
    )
    header = text[1].split(",")
    has_err = header == ["x", "k", "value", "stderr"]
    if not has_err and header != ["x", "k", "value"]:
        raise ValueError(f"{path}: unrecognized header {text[1]!r}")
    rows = text[2:]
    if len(rows) != grid.n_x * grid.n_k:
        raise ValueError(f"{path}: expected {grid.n_x * grid.n_k} rows, found {len(rows)}")
    data = np.array([[float(c) for c in r.split(",")] for r in rows])
    vals = data[:, 2].reshape(grid.n_x, grid.n_k)
    err = data[:, 3].reshape(grid.n_x, grid.n_k) if has_err else None
    w = WignerField(grid, vals, time_stamp=float(meta["time_stamp"]))
    return w, err


def write_potential_csv(x: np.ndarray, v: np.ndarray, path) -> None:
    """Dump a potential realization as (x, V) rows for inspection."""
    lines = ["x,V"]
    for xi, vi in zip(np.asarray(x, dtype=float), np.asarray(v, dtype=float)):
        lines.append(f"{_fmt(xi)},{_fmt(vi)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_table_csv(path, header: list[str], rows: list[tuple]) -> None:
    """Plain report table; floats get the round-trip format, the rest str()."""
    lines = [",".join(header)]
    for row in rows:
        cells = [_fmt(c) if isinstance(c, float) else str(c) for c in row]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
