"""Deterministic CSV/JSON writers shared by the command-line entry points.

Floats are written with 17 significant digits (round-trip exact for doubles);
JSON objects are emitted with sorted keys so identical inputs produce
byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import GridDomain, GridFunction
from .infinity import InfinityReport

__all__ = [
    "fmt17",
    "write_csv",
    "write_json",
    "canonical_json",
    "config_digest",
    "mask_rows",
    "function_rows",
    "infinity_header",
]


def fmt17(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) if not isinstance(v, str) else v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def write_json(path: Path, obj) -> None:
    Path(path).write_text(canonical_json(obj) + "\n", encoding="utf-8")


def config_digest(obj) -> str:
    packed = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(packed.encode("utf-8")).hexdigest()


def mask_rows(dom: GridDomain):
    """Full-lattice rows (coordinates..., inside flag)."""
    coords = dom.node_coords
    inside = dom.inside_flat
    for k in range(dom.n_nodes):
        yield (*(float(c) for c in coords[k]), bool(inside[k]))


def function_rows(u: GridFunction, inside_only: bool = True):
    """Rows (coordinates..., value); inside nodes only by default."""
    dom = u.domain
    idx = dom.inside_indices if inside_only else np.arange(dom.n_nodes)
    coords = dom.node_coords[idx]
    vals = u.flat()[idx]
    for k in range(idx.size):
        yield (*(float(c) for c in coords[k]), float(vals[k]))


def infinity_header(dom: GridDomain) -> list:
    coord_cols = ["x"] if dom.dim == 1 else ["x", "y"]
    return (["node", *coord_cols, "u", "delta", "l_plus", "witness_plus",
             "l_minus", "witness_minus", "l_minus_analytic", "branch", "residual"])
