"""Versioned CSV tables.

Every file starts with a ``# schema: <name>/<version>`` comment line
followed by the column header.  Floats are written with ``repr`` (the
shortest string that round-trips), so equal values always produce equal
bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SCHEMAS: dict[str, tuple[int, tuple[str, ...]]] = {
    "events": (1, ("time", "kind", "parent_trait", "parent_marker", "child_trait", "child_marker")),
    "snapshot": (1, ("time", "trait", "marker", "count")),
    "trajectory": (
        1,
        ("time", "trait", "n_hat", "marker_mean", "marker_var", "marker_heterozygosity", "jump_flag"),
    ),
    "particles": (1, ("time", "marker", "weight")),
    "iif-grid": (1, ("x", "y", "classification")),
    "invasion-trials": (
        1,
        (
            "trial", "survived_at_tK", "marker_max_atom_at_tK", "fixation_completed", "t_K_used",
            "mutant_mass_at_tK", "founder_marker", "marker_heterozygosity_at_tK",
        ),
    ),
    "wf-samples": (1, ("sample", "source", "w_a")),
    "fig2-support": (1, ("replicate", "time", "trait", "count", "marker_min", "marker_max")),
    "fig3-allele-counts": (1, ("replicate", "time", "trait", "count_a", "count_A")),
    "fig4-dimorphic": (1, ("replicate", "time", "trait", "marker_mean", "marker_var", "marker_heterozygosity")),
}


class SchemaError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def render_csv(schema: str, rows: Iterable[Sequence]) -> str:
    version, cols = SCHEMAS[schema]
    buf = io.StringIO()
    buf.write(f"# schema: {schema}/{version}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        if len(r) != len(cols):
            raise SchemaError(f"{schema}: expected {len(cols)} fields, got {len(r)}")
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path: str | Path, schema: str, rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(schema, rows))
    return path


def read_csv(path: str | Path) -> tuple[str, list[dict[str, str]]]:
    """Return ``(schema name, rows as dicts of strings)``."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema:"):
            raise SchemaError(f"{path} has no schema header")
        name = first.split(":", 1)[1].strip().split("/")[0]
        return name, list(csv.DictReader(fh))


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# row builders


def event_rows(log, marker_label=None) -> list[tuple]:
    lab = marker_label or (lambda u: u)
    return [
        (
            e.time, e.kind.name.lower(), e.parent_trait, lab(e.parent_marker),
            e.child_trait, None if e.child_marker is None else lab(e.child_marker),
        )
        for e in log
    ]


def snapshot_rows(time: float, state, marker_label=None) -> list[tuple]:
    lab = marker_label or (lambda u: u)
    return [(time, x, lab(u), c) for x, u, c in state.snapshot()]
