"""Hyper-parameter sweeps producing plottable CSV curves.

One row per (value, repetition). The wall-time column is measured and
therefore not byte-stable; every other column is deterministic.
"""

from __future__ import annotations

import math
import os

from ..formats import atomic_write_text
from .evaluate import evaluate_run
from .runner import run_corpus
from .specs import SweepSpec

SWEEP_HEADER = "axis,value,rep,mdice,miou,mean_hd95,mean_wall_ms"


def run_sweep(spec: SweepSpec, csv_path=None) -> list[dict]:
    """Run every (value, rep) cell; returns row dicts and optionally
    writes them as CSV."""
    spec.validate()
    rows = []
    for value in spec.values:
        for rep in range(spec.reps):
            cell = spec.spec_for(value, rep)
            results = run_corpus(cell)
            report = evaluate_run(cell.out_dir, cell.corpus, write=False)
            wall_ms = 1000.0 * math.fsum(r.seconds for r in results) / len(results)
            rows.append({
                "axis": spec.axis, "value": int(value), "rep": rep,
                "mdice": report.mdice, "miou": report.miou,
                "mean_hd95": report.mean_hd95, "mean_wall_ms": wall_ms,
            })
    if csv_path is not None:
        os.makedirs(os.path.dirname(csv_path) or ".", exist_ok=True)
        lines = [SWEEP_HEADER]
        for r in rows:
            lines.append(",".join((r["axis"], str(r["value"]), str(r["rep"]),
                                   repr(r["mdice"]), repr(r["miou"]),
                                   repr(r["mean_hd95"]), repr(r["mean_wall_ms"]))))
        atomic_write_text(csv_path, "\n".join(lines) + "\n")
    return rows
