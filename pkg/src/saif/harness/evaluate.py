"""Evaluate a run directory against corpus ground truth."""

from __future__ import annotations

import os

from ..errors import InputIncompleteError
from ..formats import atomic_write_text, read_mask
from ..metrics import EvalReport, evaluate_pairs
from .gen import list_corpus, scene_paths


def evaluate_run(pred_dir, corpus, spacing=(1.0, 1.0), write: bool = True) -> EvalReport:
    """Compare <pred_dir>/masks/<id>.sbmk to <corpus>/<id>/gt.sbmk.

    Images without a prediction are excluded from the means and listed
    in the report. Writes eval_per_image.txt and eval_summary.txt into
    pred_dir unless write is False.
    """
    ids = list_corpus(corpus)
    if not ids:
        raise InputIncompleteError(f"no images under {corpus}", missing=[corpus])
    pairs = []
    missing = []
    for image_id in ids:
        mask_path = os.path.join(pred_dir, "masks", f"{image_id}.sbmk")
        if not os.path.isfile(mask_path):
            missing.append(image_id)
            continue
        pred = read_mask(mask_path)
        gt = read_mask(scene_paths(corpus, image_id)["gt"])
        pairs.append((image_id, pred, gt))
    if not pairs:
        raise InputIncompleteError(f"no predictions under {pred_dir}",
                                   missing=missing or [pred_dir])
    report = evaluate_pairs(pairs, spacing=spacing, missing=missing)
    if write:
        atomic_write_text(os.path.join(pred_dir, "eval_per_image.txt"),
                          report.format_table())
        atomic_write_text(os.path.join(pred_dir, "eval_summary.txt"),
                          report.format_summary())
    return report
