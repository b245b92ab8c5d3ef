"""Corpus runner: derive one noisy prompt per image, execute the
selected ablation mode, and write masks plus per-image records.

records.txt holds only deterministic fields so reruns are byte
identical; wall times go to the separate timings.txt sidecar.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..backends.base import CountingSegmenter
from ..backends.cached import CachedMapStore, CachedSegmenter
from ..backends.synthetic import SyntheticSegmenter
from ..config import format_config
from ..errors import DegenerateFamilyError, InputIncompleteError
from ..family import build_family
from ..formats import (ManifestRecord, atomic_write_bytes, atomic_write_text,
                       encode_mask, write_manifest, write_map)
from ..fusion import FusionResult, inner_average, run_saif
from ..geometry import Box, clip_box, jitter_box, raster_area
from ..rng import LEVEL_PROMPT, make_stream
from .gen import list_corpus, load_gt_box, load_scene, scene_paths
from .specs import BACKEND_SYNTHETIC, MODE_CANDIDATES, MODE_VANILLA, RunSpec

RECORD_FIELDS = ("image_id", "mode", "retained", "calls", "tau_star",
                 "provenance", "selected", "weights", "fallbacks", "prompt")


def derive_prompt(gt_box: Box, rho: float, seed: int, image_id: str) -> Box:
    """Ground-truth box perturbed by size-relative uniform noise."""
    if rho == 0.0:
        return gt_box
    rng = make_stream(seed, image_id, LEVEL_PROMPT)
    return jitter_box(gt_box, rho, rng)


@dataclass(frozen=True)
class ImageRunResult:
    image_id: str
    record: tuple[str, ...]
    mask_bytes: bytes
    seconds: float


def _fallback_box(prompt: Box, width: int, height: int) -> Box:
    clipped = clip_box(prompt, width, height)
    if clipped.is_valid() and raster_area(clipped, width, height) > 0:
        return clipped
    return Box(0.0, 0.0, float(width), float(height))


def _uniform_fuse(family, maps, tau: float) -> FusionResult:
    indices = family.indices
    averaged = [inner_average([maps[(cand.index, k)]
                               for k in range(1, cand.k + 1)])
                for cand in family.outer]
    w = 1.0 / len(indices)
    fused = np.zeros(averaged[0].shape, dtype=np.float64)
    for avg in averaged:
        fused = fused + w * avg
    return FusionResult(selected=indices,
                        weights=tuple(w for _ in indices), fused=fused,
                        final_mask=fused > tau, tau_star=tau,
                        fallback_used=False, threshold_provenance="fixed")


def run_image(spec: RunSpec, image_id: str) -> ImageRunResult:
    cfg = spec.mode_config()
    if spec.backend == BACKEND_SYNTHETIC:
        scene = load_scene(spec.corpus, image_id)
        width, height = scene.width, scene.height
        gt_box = scene.gt_box
        segmenter = CountingSegmenter(SyntheticSegmenter())
        image_ref = scene
    else:
        store = CachedMapStore(spec.corpus)
        store.load_image(image_id)
        width, height = _cached_dims(store, image_id)
        gt_box = load_gt_box(spec.corpus, image_id)
        segmenter = CountingSegmenter(CachedSegmenter(store))
        image_ref = image_id

    prompt = derive_prompt(gt_box, spec.box_noise, cfg.seed, image_id)

    t0 = time.perf_counter()
    fallbacks: list[str] = []
    try:
        family = build_family(prompt, cfg, width, height, image_id=image_id)
    except DegenerateFamilyError:
        family = None
    if family is None:
        p0 = segmenter.predict(image_ref, _fallback_box(prompt, width, height))
        fused = np.asarray(p0, dtype=np.float64)
        result = FusionResult(selected=(1,), weights=(1.0,), fused=fused,
                              final_mask=fused > 0.5, tau_star=0.5,
                              fallback_used=True, threshold_provenance="vanilla",
                              fallback_reasons=("degenerate-family",))
        retained = 0
    else:
        maps = {(i, k): segmenter.predict(image_ref, box)
                for i, k, box in family.boxes()}
        retained = family.total_boxes
        if spec.mode == MODE_VANILLA:
            base = family.outer[0]
            fused = np.asarray(maps[(base.index, 1)], dtype=np.float64)
            result = FusionResult(selected=(base.index,), weights=(1.0,),
                                  fused=fused, final_mask=fused > 0.5,
                                  tau_star=0.5, fallback_used=False,
                                  threshold_provenance="fixed")
        elif spec.mode == MODE_CANDIDATES:
            result = _uniform_fuse(family, maps, 0.5)
        else:
            result = run_saif(image_id, maps, prompt, cfg,
                              width=width, height=height)
        if spec.save_maps and spec.backend == BACKEND_SYNTHETIC:
            _save_maps(spec.corpus, image_id, family, maps)
    seconds = time.perf_counter() - t0

    fallbacks.extend(result.fallback_reasons)
    record = (
        image_id, spec.mode, str(retained), str(segmenter.total_calls),
        repr(result.tau_star), result.threshold_provenance,
        ",".join(str(i) for i in result.selected),
        ",".join(repr(w) for w in result.weights),
        ",".join(fallbacks) if fallbacks else "-",
        ",".join(repr(c) for c in prompt.as_tuple()),
    )
    return ImageRunResult(image_id=image_id, record=record,
                          mask_bytes=encode_mask(result.final_mask),
                          seconds=seconds)


def _cached_dims(store: CachedMapStore, image_id: str) -> tuple[int, int]:
    image = store.load_image(image_id)
    headers = image.headers
    if "width" in headers and "height" in headers:
        return int(headers["width"]), int(headers["height"])
    first = next(iter(image.maps.values()))
    h, w = first.shape
    return w, h


def _save_maps(corpus, image_id: str, family, maps) -> None:
    paths = scene_paths(corpus, image_id)
    os.makedirs(paths["maps"], exist_ok=True)
    records = []
    for i, k, box in family.boxes():
        rel = f"maps/i{i:02d}_k{k:02d}.spfm"
        crc = write_map(maps[(i, k)], os.path.join(paths["dir"], rel))
        records.append(ManifestRecord(image_id=image_id, i=i, k=k,
                                      x1=box.x1, y1=box.y1, x2=box.x2,
                                      y2=box.y2).fulfilled(rel, crc))
    first = next(iter(maps.values()))
    h, w = np.asarray(first).shape
    write_manifest(records, paths["manifest"],
                   headers={"image_id": image_id, "width": w, "height": h,
                            "image_path": ""})


def _task(spec: RunSpec, image_id: str) -> ImageRunResult:
    return run_image(spec, image_id)


def run_corpus(spec: RunSpec) -> list[ImageRunResult]:
    spec.validate()
    ids = list_corpus(spec.corpus)
    if not ids:
        raise InputIncompleteError(f"no images under {spec.corpus}",
                                   missing=[spec.corpus])
    masks_dir = os.path.join(spec.out_dir, "masks")
    os.makedirs(masks_dir, exist_ok=True)

    if spec.workers == 1:
        results = [run_image(spec, image_id) for image_id in ids]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_task, [spec] * len(ids), ids))
    results.sort(key=lambda r: r.image_id)

    for r in results:
        atomic_write_bytes(os.path.join(masks_dir, f"{r.image_id}.sbmk"),
                           r.mask_bytes)
    record_lines = ["\t".join(RECORD_FIELDS)]
    record_lines.extend("\t".join(r.record) for r in results)
    atomic_write_text(os.path.join(spec.out_dir, "records.txt"),
                      "\n".join(record_lines) + "\n")
    timing_lines = [f"{r.image_id}\t{repr(r.seconds)}" for r in results]
    atomic_write_text(os.path.join(spec.out_dir, "timings.txt"),
                      "\n".join(timing_lines) + "\n")
    cfg_text = format_config(spec.cfg)
    run_text = (f"mode={spec.mode}\nbackend={spec.backend}\n"
                f"box_noise={repr(spec.box_noise)}\n{cfg_text}")
    atomic_write_text(os.path.join(spec.out_dir, "run_config.txt"), run_text)
    return results
