"""Export per-image box-request manifests for an external model
process to fulfill."""

from __future__ import annotations

import os

from ..config import SaifConfig
from ..errors import DegenerateFamilyError
from ..family import build_family
from ..formats import ManifestRecord, write_manifest
from .gen import list_corpus, load_scene, scene_paths
from .runner import derive_prompt


def export_requests(corpus, cfg: SaifConfig, box_noise: float,
                    image_path_for=None) -> tuple[list[str], list[str]]:
    """Write <corpus>/<id>/requests.txt for every image.

    Records carry the retained family boxes with empty path/crc fields;
    headers carry image_id, dimensions, and an optional source image
    path. Returns (fulfillable ids, degenerate ids); degenerate images
    still get a request file, just with no records.
    """
    cfg.validate()
    ok: list[str] = []
    degenerate: list[str] = []
    for image_id in list_corpus(corpus):
        scene = load_scene(corpus, image_id)
        prompt = derive_prompt(scene.gt_box, box_noise, cfg.seed, image_id)
        records: list[ManifestRecord] = []
        try:
            family = build_family(prompt, cfg, scene.width, scene.height,
                                  image_id=image_id)
        except DegenerateFamilyError:
            degenerate.append(image_id)
        else:
            for i, k, box in family.boxes():
                records.append(ManifestRecord(
                    image_id=image_id, i=i, k=k,
                    x1=box.x1, y1=box.y1, x2=box.x2, y2=box.y2))
            ok.append(image_id)
        paths = scene_paths(corpus, image_id)
        os.makedirs(paths["dir"], exist_ok=True)
        image_path = image_path_for(image_id) if image_path_for else ""
        write_manifest(records, paths["requests"],
                       headers={"image_id": image_id,
                                "width": scene.width, "height": scene.height,
                                "image_path": image_path})
    return ok, degenerate
