"""Synthetic corpus generation: one directory per image holding the
ground-truth mask, the scene parameter record, and (after a cached run
or bridge pass) probability maps."""

from __future__ import annotations

import os

from ..backends.synthetic import (DEFAULT_ETA, DEFAULT_KAPPA, SyntheticScene,
                                  make_scene)
from ..errors import InvalidArgumentError, MapFormatError
from ..formats import atomic_write_text, read_mask, write_mask
from ..geometry import Box


def image_ids(count: int) -> list[str]:
    return [f"img{i:04d}" for i in range(count)]


def scene_paths(root, image_id: str) -> dict[str, str]:
    d = os.path.join(root, image_id)
    return {
        "dir": d,
        "gt": os.path.join(d, "gt.sbmk"),
        "scene": os.path.join(d, "scene.txt"),
        "requests": os.path.join(d, "requests.txt"),
        "manifest": os.path.join(d, "manifest.txt"),
        "maps": os.path.join(d, "maps"),
    }


def _scene_record(scene: SyntheticScene) -> str:
    box = scene.gt_box
    lines = [
        f"image_id={scene.image_id}",
        f"width={scene.width}",
        f"height={scene.height}",
        f"seed={scene.seed}",
        f"kappa={repr(scene.kappa)}",
        f"eta={repr(scene.eta)}",
        f"gt_box={repr(box.x1)},{repr(box.y1)},{repr(box.x2)},{repr(box.y2)}",
    ]
    return "\n".join(lines) + "\n"


def generate_corpus(root, count: int, width: int, height: int, seed: int,
                    n_blobs=(1, 3), radius_frac=(0.06, 0.14),
                    kappa: float = DEFAULT_KAPPA, eta: float = DEFAULT_ETA) -> list[str]:
    """Write `count` seeded scenes under root; returns the image ids."""
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    ids = image_ids(count)
    for image_id in ids:
        scene = make_scene(image_id, width, height, seed,
                           n_blobs=n_blobs, radius_frac=radius_frac,
                           kappa=kappa, eta=eta)
        paths = scene_paths(root, image_id)
        os.makedirs(paths["dir"], exist_ok=True)
        write_mask(scene.ground_truth, paths["gt"])
        atomic_write_text(paths["scene"], _scene_record(scene))
    return ids


def parse_scene_record(text: str, path="<scene>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise MapFormatError(f"{path}:{lineno}: expected key=value", field="scene")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_scene(root, image_id: str) -> SyntheticScene:
    """Rebuild a scene from its directory; the signed-distance field is
    recomputed from the stored ground truth."""
    paths = scene_paths(root, image_id)
    gt = read_mask(paths["gt"])
    with open(paths["scene"], "r", encoding="utf-8") as f:
        rec = parse_scene_record(f.read(), paths["scene"])
    return SyntheticScene(image_id=rec["image_id"], width=int(rec["width"]),
                          height=int(rec["height"]), ground_truth=gt,
                          kappa=float(rec["kappa"]), eta=float(rec["eta"]),
                          seed=int(rec["seed"]))


def load_gt_box(root, image_id: str) -> Box:
    paths = scene_paths(root, image_id)
    with open(paths["scene"], "r", encoding="utf-8") as f:
        rec = parse_scene_record(f.read(), paths["scene"])
    parts = [float(v) for v in rec["gt_box"].split(",")]
    if len(parts) != 4:
        raise MapFormatError(f"{paths['scene']}: bad gt_box {rec['gt_box']!r}",
                             field="scene")
    return Box(*parts)


def list_corpus(root) -> list[str]:
    """Image ids under root, sorted; an id is any directory with a
    ground-truth mask."""
    if not os.path.isdir(root):
        raise InvalidArgumentError(f"corpus root {root} is not a directory")
    out = []
    for name in sorted(os.listdir(root)):
        if os.path.isfile(os.path.join(root, name, "gt.sbmk")):
            out.append(name)
    return out
