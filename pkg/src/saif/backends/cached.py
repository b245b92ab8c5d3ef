"""Read-only store of externally produced probability maps.

Directory layout, one subtree per image under a corpus root:
    <root>/<image_id>/manifest.txt
    <root>/<image_id>/maps/*.spfm
    <root>/<image_id>/gt.sbmk          (optional ground truth)

Manifest checksums are verified against the decoded map payloads at
load time; lookups match requested boxes coordinate-wise within 1e-6.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass

import numpy as np

from ..errors import InputIncompleteError, IntegrityError
from ..formats import ManifestRecord, read_manifest, decode_map
from ..geometry import Box
from .base import Segmenter

BOX_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class ImageMaps:
    image_id: str
    records: tuple[ManifestRecord, ...]
    maps: dict            # (i, k) -> float32 array
    headers: dict

    def lookup(self, box: Box) -> np.ndarray:
        want = box.as_tuple()
        for r in self.records:
            have = r.box_tuple
            if all(abs(a - b) <= BOX_MATCH_TOL for a, b in zip(want, have)):
                return self.maps[(r.i, r.k)]
        raise InputIncompleteError(
            f"{self.image_id}: no cached map matches box {want}",
            missing=[repr(want)])


class CachedMapStore:
    def __init__(self, root):
        self.root = root
        self._images: dict[str, ImageMaps] = {}

    def image_dir(self, image_id: str) -> str:
        return os.path.join(self.root, image_id)

    def manifest_path(self, image_id: str) -> str:
        return os.path.join(self.image_dir(image_id), "manifest.txt")

    def list_images(self) -> list[str]:
        out = []
        for name in sorted(os.listdir(self.root)):
            if os.path.isfile(os.path.join(self.root, name, "manifest.txt")):
                out.append(name)
        return out

    def load_image(self, image_id: str) -> ImageMaps:
        if image_id in self._images:
            return self._images[image_id]
        mpath = self.manifest_path(image_id)
        if not os.path.isfile(mpath):
            raise InputIncompleteError(f"no manifest for image {image_id}",
                                       missing=[mpath])
        headers, records = read_manifest(mpath)
        maps = {}
        missing = []
        for r in records:
            if r.image_id != image_id:
                raise IntegrityError(
                    f"{mpath}: record for {r.image_id} inside {image_id} manifest")
            if not r.path:
                missing.append(f"({r.i}, {r.k})")
                continue
            fpath = r.path if os.path.isabs(r.path) else \
                os.path.join(self.image_dir(image_id), r.path)
            if not os.path.isfile(fpath):
                missing.append(fpath)
                continue
            with open(fpath, "rb") as f:
                data = f.read()
            arr = decode_map(data, fpath)
            crc = zlib.crc32(data[16:-4])
            if f"{crc:08x}" != r.crc32.lower():
                raise IntegrityError(
                    f"{fpath}: payload crc {crc:08x} != manifest {r.crc32}")
            maps[(r.i, r.k)] = arr
        if missing:
            raise InputIncompleteError(
                f"{image_id}: {len(missing)} map files missing", missing=missing)
        image = ImageMaps(image_id=image_id, records=tuple(records),
                          maps=maps, headers=headers)
        self._images[image_id] = image
        return image


def cached_predict(store: CachedMapStore, image_id: str, box: Box) -> np.ndarray:
    return store.load_image(image_id).lookup(box)


class CachedSegmenter(Segmenter):
    """Segmenter facade over a store; image_ref is the image id."""

    def __init__(self, store: CachedMapStore):
        self.store = store

    def predict(self, image_ref: str, box: Box) -> np.ndarray:
        return cached_predict(self.store, image_ref, box)
