from .base import Segmenter, CountingSegmenter
from .synthetic import SyntheticScene, SyntheticSegmenter, make_scene, synthetic_predict
from .cached import CachedMapStore, CachedSegmenter, cached_predict

__all__ = [
    "Segmenter", "CountingSegmenter",
    "SyntheticScene", "SyntheticSegmenter", "make_scene", "synthetic_predict",
    "CachedMapStore", "CachedSegmenter", "cached_predict",
]
