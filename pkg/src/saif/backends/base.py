"""Promptable-segmenter abstraction shared by all backends."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..geometry import Box


class Segmenter(ABC):
    """Box-conditioned foreground-probability predictor.

    Implementations must be deterministic given (image_ref, box) and
    their own construction-time seed, and must return an H x W map
    matching the image dimensions.
    """

    @abstractmethod
    def predict(self, image_ref, box: Box) -> np.ndarray:
        raise NotImplementedError


class CountingSegmenter(Segmenter):
    """Pass-through wrapper that counts predict calls per image ref."""

    def __init__(self, inner: Segmenter):
        self.inner = inner
        self.calls: dict[object, int] = {}

    @property
    def total_calls(self) -> int:
        return sum(self.calls.values())

    def predict(self, image_ref, box: Box) -> np.ndarray:
        key = getattr(image_ref, "image_id", image_ref)
        self.calls[key] = self.calls.get(key, 0) + 1
        return self.inner.predict(image_ref, box)
