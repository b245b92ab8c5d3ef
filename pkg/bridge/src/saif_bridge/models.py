"""Model adapters. Every adapter exposes

    predict(image, box, width, height) -> float32 (height, width) in [0, 1]

where box is (x1, y1, x2, y2) in pixel units of the full image.
"""

from __future__ import annotations

import numpy as np

from .errors import BridgeArgumentError, ModelLoadError, ModelOutputError

MOCK_PREFIX = "constant:"


class MockModel:
    """Constant-probability stand-in; lets the whole request/fulfill
    loop run without any ML dependency."""

    def __init__(self, value: float):
        if not (0.0 <= value <= 1.0):
            raise BridgeArgumentError(
                f"mock constant must lie in [0, 1], got {value}")
        self.value = float(value)

    def predict(self, image, box, width: int, height: int) -> np.ndarray:
        return np.full((height, width), self.value, dtype=np.float32)


def parse_mock(spec: str) -> MockModel:
    if not spec.startswith(MOCK_PREFIX):
        raise BridgeArgumentError(
            f"unknown mock spec {spec!r}; expected {MOCK_PREFIX}<value>")
    try:
        value = float(spec[len(MOCK_PREFIX):])
    except ValueError as exc:
        raise BridgeArgumentError(f"bad mock constant in {spec!r}") from exc
    return MockModel(value)


class TorchscriptModel:
    """Runs a scripted checkpoint with signature

        module(image (1, C, H, W) float32, box (1, 4) float32) -> logits

    Accepted outputs: (1, 1, H, W) / (1, n, H, W) / (H, W) logits, or a
    (masks, quality) pair from which the highest-quality hypothesis is
    taken. Logits are mapped to probabilities with the logistic
    function; the output resolution must match the image.
    """

    def __init__(self, checkpoint: str, device: str = "cpu"):
        try:
            import torch
        except ImportError as exc:
            raise ModelLoadError(
                "torch is required for checkpoint models; "
                "install the [torch] extra or use --mock") from exc
        self._torch = torch
        try:
            self.module = torch.jit.load(checkpoint, map_location=device)
        except (OSError, RuntimeError, ValueError) as exc:
            raise ModelLoadError(f"cannot load checkpoint {checkpoint}: {exc}") from exc
        self.module.eval()
        self.device = device

    def _pick_hypothesis(self, out):
        torch = self._torch
        if isinstance(out, (tuple, list)):
            if len(out) < 2:
                raise ModelOutputError("tuple output must be (masks, quality)")
            masks, quality = out[0], out[1]
            if masks.dim() == 4:
                masks = masks.squeeze(0)
            best = int(torch.argmax(quality.reshape(-1)))
            return masks[best]
        t = out
        if t.dim() == 4:
            t = t.squeeze(0)
        if t.dim() == 3:
            t = t[0]
        if t.dim() != 2:
            raise ModelOutputError(f"cannot interpret output of rank {t.dim()}")
        return t

    def predict(self, image, box, width: int, height: int) -> np.ndarray:
        torch = self._torch
        if image is None:
            raise ModelOutputError("checkpoint models need a source image path")
        img = np.asarray(image, dtype=np.float32)
        if img.ndim == 2:
            img = img[None]
        elif img.ndim == 3:
            img = np.moveaxis(img, -1, 0)  # HWC -> CHW
        else:
            raise ModelOutputError(f"unsupported image rank {img.ndim}")
        with torch.no_grad():
            im_t = torch.from_numpy(np.ascontiguousarray(img))[None].to(self.device)
            box_t = torch.tensor([list(box)], dtype=torch.float32,
                                 device=self.device)
            out = self.module(im_t, box_t)
        logits = self._pick_hypothesis(out)
        if tuple(logits.shape) != (height, width):
            raise ModelOutputError(
                f"model returned {tuple(logits.shape)}, expected ({height}, {width})")
        probs = torch.sigmoid(logits.float()).cpu().numpy()
        return np.asarray(probs, dtype=np.float32)
