import numpy as np

from .errors import ModelLoadError


def load_image(path: str) -> np.ndarray:
    """Decode the source image as float32.

    .npy files pass through unchanged (any layout the model expects);
    everything else is decoded with Pillow to (H, W, 3) in [0, 1].
    """
    if path.endswith(".npy"):
        try:
            return np.asarray(np.load(path), dtype=np.float32)
        except (OSError, ValueError) as exc:
            raise ModelLoadError(f"cannot load array image {path}: {exc}") from exc
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - pillow is a hard dependency
        raise ModelLoadError("Pillow is required to decode images") from exc
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    except (OSError, ValueError) as exc:
        raise ModelLoadError(f"cannot decode image {path}: {exc}") from exc
