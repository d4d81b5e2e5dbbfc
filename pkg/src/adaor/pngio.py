"""8-bit grayscale PNG grids for sweep outputs."""

from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image

UPSCALE = 8
SEPARATOR = 2  # pixels of white between panels


def _tile(task, sample: np.ndarray, upscale: int) -> np.ndarray:
    gray = np.round(task.to_grayscale(sample) * 255.0).astype(np.uint8)
    return np.kron(gray, np.ones((upscale, upscale), dtype=np.uint8))


def grid_image(task, samples: list[np.ndarray], upscale: int = UPSCALE) -> np.ndarray:
    """One row of nearest-neighbor upscaled panels with white separators."""
    tiles = [_tile(task, s, upscale) for s in samples]
    h = tiles[0].shape[0]
    width = sum(t.shape[1] for t in tiles) + SEPARATOR * (len(tiles) - 1)
    canvas = np.full((h, width), 255, dtype=np.uint8)
    x = 0
    for t in tiles:
        canvas[:, x : x + t.shape[1]] = t
        x += t.shape[1] + SEPARATOR
    return canvas


def write_grid_png(task, samples: list[np.ndarray], path: str, upscale: int = UPSCALE) -> None:
    Image.fromarray(grid_image(task, samples, upscale), mode="L").save(path, format="PNG")


def sample_png_base64(task, sample: np.ndarray, upscale: int = UPSCALE) -> str:
    buf = io.BytesIO()
    Image.fromarray(_tile(task, sample, upscale), mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")
