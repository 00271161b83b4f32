"""Five-point Laplacian and saturating weighted blending."""

from __future__ import annotations

import numpy as np

from groundcheck.errors import InvalidArgumentError
from groundcheck.imaging.buffer import ImageBuffer
from groundcheck.imaging.variants import BlendWeights


def laplacian(src: ImageBuffer) -> np.ndarray:
    """Discrete second derivative, applied to each channel independently.

    out(x,y,c) = f(x+1,y,c) + f(x-1,y,c) + f(x,y+1,c) + f(x,y-1,c) - 4*f(x,y,c)
    with replicate border clamping. Returns a signed int32 field with the same
    (height, width, 3) shape; values lie in [-1020, 1020] and are NOT clamped
    to the 8-bit range.
    """
    if not isinstance(src, ImageBuffer):
        raise InvalidArgumentError("src must be an ImageBuffer")
    f = src.pixels.astype(np.int32)
    padded = np.pad(f, ((1, 1), (1, 1), (0, 0)), mode="edge")
    out = (
        padded[1:-1, :-2, :]
        + padded[1:-1, 2:, :]
        + padded[:-2, 1:-1, :]
        + padded[2:, 1:-1, :]
        - 4 * f
    )
    return out


def _as_field(src: "ImageBuffer | np.ndarray") -> np.ndarray:
    if isinstance(src, ImageBuffer):
        return src.pixels.astype(np.float64)
    arr = np.asarray(src)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidArgumentError(
            f"blend inputs must have shape (height, width, 3), got {arr.shape}"
        )
    return arr.astype(np.float64)


def blend(
    src1: "ImageBuffer | np.ndarray",
    src2: "ImageBuffer | np.ndarray",
    w: BlendWeights,
) -> ImageBuffer:
    """Pixel-wise alpha*src1 + beta*src2 + gamma, rounded then saturated.

    Inputs may be 8-bit buffers or signed rasters (e.g. a Laplacian field).
    Rounding is half-away-from-zero; the result is clamped to [0, 255].
    """
    a = _as_field(src1)
    b = _as_field(src2)
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"blend inputs must share dimensions, got {a.shape} vs {b.shape}"
        )
    mixed = w.alpha * a + w.beta * b + w.gamma
    rounded = np.where(mixed >= 0, np.floor(mixed + 0.5), np.ceil(mixed - 0.5))
    return ImageBuffer(np.clip(rounded, 0, 255).astype(np.uint8))
