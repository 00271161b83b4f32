"""8-bit RGB raster container plus PNG/JPEG decode and PNG encode."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from groundcheck.errors import InvalidArgumentError

CHANNELS = 3


@dataclass(frozen=True)
class ImageBuffer:
    """Interleaved 3-channel, 8-bit raster.

    ``pixels`` is a read-only ``(height, width, 3)`` uint8 array; its flat
    view is row-major interleaved, so ``pixels.size == width * height * 3``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = self.pixels
        if not isinstance(arr, np.ndarray):
            raise InvalidArgumentError("pixels must be a numpy array")
        if arr.dtype != np.uint8:
            raise InvalidArgumentError(f"pixels must be uint8, got {arr.dtype}")
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise InvalidArgumentError(
                f"pixels must have shape (height, width, 3), got {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgumentError("image must be at least 1x1")
        if not arr.flags["C_CONTIGUOUS"]:
            arr = np.ascontiguousarray(arr)
        arr = arr.copy() if arr.flags["WRITEABLE"] else arr
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return CHANNELS

    @property
    def data(self) -> np.ndarray:
        """Flat row-major interleaved sample view, length width*height*3."""
        return self.pixels.reshape(-1)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        return cls(np.asarray(arr, dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        """Writable copy of the pixel array."""
        return self.pixels.copy()


def decode_image(data: bytes) -> ImageBuffer:
    """Decode PNG or JPEG bytes into an RGB buffer.

    Grayscale and paletted inputs are promoted to 3 channels; alpha is
    dropped. Other container formats are rejected.
    """
    if not data:
        raise InvalidArgumentError("empty image payload")
    try:
        img = Image.open(io.BytesIO(data))
        img_format = img.format
        img.load()
    except Exception as exc:
        raise InvalidArgumentError(f"undecodable image: {exc}") from exc
    if img_format not in ("PNG", "JPEG"):
        raise InvalidArgumentError(f"unsupported image format: {img_format}")
    if img.mode != "RGB":
        img = img.convert("RGB")
    return ImageBuffer(np.asarray(img, dtype=np.uint8))


def encode_png(buf: ImageBuffer) -> bytes:
    out = io.BytesIO()
    Image.fromarray(buf.pixels, mode="RGB").save(out, format="PNG")
    return out.getvalue()


def load_image(path: str | Path) -> ImageBuffer:
    return decode_image(Path(path).read_bytes())
