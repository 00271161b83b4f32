"""Square median filter with a naive reference path and a fast histogram path.

Both paths use replicate (clamp-to-edge) padding, so a window never sees
intensity values that are absent from the source. The fast path slides a
256-bin histogram along each row: a one-pixel step only removes the leaving
column's samples and inserts the entering column's, then re-seeks the median
incrementally from its previous position, so the per-step cost is independent
of everything but the kernel height. The two paths are bit-identical by
contract and the reference path doubles as the test oracle.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from groundcheck.errors import InvalidArgumentError
from groundcheck.imaging.buffer import ImageBuffer

REPLICATE = "replicate"


def _validate(src: ImageBuffer, kernel_size: int, border: str) -> None:
    if not isinstance(src, ImageBuffer):
        raise InvalidArgumentError("src must be an ImageBuffer")
    if not isinstance(kernel_size, (int, np.integer)):
        raise InvalidArgumentError("kernel_size must be an integer")
    if kernel_size < 3:
        raise InvalidArgumentError(f"kernel_size must be >= 3, got {kernel_size}")
    if kernel_size % 2 == 0:
        raise InvalidArgumentError(f"kernel_size must be odd, got {kernel_size}")
    if border != REPLICATE:
        raise InvalidArgumentError(f"unsupported border policy: {border!r}")


def median_filter_reference(
    src: ImageBuffer, kernel_size: int, border: str = REPLICATE
) -> ImageBuffer:
    """Naive per-window sort. Reference oracle for the fast path."""
    _validate(src, kernel_size, border)
    k = int(kernel_size)
    r = k // 2
    h, w = src.height, src.width
    out = np.empty((h, w, 3), dtype=np.uint8)
    for c in range(3):
        padded = np.pad(src.pixels[:, :, c], r, mode="edge")
        windows = sliding_window_view(padded, (k, k)).reshape(h, w, k * k)
        out[:, :, c] = np.sort(windows, axis=-1)[:, :, (k * k) // 2]
    return ImageBuffer(out)


@njit(cache=True, nogil=True)
def _median_hist_channel(padded: np.ndarray, h: int, w: int, k: int) -> np.ndarray:
    half = (k * k) // 2 + 1  # cumulative count reaching the median rank
    out = np.empty((h, w), dtype=np.uint8)
    hist = np.zeros(256, dtype=np.int32)
    for y in range(h):
        for i in range(256):
            hist[i] = 0
        for wy in range(k):
            for wx in range(k):
                hist[padded[y + wy, wx]] += 1
        cnt = 0
        m = 0
        for v in range(256):
            cnt += hist[v]
            if cnt >= half:
                m = v
                break
        out[y, 0] = m
        below = cnt - hist[m]  # samples strictly below the current median
        for x in range(1, w):
            for wy in range(k):
                v_out = padded[y + wy, x - 1]
                hist[v_out] -= 1
                if v_out < m:
                    below -= 1
                v_in = padded[y + wy, x + k - 1]
                hist[v_in] += 1
                if v_in < m:
                    below += 1
            if below >= half:
                while below >= half:
                    m -= 1
                    below -= hist[m]
            else:
                while below + hist[m] < half:
                    below += hist[m]
                    m += 1
            out[y, x] = m
    return out


def median_filter(
    src: ImageBuffer, kernel_size: int, border: str = REPLICATE
) -> ImageBuffer:
    """Sliding-histogram median, bit-identical to the reference path."""
    _validate(src, kernel_size, border)
    k = int(kernel_size)
    r = k // 2
    out = np.empty((src.height, src.width, 3), dtype=np.uint8)
    for c in range(3):
        padded = np.pad(src.pixels[:, :, c], r, mode="edge")
        out[:, :, c] = _median_hist_channel(padded, src.height, src.width, k)
    return ImageBuffer(out)
