"""Variant taxonomy and the org / noise-reduced / edge-enhanced transforms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from groundcheck.errors import InvalidArgumentError
from groundcheck.imaging.buffer import ImageBuffer


class Variant(str, enum.Enum):
    ORG = "org"
    NR = "nr"
    EE = "ee"


class NrMode(str, enum.Enum):
    # Raw median output (default) or the sharpening blend of it.
    PURE_MEDIAN = "pure"
    BLENDED = "blended"


@dataclass(frozen=True)
class BlendWeights:
    """Weights of the pixel-wise linear combination alpha*src1 + beta*src2 + gamma."""

    alpha: float = 1.5
    beta: float = -0.5
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be a finite number")


@dataclass(frozen=True)
class FilterSpec:
    variant: Variant
    kernel_size: int = 15
    nr_mode: NrMode = NrMode.PURE_MEDIAN
    blend: BlendWeights = field(default_factory=BlendWeights)
    border: str = "replicate"

    def __post_init__(self):
        # ORG ignores every other field, so only the active variants validate.
        if self.variant is Variant.ORG:
            return
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise InvalidArgumentError(
                f"kernel_size must be an odd integer >= 3, got {self.kernel_size}"
            )
        if self.border != "replicate":
            raise InvalidArgumentError(f"unsupported border policy: {self.border!r}")


def apply_variant(src: ImageBuffer, spec: FilterSpec) -> ImageBuffer:
    """Produce one image variant.

    ORG is a byte-identical copy. NR is the median filter output (or its
    weighted blend with the source when ``nr_mode`` is BLENDED). EE blends the
    source with its Laplacian channel-wise: alpha*src + beta*laplacian(src).
    """
    from groundcheck.imaging.filters import blend, laplacian
    from groundcheck.imaging.median import median_filter

    if not isinstance(src, ImageBuffer):
        raise InvalidArgumentError("src must be an ImageBuffer")
    if spec.variant is Variant.ORG:
        return ImageBuffer(src.pixels.copy())
    if spec.variant is Variant.NR:
        denoised = median_filter(src, spec.kernel_size, spec.border)
        if spec.nr_mode is NrMode.PURE_MEDIAN:
            return denoised
        return blend(src, denoised, spec.blend)
    if spec.variant is Variant.EE:
        return blend(src, laplacian(src), spec.blend)
    raise InvalidArgumentError(f"unknown variant: {spec.variant!r}")
