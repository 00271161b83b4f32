"""Image transforms: identity, noise reduction, edge enhancement.

All operations are pure functions over immutable 8-bit RGB rasters and are
safe to call from concurrent workers.
"""

from groundcheck.imaging.buffer import (
    ImageBuffer,
    decode_image,
    encode_png,
    load_image,
)
from groundcheck.imaging.filters import blend, laplacian
from groundcheck.imaging.median import median_filter, median_filter_reference
from groundcheck.imaging.variants import (
    BlendWeights,
    FilterSpec,
    NrMode,
    Variant,
    apply_variant,
)

__all__ = [
    "ImageBuffer",
    "decode_image",
    "encode_png",
    "load_image",
    "median_filter",
    "median_filter_reference",
    "laplacian",
    "blend",
    "Variant",
    "NrMode",
    "BlendWeights",
    "FilterSpec",
    "apply_variant",
]
