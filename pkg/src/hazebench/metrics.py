"""Region statistics and no-reference restoration quality indices.

Transmission accuracy is judged by a trimmed mean over a region of
interest, color fidelity by distances in rg chromaticity space, and
contrast restoration by the visible-edge indices e (relative change in
edge count) and r (geometric mean of gradient-magnitude ratios).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import sobel

from .errors import ParameterError, ShapeError
from .imaging import luminance

__all__ = [
    "RegionMask",
    "Chromaticity",
    "EdgeMetricConfig",
    "trimmed_mean",
    "trimmed_mean_region",
    "rg_chromaticity",
    "patch_chromaticity",
    "chromaticity_distance",
    "mean_chromaticity_distance",
    "gradient_magnitude",
    "visible_edges",
    "e_index",
    "r_index",
]


@dataclass(frozen=True)
class RegionMask:
    """A region of interest: either a rectangle or an explicit boolean mask.

    Rectangles are (x, y, width, height) in pixel coordinates.
    """

    rect: tuple[int, int, int, int] | None = None
    mask: np.ndarray | None = None

    def __post_init__(self):
        if (self.rect is None) == (self.mask is None):
            raise ParameterError("provide exactly one of rect or mask")
        if self.rect is not None:
            x, y, w, h = self.rect
            if w < 1 or h < 1:
                raise ParameterError(f"region {self.rect} has empty extent")
            if x < 0 or y < 0:
                raise ParameterError(f"region {self.rect} has a negative origin")

    def resolve(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean mask of the given (H, W) shape; errors if out of bounds."""
        height, width = shape
        if self.mask is not None:
            if self.mask.shape != (height, width):
                raise ShapeError(f"mask shape {self.mask.shape} does not match image {shape}")
            out = self.mask.astype(bool)
        else:
            x, y, w, h = self.rect
            if x + w > width or y + h > height:
                raise ShapeError(f"region {self.rect} exceeds image extent {width}x{height}")
            out = np.zeros((height, width), dtype=bool)
            out[y : y + h, x : x + w] = True
        if not out.any():
            raise ParameterError("region selects no pixels")
        return out


def trimmed_mean(values, trim_fraction: float = 0.15) -> float:
    """Mean after dropping floor(trim * n) smallest and largest values."""
    if not 0.0 <= trim_fraction < 0.5:
        raise ParameterError(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    v = np.sort(np.asarray(values, dtype=np.float64), axis=None)
    if v.size == 0:
        raise ParameterError("cannot take the mean of an empty collection")
    drop = int(math.floor(trim_fraction * v.size))
    kept = v[drop : v.size - drop]
    return math.fsum(kept) / kept.size


def trimmed_mean_region(values: np.ndarray, region: RegionMask, trim_fraction: float = 0.15) -> float:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d map, got shape {arr.shape}")
    return trimmed_mean(arr[region.resolve(arr.shape)], trim_fraction)


# ---------------------------------------------------------------------------
# chromaticity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chromaticity:
    r: float
    g: float
    degenerate: bool = False


def rg_chromaticity(rgb) -> Chromaticity:
    """Intensity-normalized color; black maps to the neutral point, flagged."""
    r, g, b = (float(c) for c in rgb)
    total = r + g + b
    if total <= 0.0:
        return Chromaticity(1.0 / 3.0, 1.0 / 3.0, degenerate=True)
    return Chromaticity(r / total, g / total)


def patch_chromaticity(image: np.ndarray, region: RegionMask) -> Chromaticity:
    """Chromaticity of the mean color over the region."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) image, got {img.shape}")
    sel = region.resolve(img.shape[:2])
    return rg_chromaticity(img[sel].mean(axis=0))


def chromaticity_distance(a: Chromaticity, b: Chromaticity) -> float:
    return math.hypot(a.r - b.r, a.g - b.g)


def mean_chromaticity_distance(
    image: np.ndarray, reference: np.ndarray, regions
) -> float:
    """Mean rg distance between per-region mean colors of the two images."""
    regions = list(regions)
    if not regions:
        raise ParameterError("need at least one region")
    dists = [
        chromaticity_distance(patch_chromaticity(image, reg), patch_chromaticity(reference, reg))
        for reg in regions
    ]
    return math.fsum(dists) / len(dists)


# ---------------------------------------------------------------------------
# visible-edge indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeMetricConfig:
    threshold: float = 0.05
    ratio_clamp: float = 10.0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ParameterError(f"threshold must be > 0, got {self.threshold}")
        if not self.ratio_clamp > 1:
            raise ParameterError(f"ratio_clamp must be > 1, got {self.ratio_clamp}")


def gradient_magnitude(image: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude of the luminance, unit-slope normalized.

    The 1/8 factor makes the response of a linear ramp equal its slope,
    so thresholds are in the same units as pixel values.
    """
    img = np.asarray(image, dtype=np.float64)
    lum = luminance(img) if img.ndim == 3 else img
    if lum.ndim != 2:
        raise ShapeError(f"expected an image or 2-d map, got shape {img.shape}")
    gx = sobel(lum, axis=1, mode="nearest") / 8.0
    gy = sobel(lum, axis=0, mode="nearest") / 8.0
    return np.hypot(gx, gy)


def visible_edges(image: np.ndarray, cfg: EdgeMetricConfig = EdgeMetricConfig()) -> np.ndarray:
    """Boolean map of pixels whose gradient magnitude exceeds the threshold."""
    return gradient_magnitude(image) > cfg.threshold


def e_index(reference: np.ndarray, restored: np.ndarray, cfg: EdgeMetricConfig = EdgeMetricConfig()) -> float:
    """Relative change in visible-edge count; NaN when the reference has none."""
    ref = np.asarray(reference, dtype=np.float64)
    res = np.asarray(restored, dtype=np.float64)
    if ref.shape != res.shape:
        raise ShapeError(f"image shapes differ: {ref.shape} vs {res.shape}")
    n_ref = int(np.count_nonzero(visible_edges(ref, cfg)))
    n_res = int(np.count_nonzero(visible_edges(res, cfg)))
    if n_ref == 0:
        return float("nan")
    return (n_res - n_ref) / n_ref


def r_index(reference: np.ndarray, restored: np.ndarray, cfg: EdgeMetricConfig = EdgeMetricConfig()) -> float:
    """Geometric mean of gradient amplification on restored visible edges.

    Ratios divide the restored magnitude by the reference magnitude floored
    at one grey level (1/255) and are clamped above; NaN when the restored
    image shows no visible edges.
    """
    ref = np.asarray(reference, dtype=np.float64)
    res = np.asarray(restored, dtype=np.float64)
    if ref.shape != res.shape:
        raise ShapeError(f"image shapes differ: {ref.shape} vs {res.shape}")
    grad_ref = gradient_magnitude(ref)
    grad_res = gradient_magnitude(res)
    sel = grad_res > cfg.threshold
    if not sel.any():
        return float("nan")
    ratios = grad_res[sel] / np.maximum(grad_ref[sel], 1.0 / 255.0)
    ratios = np.minimum(ratios, cfg.ratio_clamp)
    return float(np.exp(np.mean(np.log(ratios))))
