"""Guided filter (local linear model) for edge-preserving map refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import ParameterError, ShapeError

__all__ = ["GuidedFilterConfig", "box_mean", "guided_filter"]


@dataclass(frozen=True)
class GuidedFilterConfig:
    """Refinement settings: window half-size and variance regularizer."""

    radius: int = 30
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.radius < 0:
            raise ParameterError(f"guided-filter radius must be >= 0, got {self.radius}")
        if not self.epsilon > 0:
            raise ParameterError(f"guided-filter epsilon must be > 0, got {self.epsilon}")


def box_mean(img: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 window with clamp-to-edge borders."""
    return uniform_filter(np.asarray(img, dtype=np.float64), size=2 * radius + 1, mode="nearest")


def guided_filter(guide, src, radius: int, epsilon: float) -> np.ndarray:
    """Filter ``src`` by fitting a local linear model of it on ``guide``.

    Per window: a = cov(guide, src) / (var(guide) + epsilon),
    b = mean(src) - a * mean(guide); the output averages the per-window
    coefficients: mean(a) * guide + mean(b). Window statistics use
    clamp-to-edge borders, matching the rest of the package.
    """
    guide = np.asarray(guide, dtype=np.float64)
    src = np.asarray(src, dtype=np.float64)
    if guide.ndim != 2 or src.ndim != 2:
        raise ShapeError("guided_filter operates on single-channel maps")
    if guide.shape != src.shape:
        raise ShapeError(f"guide shape {guide.shape} does not match input {src.shape}")
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if radius < 0:
        raise ParameterError(f"radius must be >= 0, got {radius}")

    mean_g = box_mean(guide, radius)
    mean_s = box_mean(src, radius)
    cov_gs = box_mean(guide * src, radius) - mean_g * mean_s
    var_g = box_mean(guide * guide, radius) - mean_g * mean_g

    a = cov_gs / (var_g + epsilon)
    b = mean_s - a * mean_g
    return box_mean(a, radius) * guide + box_mean(b, radius)
