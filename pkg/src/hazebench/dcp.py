"""Dark-channel-prior dehazing.

The dark channel of a natural haze-free patch is close to zero, so the
residual brightness of the airlight-normalized dark channel estimates how
much haze sits in front of each pixel: t = 1 - omega * dark(hazy / A).
The raw estimate is optionally refined with a guided filter before the
model inversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import minimum_filter

from .errors import ParameterError
from .guided import GuidedFilterConfig, guided_filter
from .imaging import _as_airlight, _as_image, invert_haze, luminance

__all__ = ["DcpConfig", "dark_channel", "dcp_transmission", "dcp_dehaze", "estimate_airlight"]


@dataclass(frozen=True)
class DcpConfig:
    patch_radius: int = 7
    omega: float = 0.95
    t_floor: float = 0.1
    refine: GuidedFilterConfig | None = field(default_factory=GuidedFilterConfig)

    def __post_init__(self):
        if self.patch_radius < 0:
            raise ParameterError(f"patch_radius must be >= 0, got {self.patch_radius}")
        if not 0.0 < self.omega <= 1.0:
            raise ParameterError(f"omega must lie in (0, 1], got {self.omega}")
        if not 0.0 < self.t_floor <= 1.0:
            raise ParameterError(f"t_floor must lie in (0, 1], got {self.t_floor}")


def dark_channel(image, patch_radius: int) -> np.ndarray:
    """Min over channels, then min over the (2r+1)^2 window (clamp-to-edge)."""
    img = np.asarray(image, dtype=np.float64)
    if patch_radius < 0:
        raise ParameterError(f"patch_radius must be >= 0, got {patch_radius}")
    per_pixel = img.min(axis=2) if img.ndim == 3 else img
    if patch_radius == 0:
        return per_pixel.copy()
    return minimum_filter(per_pixel, size=2 * patch_radius + 1, mode="nearest")


def dcp_transmission(hazy, airlight, cfg: DcpConfig = DcpConfig()) -> np.ndarray:
    """Dark-channel transmission estimate, refined and clamped to [t_floor, 1]."""
    img = _as_image(hazy, "hazy")
    a = _as_airlight(airlight)
    t = 1.0 - cfg.omega * dark_channel(img / a, cfg.patch_radius)
    if cfg.refine is not None:
        t = guided_filter(luminance(img), t, cfg.refine.radius, cfg.refine.epsilon)
    return np.clip(t, cfg.t_floor, 1.0)


def dcp_dehaze(hazy, airlight, cfg: DcpConfig = DcpConfig()):
    """Estimate transmission and invert the haze model.

    Returns (restored, transmission).
    """
    t = dcp_transmission(hazy, airlight, cfg)
    return invert_haze(hazy, t, airlight, cfg.t_floor), t


def estimate_airlight(image, patch_radius: int = 7, fraction: float = 0.001) -> np.ndarray:
    """Mean color of the brightest ``fraction`` of dark-channel pixels.

    Convenience estimator for interactive use; benchmark runs always take
    the airlight from the scene manifest instead.
    """
    img = _as_image(image)
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must lie in (0, 1], got {fraction}")
    dark = dark_channel(img, patch_radius).ravel()
    n = max(1, int(round(fraction * dark.size)))
    idx = np.argsort(dark, kind="stable")[-n:]
    a = img.reshape(-1, 3)[idx].mean(axis=0)
    return np.clip(a, 1e-6, 1.0)
