"""Atmospheric-veil dehazing (FAST-style visibility restoration).

Rather than a multiplicative transmission, this family estimates the
additive achromatic veil V(x) = A(1 - t(x)) directly from the per-pixel
channel minimum using medians, then removes it:

    W = min over channels;  B = median(W);  C = B - median(|W - B|)
    V = clamp(p * C, 0, W)
    restored = (hazy - V) / (1 - V / a_gray)

with a_gray the channel mean of the supplied airlight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

from .errors import ParameterError
from .imaging import _as_airlight, _as_image

__all__ = ["VeilConfig", "veil_dehaze", "veil_to_transmission"]


@dataclass(frozen=True)
class VeilConfig:
    window: int = 20  # median-filter half-size
    p: float = 0.95  # veil strength
    t_floor: float = 0.1  # denominator floor during removal

    def __post_init__(self):
        if self.window < 1:
            raise ParameterError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.t_floor <= 1.0:
            raise ParameterError(f"t_floor must lie in (0, 1], got {self.t_floor}")


def veil_dehaze(hazy, airlight, cfg: VeilConfig = VeilConfig()):
    """Estimate and remove the atmospheric veil.

    Returns (restored, veil). The veil satisfies 0 <= V <= min-channel
    everywhere, so pixels with a zero channel are left untouched.
    """
    img = _as_image(hazy, "hazy")
    a = _as_airlight(airlight)
    size = 2 * cfg.window + 1
    h, w = img.shape[:2]
    if size > h or size > w:
        raise ParameterError(f"median window {size} exceeds image size {h}x{w}")

    whiteness = img.min(axis=2)
    local = median_filter(whiteness, size=size, mode="nearest")
    smooth = local - median_filter(np.abs(whiteness - local), size=size, mode="nearest")
    veil = np.clip(cfg.p * smooth, 0.0, whiteness)

    a_gray = float(a.mean())
    denom = np.maximum(1.0 - veil / a_gray, cfg.t_floor)
    restored = (img - veil[:, :, None]) / denom[:, :, None]
    return np.clip(restored, 0.0, 1.0), veil


def veil_to_transmission(veil, airlight) -> np.ndarray:
    """Derived transmission t = 1 - V / a_gray, clamped to [0, 1].

    The veil model is a different parameterization of the same imaging
    equation; this conversion lets veil methods appear in transmission
    reports and is flagged as derived there.
    """
    a = _as_airlight(airlight)
    v = np.asarray(veil, dtype=np.float64)
    return np.clip(1.0 - v / float(a.mean()), 0.0, 1.0)
