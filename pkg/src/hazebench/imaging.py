"""Koschmieder haze imaging model.

A hazy observation is a per-pixel convex combination of the scene radiance
and the airlight:

    hazy = scene * t + airlight * (1 - t)

where the transmission ``t = exp(-beta * distance)`` for a homogeneous
medium with scattering coefficient ``beta`` (per meter).

Conventions used throughout the package:

* color images are float arrays of shape (H, W, 3) with samples in [0, 1]
* transmission maps and other single-channel maps are (H, W) in [0, 1]
* airlight is a length-3 RGB triple with every component in (0, 1]
* depth maps are (H, W) distances in meters; NaN marks unknown depth

All functions are pure; none mutate their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ParameterError, ShapeError

__all__ = [
    "apply_haze",
    "invert_haze",
    "transmission_from_depth",
    "depth_from_transmission",
    "luminance",
    "srgb_to_linear",
    "linear_to_srgb",
]


def _as_image(arr, name: str = "image") -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != 3 or out.shape[2] != 3:
        raise ShapeError(f"{name} must have shape (H, W, 3), got {out.shape}")
    if not np.isfinite(out).all():
        raise DomainError(f"{name} contains non-finite samples")
    return out


def _as_airlight(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64).reshape(-1)
    if out.shape != (3,):
        raise ShapeError(f"airlight must be an RGB triple, got shape {np.shape(a)}")
    if not np.isfinite(out).all() or (out <= 0).any() or (out > 1).any():
        raise ParameterError(f"airlight components must lie in (0, 1], got {out.tolist()}")
    return out


def _as_transmission(t, shape, name: str = "t") -> np.ndarray:
    """Accept a scalar or an (H, W) map matching the image; return broadcastable array."""
    out = np.asarray(t, dtype=np.float64)
    if out.ndim == 0:
        pass
    elif out.ndim == 2:
        if out.shape != shape:
            raise ShapeError(f"{name} map shape {out.shape} does not match image {shape}")
    else:
        raise ShapeError(f"{name} must be a scalar or an (H, W) map, got ndim={out.ndim}")
    if not np.isfinite(out).all():
        raise DomainError(f"{name} contains non-finite values")
    if (out < 0).any() or (out > 1).any():
        raise DomainError(f"{name} values must lie in [0, 1]")
    return out


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0:
        raise ParameterError(f"beta must be finite and > 0, got {beta}")
    return beta


def apply_haze(image, t, airlight) -> np.ndarray:
    """Simulate haze: out = image * t + airlight * (1 - t).

    ``t`` may be a scalar or an (H, W) transmission map matching the image.
    The output is a convex combination of the input and the airlight, so it
    stays inside [0, 1] for valid inputs.
    """
    img = _as_image(image)
    a = _as_airlight(airlight)
    tt = _as_transmission(t, img.shape[:2])
    if tt.ndim == 2:
        tt = tt[:, :, None]
    return img * tt + a * (1.0 - tt)


def invert_haze(hazy, t, airlight, t_floor: float = 0.1) -> np.ndarray:
    """Invert the haze model: out = (hazy - airlight) / max(t, t_floor) + airlight.

    The division is floored at ``t_floor`` to avoid blow-up in dense haze;
    the restored image is clamped to [0, 1].
    """
    t_floor = float(t_floor)
    if not 0.0 < t_floor <= 1.0:
        raise ParameterError(f"t_floor must lie in (0, 1], got {t_floor}")
    img = _as_image(hazy, "hazy")
    a = _as_airlight(airlight)
    tt = np.maximum(_as_transmission(t, img.shape[:2]), t_floor)
    if tt.ndim == 2:
        tt = tt[:, :, None]
    restored = (img - a) / tt + a
    return np.clip(restored, 0.0, 1.0)


def transmission_from_depth(depth, beta):
    """t = exp(-beta * depth). Unknown depths (NaN) stay NaN.

    ``depth`` may be a scalar or an array of distances in meters; the result
    has the same shape. Negative known depths are rejected.
    """
    beta = check_beta(beta)
    d = np.asarray(depth, dtype=np.float64)
    known = ~np.isnan(d)
    if np.isinf(d).any():
        raise DomainError("depth contains infinite values")
    if (d[known] < 0).any():
        raise DomainError("depth must be non-negative")
    t = np.exp(-beta * d)
    if d.ndim == 0:
        return float(t)
    return t


def depth_from_transmission(t, beta):
    """d = -ln(t) / beta, the analytic inverse of transmission_from_depth."""
    beta = check_beta(beta)
    tt = np.asarray(t, dtype=np.float64)
    if (tt <= 0).any() or (tt > 1).any() or not np.isfinite(tt).all():
        raise DomainError(f"transmission must lie in (0, 1], got {t}")
    d = -np.log(tt) / beta
    if tt.ndim == 0:
        return float(d)
    return d


def luminance(image) -> np.ndarray:
    """Rec. 601 luma: Y = 0.299 R + 0.587 G + 0.114 B."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"expected (H, W, 3) or (H, W), got {img.shape}")
    return 0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]


def srgb_to_linear(x) -> np.ndarray:
    """Standard sRGB electro-optical decode for stored values in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.04045, x / 12.92, ((x + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(x) -> np.ndarray:
    """Inverse of srgb_to_linear."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.0031308, x * 12.92, 1.055 * np.maximum(x, 0.0) ** (1 / 2.4) - 0.055)
