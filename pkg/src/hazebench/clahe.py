"""Contrast-limited adaptive histogram equalization on the luminance channel.

The image is split into a tile grid; each tile gets its own clipped,
redistributed histogram and CDF mapping; every pixel bilinearly blends the
mappings of the four surrounding tile centers. Chroma passes through
unchanged. Tile membership is floor(x * tiles / extent), so edge tiles may
be one pixel smaller when the grid does not divide the image evenly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imaging import _as_image

__all__ = ["ClaheConfig", "clahe_dehaze", "rgb_to_ycbcr", "ycbcr_to_rgb", "tile_mappings"]

_KR, _KG, _KB = 0.299, 0.587, 0.114


@dataclass(frozen=True)
class ClaheConfig:
    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 2.0  # multiple of the uniform bin height
    bins: int = 256

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ParameterError(f"tile counts must be >= 1, got {self.tiles_x}x{self.tiles_y}")
        if not self.clip_limit > 1.0:
            raise ParameterError(f"clip_limit must be > 1, got {self.clip_limit}")
        if self.bins < 2:
            raise ParameterError(f"bins must be >= 2, got {self.bins}")


def rgb_to_ycbcr(image: np.ndarray) -> np.ndarray:
    """Full-range YCbCr from [0,1] RGB (Rec. 601 luma, 0.5 chroma offset)."""
    r, g, b = image[:, :, 0], image[:, :, 1], image[:, :, 2]
    y = _KR * r + _KG * g + _KB * b
    cb = 0.5 * (b - y) / (1.0 - _KB) + 0.5
    cr = 0.5 * (r - y) / (1.0 - _KR) + 0.5
    return np.stack([y, cb, cr], axis=2)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    y, cb, cr = ycc[:, :, 0], ycc[:, :, 1], ycc[:, :, 2]
    r = y + 2.0 * (1.0 - _KR) * (cr - 0.5)
    b = y + 2.0 * (1.0 - _KB) * (cb - 0.5)
    g = (y - _KR * r - _KB * b) / _KG
    return np.stack([r, g, b], axis=2)


def clip_and_redistribute(hist: np.ndarray, clip_limit: float) -> np.ndarray:
    """Clip each bin at clip_limit * (n / bins) and spread the excess evenly.

    Total mass is conserved by construction.
    """
    hist = np.asarray(hist, dtype=np.float64)
    limit = clip_limit * hist.sum() / hist.size
    clipped = np.minimum(hist, limit)
    excess = hist.sum() - clipped.sum()
    return clipped + excess / hist.size


def tile_mappings(lum: np.ndarray, cfg: ClaheConfig) -> np.ndarray:
    """Per-tile CDF lookup tables, shape (tiles_y, tiles_x, bins)."""
    h, w = lum.shape
    bins = cfg.bins
    binmap = np.minimum((lum * bins).astype(np.int64), bins - 1)
    ty = (np.arange(h, dtype=np.int64) * cfg.tiles_y) // h
    tx = (np.arange(w, dtype=np.int64) * cfg.tiles_x) // w
    flat = (ty[:, None] * cfg.tiles_x + tx[None, :]) * bins + binmap
    counts = np.bincount(flat.ravel(), minlength=cfg.tiles_y * cfg.tiles_x * bins)
    hists = counts.reshape(cfg.tiles_y, cfg.tiles_x, bins).astype(np.float64)

    maps = np.empty_like(hists)
    for j in range(cfg.tiles_y):
        for i in range(cfg.tiles_x):
            redist = clip_and_redistribute(hists[j, i], cfg.clip_limit)
            maps[j, i] = np.cumsum(redist) / hists[j, i].sum()
    return maps


def clahe_dehaze(hazy, cfg: ClaheConfig = ClaheConfig()) -> np.ndarray:
    """Equalize luminance tile-by-tile with bilinear mapping interpolation."""
    img = _as_image(hazy, "hazy")
    h, w = img.shape[:2]
    if h // cfg.tiles_y < 2 or w // cfg.tiles_x < 2:
        raise ParameterError(
            f"tile grid {cfg.tiles_x}x{cfg.tiles_y} leaves tiles under 2x2 pixels "
            f"for a {w}x{h} image"
        )
    ycc = rgb_to_ycbcr(img)
    lum = np.clip(ycc[:, :, 0], 0.0, 1.0)
    maps = tile_mappings(lum, cfg)
    binmap = np.minimum((lum * cfg.bins).astype(np.int64), cfg.bins - 1)

    # fractional position of each pixel relative to the tile-center grid
    gx = np.clip((np.arange(w) + 0.5) * cfg.tiles_x / w - 0.5, 0.0, cfg.tiles_x - 1.0)
    gy = np.clip((np.arange(h) + 0.5) * cfg.tiles_y / h - 0.5, 0.0, cfg.tiles_y - 1.0)
    ix0 = gx.astype(np.int64)
    iy0 = gy.astype(np.int64)
    ix1 = np.minimum(ix0 + 1, cfg.tiles_x - 1)
    iy1 = np.minimum(iy0 + 1, cfg.tiles_y - 1)
    fx = (gx - ix0)[None, :]
    fy = (gy - iy0)[:, None]

    row0 = (1.0 - fx) * maps[iy0[:, None], ix0[None, :], binmap] + fx * maps[
        iy0[:, None], ix1[None, :], binmap
    ]
    row1 = (1.0 - fx) * maps[iy1[:, None], ix0[None, :], binmap] + fx * maps[
        iy1[:, None], ix1[None, :], binmap
    ]
    out_lum = (1.0 - fy) * row0 + fy * row1

    out = ycc.copy()
    out[:, :, 0] = out_lum
    return np.clip(ycbcr_to_rgb(out), 0.0, 1.0)
