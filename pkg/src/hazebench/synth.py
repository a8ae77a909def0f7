"""Synthetic hazy training data generated with the haze imaging model.

Patches are cropped from haze-free source images and hazed with a per-patch
transmission drawn uniformly from a configured range, giving an exact
ground-truth transmission for each sample. A procedural texture generator
is included so the whole pipeline runs without any external data.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .imageio import read_image, write_image
from .imaging import apply_haze, transmission_from_depth

__all__ = [
    "SynthConfig",
    "PatchSample",
    "synthesize_patch_dataset",
    "synthesize_scene",
    "procedural_texture",
    "save_dataset",
    "load_dataset",
    "build_demo_scene",
]


@dataclass(frozen=True)
class SynthConfig:
    count: int
    patch_size: int = 16
    t_range: tuple[float, float] = (0.05, 1.0)
    airlight: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError(f"count must be >= 1, got {self.count}")
        if self.patch_size < 1:
            raise ParameterError(f"patch_size must be >= 1, got {self.patch_size}")
        lo, hi = self.t_range
        if not 0.0 < lo <= hi <= 1.0:
            raise ParameterError(f"t_range must satisfy 0 < lo <= hi <= 1, got {self.t_range}")


@dataclass
class PatchSample:
    patch: np.ndarray  # (patch_size, patch_size, 3)
    t_true: float


def synthesize_patch_dataset(sources, cfg: SynthConfig) -> list[PatchSample]:
    """Draw seeded (source, location, t) triples and haze the cropped patches.

    The draw order is fixed (source index, then row, column, then t for each
    sample), so a given seed always produces bit-identical output.
    """
    sources = [np.asarray(s, dtype=np.float64) for s in sources]
    if not sources:
        raise ParameterError("at least one source image is required")
    ps = cfg.patch_size
    for k, src in enumerate(sources):
        if src.ndim != 3 or src.shape[2] != 3:
            raise ParameterError(f"source {k} is not an (H, W, 3) image: shape {src.shape}")
        if src.shape[0] < ps or src.shape[1] < ps:
            raise ParameterError(
                f"source {k} is {src.shape[1]}x{src.shape[0]}, smaller than patch size {ps}"
            )

    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.t_range
    samples = []
    for _ in range(cfg.count):
        k = int(rng.integers(len(sources)))
        src = sources[k]
        y = int(rng.integers(src.shape[0] - ps + 1))
        x = int(rng.integers(src.shape[1] - ps + 1))
        t = float(rng.uniform(lo, hi))
        crop = src[y : y + ps, x : x + ps]
        samples.append(PatchSample(apply_haze(crop, t, cfg.airlight), t))
    return samples


def synthesize_scene(image, depth, beta, airlight) -> np.ndarray:
    """Haze a whole image from its depth map: t = exp(-beta * depth) per pixel."""
    img = np.asarray(image, dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    if d.shape != img.shape[:2]:
        raise ParameterError(f"depth shape {d.shape} does not match image {img.shape[:2]}")
    if np.isnan(d).any():
        raise DomainError("scene synthesis requires all depths known (no NaN)")
    return apply_haze(img, transmission_from_depth(d, beta), airlight)


def procedural_texture(height: int, width: int, seed: int = 0) -> np.ndarray:
    """Seeded haze-free test image: color gradients, checkerboards, patches.

    Spans dark to bright values so min-channel statistics stay informative.
    """
    rng = np.random.default_rng(seed)
    yy = np.linspace(0.0, 1.0, height)[:, None, None]
    xx = np.linspace(0.0, 1.0, width)[None, :, None]
    c0 = rng.uniform(0.0, 0.35, size=3)
    c1 = rng.uniform(0.6, 1.0, size=3)
    wx = rng.uniform(0.2, 0.8)
    img = c0 + (c1 - c0) * (wx * xx + (1.0 - wx) * yy)

    cell = int(rng.integers(3, 9))
    board = ((np.arange(height)[:, None] // cell + np.arange(width)[None, :] // cell) % 2).astype(
        np.float64
    )
    dark = rng.uniform(0.0, 0.12, size=3)
    lite = rng.uniform(0.5, 1.0, size=3)
    checks = dark + (lite - dark) * board[:, :, None]
    blend = rng.uniform(0.35, 0.65)
    img = (1.0 - blend) * img + blend * checks

    for _ in range(6):
        h = int(rng.integers(max(2, height // 8), max(3, height // 3)))
        w = int(rng.integers(max(2, width // 8), max(3, width // 3)))
        y = int(rng.integers(0, height - h + 1))
        x = int(rng.integers(0, width - w + 1))
        img[y : y + h, x : x + w] = rng.uniform(0.0, 1.0, size=3)
    return np.clip(img, 0.0, 1.0)


def save_dataset(samples, dirpath) -> None:
    """Write patches as 16-bit PNGs plus an index.csv of filename,t_true."""
    os.makedirs(dirpath, exist_ok=True)
    with open(os.path.join(dirpath, "index.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "t_true"])
        for i, sample in enumerate(samples):
            name = f"patch_{i:06d}.png"
            write_image(os.path.join(dirpath, name), sample.patch, bitdepth=16)
            writer.writerow([name, f"{sample.t_true:.6f}"])


def load_dataset(dirpath) -> list[PatchSample]:
    index = os.path.join(dirpath, "index.csv")
    if not os.path.exists(index):
        raise FileNotFoundError(index)
    samples = []
    with open(index, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            patch = read_image(os.path.join(dirpath, row["filename"]))
            samples.append(PatchSample(patch, float(row["t_true"])))
    return samples


# ---------------------------------------------------------------------------
# self-contained demo scene
# ---------------------------------------------------------------------------

# per-level scattering coefficients (thousandths of 1/m) for the walkthrough
DEMO_BETA_E3 = {5: 103.69, 6: 93.63, 7: 83.57, 8: 50.7, 9: 17.84}
DEMO_AIRLIGHT = (1.0, 1.0, 1.0)
DEMO_DISTANCES_M = (4.35, 7.0)


def _patch_grid(x0: int, y0: int):
    """A 6x4 grid of 4x4 squares, numbered 1..24 in reading order."""
    from .manifest import Rect

    return tuple(
        Rect(x0 + 5 * col, y0 + 5 * row, 4, 4) for row in range(4) for col in range(6)
    )


def build_demo_scene(out_dir, seed: int = 0, size=(128, 96), levels=(5, 6, 7, 8, 9)) -> str:
    """Write a fully synthetic benchmark scene and return the manifest path.

    The scene is a procedural texture split into a near plane and a far
    plane; each half carries a checker region at a known distance plus a
    24-square grid standing in for a color chart.
    """
    from .manifest import CheckerSpec, LevelSpec, Rect, SceneManifest, dump_manifest

    width, height = size
    if width < 80 or height < 64:
        raise ParameterError(f"demo scene needs at least 80x64 pixels, got {width}x{height}")
    bad = [lv for lv in levels if lv not in DEMO_BETA_E3]
    if bad:
        raise ParameterError(f"no demo haze density for level {bad[0]}; choose from 5..9")

    os.makedirs(out_dir, exist_ok=True)
    scene = procedural_texture(height, width, seed=seed)
    depth = np.full((height, width), DEMO_DISTANCES_M[0])
    depth[:, width // 2 :] = DEMO_DISTANCES_M[1]
    write_image(os.path.join(out_dir, "scene.png"), scene, bitdepth=16)

    half = width // 2
    checkers = []
    for name, x0, dist in (("near", 0, DEMO_DISTANCES_M[0]), ("far", half, DEMO_DISTANCES_M[1])):
        checkers.append(
            CheckerSpec(
                name=name,
                distance_m=dist,
                roi=Rect(x0 + 8, height // 2, min(32, half - 16), min(32, height // 2 - 8)),
                patch_rois=_patch_grid(x0 + 4, 4),
            )
        )

    specs = []
    for lv in sorted(levels):
        beta_e3 = DEMO_BETA_E3[lv]
        hazy = synthesize_scene(scene, depth, beta_e3 / 1000.0, DEMO_AIRLIGHT)
        name = f"level{lv}.png"
        write_image(os.path.join(out_dir, name), hazy, bitdepth=16)
        specs.append(LevelSpec(level=lv, path=name, beta_e3=beta_e3, airlight=DEMO_AIRLIGHT))

    manifest = SceneManifest(
        name="demo",
        haze_free="scene.png",
        levels=tuple(specs),
        checkers=tuple(checkers),
        base_dir=str(out_dir),
    )
    manifest_path = os.path.join(out_dir, "manifest.txt")
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dump_manifest(manifest))
    return manifest_path
