"""Benchmark orchestration: run every method over every haze level and
emit a deterministic CSV report plus chromaticity plots.

Rows are ordered methods-outer (canonical method order), then level
ascending, then checkers in manifest order. A method failure on one level
is recorded as a row of ``n/a`` cells and a diagnostic line in the run
metadata instead of aborting the whole run.

Determinism contract: with ``record_timing`` off (the default), two runs
over the same inputs produce byte-identical ``report.csv`` and SVG files.
The ``abs_err`` column is recomputed from the rounded ``t_est``/``t_gt``
columns so the CSV stays internally consistent under its own precision.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import mininet
from .clahe import clahe_dehaze
from .dcp import dcp_dehaze
from .errors import HazebenchError, ManifestError
from .imageio import read_image, write_image
from .imaging import invert_haze
from .manifest import RunConfig, SceneManifest, load_scene_manifest
from .metrics import (
    e_index,
    mean_chromaticity_distance,
    patch_chromaticity,
    r_index,
    trimmed_mean_region,
)
from .svgplot import ChromaSeries, emit_chromaticity_svg
from .veil import veil_dehaze, veil_to_transmission

__all__ = ["ReportRow", "BenchOutput", "run_benchmark", "emit_csv", "run_and_emit"]

CSV_HEADER = "method,level,checker,t_est,t_gt,abs_err,chroma_dist,e,r,wall_ms"


@dataclass(frozen=True)
class ReportRow:
    method: str
    level: int
    checker: str
    t_est: float | None
    t_gt: float | None
    chroma_dist: float | None
    e: float | None
    r: float | None
    wall_ms: float | None


@dataclass
class BenchOutput:
    rows: list[ReportRow]
    svg_by_level: dict[int, str]
    meta_text: str


def _fmt(value: float | None, decimals: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:.{decimals}f}"


def emit_csv(rows) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        t_est = _fmt(row.t_est, 3)
        t_gt = _fmt(row.t_gt, 3)
        if t_est == "n/a" or t_gt == "n/a":
            abs_err = "n/a"
        else:
            abs_err = f"{abs(float(t_est) - float(t_gt)):.6f}"
        lines.append(
            ",".join(
                [
                    row.method,
                    str(row.level),
                    row.checker,
                    t_est,
                    t_gt,
                    abs_err,
                    _fmt(row.chroma_dist, 6),
                    _fmt(row.e, 6),
                    _fmt(row.r, 6),
                    _fmt(row.wall_ms, 6),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _crop(image: np.ndarray, scene: SceneManifest) -> np.ndarray:
    rect = scene.crop
    if rect is None:
        return image
    if not rect.fits(image.shape[1], image.shape[0]):
        raise ManifestError(
            f"scene.crop = {rect.text()} exceeds the {image.shape[1]}x{image.shape[0]} frame"
        )
    return image[rect.y : rect.y + rect.h, rect.x : rect.x + rect.w]


def _validate_rois(scene: SceneManifest, shape: tuple[int, int]) -> None:
    height, width = shape
    for i, c in enumerate(scene.checkers):
        rects = [(f"checkers[{i}].roi", c.roi)] + [
            (f"checkers[{i}].patch_rois[{j}]", r) for j, r in enumerate(c.patch_rois)
        ]
        for path, rect in rects:
            if not rect.fits(width, height):
                raise ManifestError(f"{path} = {rect.text()} exceeds the {width}x{height} frame")
        if c.patch_rois:
            for p in scene.chroma_patches:
                if not 1 <= p <= len(c.patch_rois):
                    raise ManifestError(f"chroma patch {p} outside checkers[{i}].patch_rois")


@dataclass
class _MethodRun:
    restored: np.ndarray
    tmap: np.ndarray | None
    wall_ms: float | None


def _run_method(
    method: str, hazy: np.ndarray, airlight, cfg: RunConfig, net_params
) -> _MethodRun:
    started = time.perf_counter()
    if method == "dcp":
        restored, tmap = dcp_dehaze(hazy, airlight, cfg.dcp)
    elif method == "fast":
        restored, veil = veil_dehaze(hazy, airlight, cfg.fast)
        tmap = veil_to_transmission(veil, airlight)
    elif method == "clahe":
        restored = clahe_dehaze(hazy, cfg.clahe)
        tmap = None
    elif method == "mininet":
        refine = cfg.dcp.refine if cfg.net_refine else None
        tmap = mininet.predict_map(net_params, hazy, stride=cfg.net_stride, refine=refine)
        restored = invert_haze(hazy, tmap, airlight)
    else:
        raise ManifestError(f"unknown method {method!r}")
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return _MethodRun(restored, tmap, elapsed_ms if cfg.record_timing else None)


def run_benchmark(cfg: RunConfig) -> BenchOutput:
    scene = load_scene_manifest(cfg.manifest)
    levels = sorted(cfg.levels) if cfg.levels else [lv.level for lv in scene.levels]
    for lv in levels:
        scene.level(lv)  # unknown levels fail before any work

    net_params = None
    if "mininet" in cfg.methods:
        if cfg.net_params is None:
            raise ManifestError("method mininet requires net.params (trained weights)")
        net_params = mininet.load_params(cfg.net_params)

    haze_free = _crop(read_image(scene.resolve_path(scene.haze_free)), scene)
    _validate_rois(scene, haze_free.shape[:2])

    results: dict[tuple[str, int], _MethodRun | str] = {}
    hazy_by_level: dict[int, np.ndarray] = {}
    for lv in levels:
        spec = scene.level(lv)
        hazy = _crop(read_image(scene.resolve_path(spec.path)), scene)
        if hazy.shape != haze_free.shape:
            raise ManifestError(
                f"level {lv} image shape {hazy.shape} differs from haze-free {haze_free.shape}"
            )
        hazy_by_level[lv] = hazy
        for method in cfg.ordered_methods():
            try:
                results[(method, lv)] = _run_method(method, hazy, spec.airlight, cfg, net_params)
            except HazebenchError as exc:
                results[(method, lv)] = f"{type(exc).__name__}: {exc}"

    rows: list[ReportRow] = []
    failures: list[str] = []
    for method in cfg.ordered_methods():
        for lv in levels:
            outcome = results[(method, lv)]
            for checker in scene.checkers:
                t_gt = scene.t_ground_truth(lv, checker)
                if isinstance(outcome, str):
                    rows.append(ReportRow(method, lv, checker.name, None, t_gt, None, None, None, None))
                    continue
                t_est = (
                    trimmed_mean_region(outcome.tmap, checker.roi.region(), cfg.trim_fraction)
                    if outcome.tmap is not None
                    else None
                )
                chroma = (
                    mean_chromaticity_distance(
                        outcome.restored, haze_free, scene.chroma_regions(checker)
                    )
                    if checker.patch_rois
                    else None
                )
                rows.append(
                    ReportRow(
                        method,
                        lv,
                        checker.name,
                        t_est,
                        t_gt,
                        chroma,
                        e_index(hazy_by_level[lv], outcome.restored, cfg.edges),
                        r_index(hazy_by_level[lv], outcome.restored, cfg.edges),
                        outcome.wall_ms,
                    )
                )
            if isinstance(outcome, str):
                failures.append(f"failure: method={method} level={lv}: {outcome}")

    svg_by_level = {
        lv: _level_svg(scene, lv, haze_free, hazy_by_level[lv], cfg, results) for lv in levels
    }
    meta = _meta_text(scene, cfg, levels, rows, failures)
    return BenchOutput(rows=rows, svg_by_level=svg_by_level, meta_text=meta)


def _series_points(scene: SceneManifest, image: np.ndarray):
    charted = [c for c in scene.checkers if c.patch_rois]
    points, labels = [], []
    for checker in charted:
        for p in scene.chroma_patches:
            chroma = patch_chromaticity(image, checker.patch_rois[p - 1].region())
            points.append((chroma.r, chroma.g))
            labels.append(str(p) if len(charted) == 1 else f"{checker.name}:{p}")
    return tuple(points), tuple(labels)


def _level_svg(scene, level, haze_free, hazy, cfg: RunConfig, results) -> str:
    series = []
    for name, image in (("haze-free", haze_free), ("hazy", hazy)):
        points, labels = _series_points(scene, image)
        series.append(ChromaSeries(name=name, points=points, labels=labels))
    for method in cfg.ordered_methods():
        outcome = results[(method, level)]
        if isinstance(outcome, str):
            continue
        points, labels = _series_points(scene, outcome.restored)
        series.append(ChromaSeries(name=method, points=points, labels=()))
    return emit_chromaticity_svg(series, title=f"{scene.name} level {level}")


def _meta_text(scene, cfg: RunConfig, levels, rows, failures) -> str:
    lines = [
        f"scene = {scene.name}",
        f"manifest = {cfg.manifest}",
        f"methods = {', '.join(cfg.ordered_methods())}",
        f"levels = {', '.join(str(lv) for lv in levels)}",
        f"seed = {cfg.seed}",
        f"trim_fraction = {cfg.trim_fraction!r}",
        f"record_timing = {'true' if cfg.record_timing else 'false'}",
        f"rows = {len(rows)}",
        f"failures = {len(failures)}",
    ]
    lines.extend(failures)
    return "\n".join(lines) + "\n"


def run_and_emit(cfg: RunConfig, write_images: bool = False) -> dict[str, str]:
    """Run the benchmark and write report.csv, per-level SVGs, run_meta.txt.

    With ``write_images`` the restored frames are also saved, for eyeballing;
    those are not part of the determinism contract.
    """
    out = run_benchmark(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {}

    report_path = os.path.join(cfg.out_dir, "report.csv")
    with open(report_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_csv(out.rows))
    paths["report"] = report_path

    for lv, svg in sorted(out.svg_by_level.items()):
        svg_path = os.path.join(cfg.out_dir, f"chromaticity_{lv}.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(svg)
        paths[f"svg_{lv}"] = svg_path

    meta_path = os.path.join(cfg.out_dir, "run_meta.txt")
    with open(meta_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(out.meta_text)
    paths["meta"] = meta_path

    if write_images:
        scene = load_scene_manifest(cfg.manifest)
        levels = sorted(cfg.levels) if cfg.levels else [lv.level for lv in scene.levels]
        for lv in levels:
            spec = scene.level(lv)
            hazy = _crop(read_image(scene.resolve_path(spec.path)), scene)
            net_params = mininet.load_params(cfg.net_params) if cfg.net_params else None
            for method in cfg.ordered_methods():
                try:
                    run = _run_method(method, hazy, spec.airlight, cfg, net_params)
                except HazebenchError:
                    continue
                img_path = os.path.join(cfg.out_dir, f"{method}_level{lv}.png")
                write_image(img_path, run.restored)
                paths[f"{method}_level{lv}"] = img_path
    return paths
