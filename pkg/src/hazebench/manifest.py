"""Scene manifests and benchmark run configuration.

Both are stored in a small line-oriented text format:

    # comment
    scene.name = hallway
    levels[0].level = 5
    levels[0].path = images/level5.png
    levels[0].beta_e3 = 103.69
    levels[0].airlight = 0.92, 0.94, 0.97

One ``dotted.path[index] = value`` per line. Values are integers, floats,
bare strings, or comma-separated tuples of those. Array indices must be
contiguous from zero. Unknown or duplicate keys are rejected by name, so
a typo fails loudly instead of silently using a default.

Scattering coefficients are stored as ``beta_e3``, in thousandths of the
per-metre coefficient, matching how fog densities are usually quoted;
``SceneManifest.beta`` converts to 1/m. Rectangles are ``x, y, w, h`` in
pixel coordinates of the cropped frame (after ``scene.crop``, if any).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .clahe import ClaheConfig
from .dcp import DcpConfig
from .errors import ManifestError
from .guided import GuidedFilterConfig
from .metrics import EdgeMetricConfig, RegionMask
from .veil import VeilConfig

__all__ = [
    "Rect",
    "LevelSpec",
    "CheckerSpec",
    "SceneManifest",
    "RunConfig",
    "METHODS",
    "DEFAULT_CHROMA_PATCHES",
    "parse_manifest_text",
    "load_scene_manifest",
    "dump_manifest",
    "load_run_config",
]

METHODS = ("dcp", "fast", "clahe", "mininet")

# Strongly colored chart squares used for the color-shift metric, numbered
# 1..24 in reading order as printed on the chart.
DEFAULT_CHROMA_PATCHES = (2, 6, 7, 13, 14, 16, 17, 19)


# ---------------------------------------------------------------------------
# key-tree text format
# ---------------------------------------------------------------------------


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_value(text: str):
    if "," in text:
        return tuple(_parse_scalar(part.strip()) for part in text.split(","))
    return _parse_scalar(text)


def _split_path(key: str, lineno: int) -> list:
    """'a.b[2].c' -> ['a', 'b', 2, 'c']"""
    tokens: list = []
    for part in key.split("."):
        name, bracket, rest = part.partition("[")
        if not name or not name.replace("_", "").isalnum():
            raise ManifestError(f"line {lineno}: malformed key {key!r}")
        tokens.append(name)
        while bracket:
            idx, close, rest = rest.partition("]")
            if not close or not idx.isdigit():
                raise ManifestError(f"line {lineno}: malformed index in key {key!r}")
            tokens.append(int(idx))
            bracket, _, rest = rest.partition("[")
    return tokens


def parse_manifest_text(text: str) -> dict:
    """Parse the text format into nested dicts and lists."""
    tree: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ManifestError(f"line {lineno}: expected 'key = value', got {line!r}")
        tokens = _split_path(key.strip(), lineno)
        node = tree
        for tok in tokens[:-1]:
            # arrays are built as int-keyed dicts and converted afterwards
            node = node.setdefault(tok, {})
            if not isinstance(node, dict):
                raise ManifestError(f"line {lineno}: key {key.strip()!r} conflicts with an earlier value")
        leaf = tokens[-1]
        if leaf in node and isinstance(node[leaf], dict):
            raise ManifestError(f"line {lineno}: key {key.strip()!r} conflicts with an earlier value")
        if leaf in node:
            raise ManifestError(f"line {lineno}: duplicate key {key.strip()!r}")
        node[leaf] = _parse_value(value.strip())
    return _finalize(tree, "")


def _finalize(node, path: str):
    """Convert int-keyed dicts to lists, checking indices run 0..n-1."""
    if not isinstance(node, dict):
        return node
    if node and all(isinstance(k, int) for k in node):
        indices = sorted(node)
        if indices != list(range(len(indices))):
            raise ManifestError(f"array {path or '<root>'} has non-contiguous indices {indices}")
        return [_finalize(node[i], f"{path}[{i}]") for i in indices]
    if any(isinstance(k, int) for k in node):
        raise ManifestError(f"key {path or '<root>'} mixes array indices and named fields")
    return {k: _finalize(v, f"{path}.{k}" if path else k) for k, v in node.items()}


_MISSING = object()


class _Section:
    """Dict wrapper that tracks consumption so leftovers can be reported."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ManifestError(f"key {path} must be a section, not a value")
        self._data = dict(data)
        self._path = path

    def take(self, name: str, default=_MISSING):
        if name in self._data:
            return self._data.pop(name)
        if default is _MISSING:
            raise ManifestError(f"missing required key {self._join(name)}")
        return default

    def require(self, name: str):
        return self.take(name)

    def section(self, name: str):
        data = self.take(name, None)
        return _Section(data if data is not None else {}, self._join(name))

    def array(self, name: str, required: bool = False) -> list:
        data = self.take(name, None)
        if data is None:
            if required:
                raise ManifestError(f"missing required key {self._join(name)}")
            return []
        if not isinstance(data, list):
            raise ManifestError(f"key {self._join(name)} must be an array")
        return data

    def _join(self, name: str) -> str:
        return f"{self._path}.{name}" if self._path else name

    def item_path(self, name: str) -> str:
        return self._join(name)

    def finish(self):
        if self._data:
            leftover = sorted(self._join(str(k)) for k in self._data)
            raise ManifestError(f"unknown key {leftover[0]}")


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ManifestError(f"key {path} must be an integer, got {value!r}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ManifestError(f"key {path} must be a number, got {value!r}")
    return float(value)


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ManifestError(f"key {path} must be a string, got {value!r}")
    return value


def _as_bool(value, path: str) -> bool:
    if value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ManifestError(f"key {path} must be a boolean (0/1/true/false), got {value!r}")


def _as_rect(value, path: str) -> "Rect":
    if not (isinstance(value, tuple) and len(value) == 4):
        raise ManifestError(f"key {path} must be 'x, y, w, h', got {value!r}")
    x, y, w, h = (_as_int(v, path) for v in value)
    if w < 1 or h < 1 or x < 0 or y < 0:
        raise ManifestError(f"key {path} is not a valid rectangle: {value!r}")
    return Rect(x, y, w, h)


def _as_triple(value, path: str) -> tuple[float, float, float]:
    if not (isinstance(value, tuple) and len(value) == 3):
        raise ManifestError(f"key {path} must hold three numbers, got {value!r}")
    out = tuple(_as_float(v, path) for v in value)
    if any(not 0.0 < v <= 1.0 for v in out):
        raise ManifestError(f"key {path} components must lie in (0, 1], got {value!r}")
    return out


def _as_int_tuple(value, path: str) -> tuple[int, ...]:
    items = value if isinstance(value, tuple) else (value,)
    return tuple(_as_int(v, path) for v in items)


# ---------------------------------------------------------------------------
# scene manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def region(self) -> RegionMask:
        return RegionMask(rect=(self.x, self.y, self.w, self.h))

    def fits(self, width: int, height: int) -> bool:
        return self.x + self.w <= width and self.y + self.h <= height

    def text(self) -> str:
        return f"{self.x}, {self.y}, {self.w}, {self.h}"


@dataclass(frozen=True)
class LevelSpec:
    level: int
    path: str
    beta_e3: float
    airlight: tuple[float, float, float]

    @property
    def beta(self) -> float:
        """Scattering coefficient in 1/m."""
        return self.beta_e3 / 1000.0


@dataclass(frozen=True)
class CheckerSpec:
    name: str
    distance_m: float
    roi: Rect
    patch_rois: tuple[Rect, ...] = ()


@dataclass(frozen=True)
class SceneManifest:
    name: str
    haze_free: str
    levels: tuple[LevelSpec, ...]
    checkers: tuple[CheckerSpec, ...]
    crop: Rect | None = None
    chroma_patches: tuple[int, ...] = DEFAULT_CHROMA_PATCHES
    base_dir: str = "."

    def level(self, level: int) -> LevelSpec:
        for spec in self.levels:
            if spec.level == level:
                return spec
        raise ManifestError(f"manifest defines no haze level {level}")

    def t_ground_truth(self, level: int, checker: CheckerSpec) -> float:
        return math.exp(-self.level(level).beta * checker.distance_m)

    def resolve_path(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def chroma_regions(self, checker: CheckerSpec) -> list[RegionMask]:
        """Regions of the strongly colored chart squares (1-based numbers)."""
        if not checker.patch_rois:
            return []
        return [checker.patch_rois[p - 1].region() for p in self.chroma_patches]


def _build_scene(tree: dict, base_dir: str) -> SceneManifest:
    root = _Section(tree, "")
    scene = root.section("scene")
    name = _as_str(scene.require("name"), "scene.name")
    haze_free = _as_str(scene.require("haze_free"), "scene.haze_free")
    crop_val = scene.take("crop", None)
    crop = _as_rect(crop_val, "scene.crop") if crop_val is not None else None
    scene.finish()

    levels = []
    seen_levels = set()
    for i, entry in enumerate(root.array("levels", required=True)):
        sec = _Section(entry, f"levels[{i}]")
        spec = LevelSpec(
            level=_as_int(sec.require("level"), f"levels[{i}].level"),
            path=_as_str(sec.require("path"), f"levels[{i}].path"),
            beta_e3=_as_float(sec.require("beta_e3"), f"levels[{i}].beta_e3"),
            airlight=_as_triple(sec.require("airlight"), f"levels[{i}].airlight"),
        )
        sec.finish()
        if spec.beta_e3 <= 0:
            raise ManifestError(f"levels[{i}].beta_e3 must be > 0, got {spec.beta_e3}")
        if spec.level in seen_levels:
            raise ManifestError(f"levels[{i}].level duplicates level {spec.level}")
        seen_levels.add(spec.level)
        levels.append(spec)
    levels.sort(key=lambda s: s.level)

    checkers = []
    for i, entry in enumerate(root.array("checkers", required=True)):
        sec = _Section(entry, f"checkers[{i}]")
        rois = [
            _as_rect(v, f"checkers[{i}].patch_rois[{j}]")
            for j, v in enumerate(sec.array("patch_rois"))
        ]
        spec = CheckerSpec(
            name=_as_str(sec.require("name"), f"checkers[{i}].name"),
            distance_m=_as_float(sec.require("distance_m"), f"checkers[{i}].distance_m"),
            roi=_as_rect(sec.require("roi"), f"checkers[{i}].roi"),
            patch_rois=tuple(rois),
        )
        sec.finish()
        if spec.distance_m <= 0:
            raise ManifestError(f"checkers[{i}].distance_m must be > 0, got {spec.distance_m}")
        if spec.patch_rois and len(spec.patch_rois) != 24:
            raise ManifestError(
                f"checkers[{i}].patch_rois holds {len(spec.patch_rois)} entries, expected 24"
            )
        checkers.append(spec)

    chroma_val = root.take("chroma_patches", None)
    chroma = (
        _as_int_tuple(chroma_val, "chroma_patches")
        if chroma_val is not None
        else DEFAULT_CHROMA_PATCHES
    )
    root.finish()

    manifest = SceneManifest(
        name=name,
        haze_free=haze_free,
        levels=tuple(levels),
        checkers=tuple(checkers),
        crop=crop,
        chroma_patches=chroma,
        base_dir=base_dir,
    )
    _validate_scene(manifest)
    return manifest


def _validate_scene(m: SceneManifest) -> None:
    if not m.levels:
        raise ManifestError("manifest defines no haze levels")
    if not m.checkers:
        raise ManifestError("manifest defines no checkers")
    for p in m.chroma_patches:
        if not 1 <= p <= 24:
            raise ManifestError(f"chroma_patches entry {p} is outside 1..24")
    if m.crop is not None:
        for i, c in enumerate(m.checkers):
            rects = [(f"checkers[{i}].roi", c.roi)] + [
                (f"checkers[{i}].patch_rois[{j}]", r) for j, r in enumerate(c.patch_rois)
            ]
            for path, rect in rects:
                if not rect.fits(m.crop.w, m.crop.h):
                    raise ManifestError(
                        f"{path} = {rect.text()} exceeds the {m.crop.w}x{m.crop.h} crop"
                    )


def load_scene_manifest(path) -> SceneManifest:
    with open(path, "r", encoding="utf-8") as fh:
        tree = parse_manifest_text(fh.read())
    return _build_scene(tree, os.path.dirname(os.path.abspath(path)))


def dump_manifest(m: SceneManifest) -> str:
    """Render a scene manifest back to its text form (round-trips)."""
    lines = [f"scene.name = {m.name}", f"scene.haze_free = {m.haze_free}"]
    if m.crop is not None:
        lines.append(f"scene.crop = {m.crop.text()}")
    for i, lv in enumerate(m.levels):
        lines.append(f"levels[{i}].level = {lv.level}")
        lines.append(f"levels[{i}].path = {lv.path}")
        lines.append(f"levels[{i}].beta_e3 = {lv.beta_e3!r}")
        lines.append(f"levels[{i}].airlight = {', '.join(repr(a) for a in lv.airlight)}")
    for i, c in enumerate(m.checkers):
        lines.append(f"checkers[{i}].name = {c.name}")
        lines.append(f"checkers[{i}].distance_m = {c.distance_m!r}")
        lines.append(f"checkers[{i}].roi = {c.roi.text()}")
        for j, r in enumerate(c.patch_rois):
            lines.append(f"checkers[{i}].patch_rois[{j}] = {r.text()}")
    lines.append(f"chroma_patches = {', '.join(str(p) for p in m.chroma_patches)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    manifest: str
    methods: tuple[str, ...] = METHODS
    levels: tuple[int, ...] = ()  # empty means every level in the manifest
    out_dir: str = "bench_out"
    seed: int = 0
    trim_fraction: float = 0.15
    record_timing: bool = False
    dcp: DcpConfig = field(default_factory=DcpConfig)
    fast: VeilConfig = field(default_factory=VeilConfig)
    clahe: ClaheConfig = field(default_factory=ClaheConfig)
    edges: EdgeMetricConfig = field(default_factory=EdgeMetricConfig)
    net_params: str | None = None
    net_stride: int = 4
    net_refine: bool = True

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ManifestError(f"unknown method {bad[0]!r}; choose from {', '.join(METHODS)}")
        if not self.methods:
            raise ManifestError("run.methods must name at least one method")
        if len(set(self.methods)) != len(self.methods):
            raise ManifestError("run.methods lists a method twice")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise ManifestError(f"run.trim_fraction must lie in [0, 0.5), got {self.trim_fraction}")
        if self.net_stride < 1:
            raise ManifestError(f"net.stride must be >= 1, got {self.net_stride}")

    def ordered_methods(self) -> tuple[str, ...]:
        return tuple(m for m in METHODS if m in self.methods)


def _method_tuple(value, path: str) -> tuple[str, ...]:
    items = value if isinstance(value, tuple) else (value,)
    return tuple(_as_str(v, path) for v in items)


def load_run_config(path, manifest_override: str | None = None) -> RunConfig:
    """Run configuration in the same text format; every key is optional
    except ``run.manifest`` (which a command-line argument may supply)."""
    with open(path, "r", encoding="utf-8") as fh:
        tree = parse_manifest_text(fh.read())
    root = _Section(tree, "")
    run = root.section("run")
    manifest_path = run.take("manifest", None)
    if manifest_path is not None:
        manifest_path = _as_str(manifest_path, "run.manifest")
    if manifest_override is not None:
        manifest_path = manifest_override
    if manifest_path is None:
        raise ManifestError("missing required key run.manifest")
    if not os.path.isabs(manifest_path) and manifest_override is None:
        manifest_path = os.path.join(os.path.dirname(os.path.abspath(path)), manifest_path)

    methods_val = run.take("methods", None)
    levels_val = run.take("levels", None)
    kwargs = dict(
        manifest=manifest_path,
        out_dir=_as_str(run.take("out_dir", "bench_out"), "run.out_dir"),
        seed=_as_int(run.take("seed", 0), "run.seed"),
        trim_fraction=_as_float(run.take("trim_fraction", 0.15), "run.trim_fraction"),
        record_timing=_as_bool(run.take("record_timing", 0), "run.record_timing"),
    )
    if methods_val is not None:
        kwargs["methods"] = _method_tuple(methods_val, "run.methods")
    if levels_val is not None:
        kwargs["levels"] = _as_int_tuple(levels_val, "run.levels")
    run.finish()

    dcp = root.section("dcp")
    refine = dcp.section("refine")
    refine_cfg = GuidedFilterConfig(
        radius=_as_int(refine.take("radius", 30), "dcp.refine.radius"),
        epsilon=_as_float(refine.take("epsilon", 1e-3), "dcp.refine.epsilon"),
    )
    refine.finish()
    kwargs["dcp"] = DcpConfig(
        patch_radius=_as_int(dcp.take("patch_radius", 7), "dcp.patch_radius"),
        omega=_as_float(dcp.take("omega", 0.95), "dcp.omega"),
        t_floor=_as_float(dcp.take("t_floor", 0.1), "dcp.t_floor"),
        refine=refine_cfg,
    )
    dcp.finish()

    fast = root.section("fast")
    kwargs["fast"] = VeilConfig(
        window=_as_int(fast.take("window", 20), "fast.window"),
        p=_as_float(fast.take("p", 0.95), "fast.p"),
        t_floor=_as_float(fast.take("t_floor", 0.1), "fast.t_floor"),
    )
    fast.finish()

    clahe = root.section("clahe")
    kwargs["clahe"] = ClaheConfig(
        tiles_x=_as_int(clahe.take("tiles_x", 8), "clahe.tiles_x"),
        tiles_y=_as_int(clahe.take("tiles_y", 8), "clahe.tiles_y"),
        clip_limit=_as_float(clahe.take("clip_limit", 2.0), "clahe.clip_limit"),
        bins=_as_int(clahe.take("bins", 256), "clahe.bins"),
    )
    clahe.finish()

    net = root.section("net")
    net_params = net.take("params", None)
    if net_params is not None:
        net_params = _as_str(net_params, "net.params")
        if not os.path.isabs(net_params):
            net_params = os.path.join(os.path.dirname(os.path.abspath(path)), net_params)
    kwargs["net_params"] = net_params
    kwargs["net_stride"] = _as_int(net.take("stride", 4), "net.stride")
    kwargs["net_refine"] = _as_bool(net.take("refine", 1), "net.refine")
    net.finish()

    edges = root.section("edges")
    kwargs["edges"] = EdgeMetricConfig(
        threshold=_as_float(edges.take("threshold", 0.05), "edges.threshold"),
        ratio_clamp=_as_float(edges.take("ratio_clamp", 10.0), "edges.ratio_clamp"),
    )
    edges.finish()
    root.finish()
    return RunConfig(**kwargs)
