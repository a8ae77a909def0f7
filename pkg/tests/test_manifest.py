import math

import pytest

from hazebench.errors import ManifestError
from hazebench.manifest import (
    DEFAULT_CHROMA_PATCHES,
    Rect,
    RunConfig,
    dump_manifest,
    load_run_config,
    load_scene_manifest,
    parse_manifest_text,
)

MINIMAL = """
# demo scene
scene.name = hallway
scene.haze_free = gt.png

levels[0].level = 5
levels[0].path = L5.png
levels[0].beta_e3 = 103.69
levels[0].airlight = 0.92, 0.94, 0.97
levels[1].level = 9
levels[1].path = L9.png
levels[1].beta_e3 = 17.84
levels[1].airlight = 0.92, 0.94, 0.97

checkers[0].name = back
checkers[0].distance_m = 7.0
checkers[0].roi = 10, 20, 40, 30
"""


def test_parse_minimal_scene(tmp_path):
    path = tmp_path / "scene.txt"
    path.write_text(MINIMAL)
    scene = load_scene_manifest(path)
    assert scene.name == "hallway"
    assert [lv.level for lv in scene.levels] == [5, 9]
    assert scene.level(5).beta == pytest.approx(0.10369)
    assert scene.checkers[0].roi == Rect(10, 20, 40, 30)
    assert scene.chroma_patches == DEFAULT_CHROMA_PATCHES
    assert scene.resolve_path("gt.png").startswith(str(tmp_path))


def test_ground_truth_transmission():
    scene_text = MINIMAL
    tmp = parse_manifest_text(scene_text)
    assert "scene" in tmp
    # beta stored in thousandths of 1/m: t = exp(-beta*d)
    from hazebench.manifest import _build_scene

    scene = _build_scene(parse_manifest_text(scene_text), ".")
    t = scene.t_ground_truth(5, scene.checkers[0])
    assert t == pytest.approx(math.exp(-0.10369 * 7.0))


def test_levels_sorted_regardless_of_order(tmp_path):
    text = MINIMAL.replace("levels[0].level = 5", "levels[0].level = 9").replace(
        "levels[1].level = 9", "levels[1].level = 5"
    )
    path = tmp_path / "s.txt"
    path.write_text(text)
    scene = load_scene_manifest(path)
    assert [lv.level for lv in scene.levels] == [5, 9]


def test_unknown_key_is_named():
    with pytest.raises(ManifestError, match="scene.typo"):
        from hazebench.manifest import _build_scene

        _build_scene(parse_manifest_text(MINIMAL + "\nscene.typo = 3\n"), ".")


def test_duplicate_key_rejected():
    with pytest.raises(ManifestError, match="duplicate"):
        parse_manifest_text("a.b = 1\na.b = 2\n")


def test_missing_required_key_named():
    broken = MINIMAL.replace("checkers[0].distance_m = 7.0", "")
    with pytest.raises(ManifestError, match="checkers\\[0\\].distance_m"):
        from hazebench.manifest import _build_scene

        _build_scene(parse_manifest_text(broken), ".")


def test_non_contiguous_array_rejected():
    with pytest.raises(ManifestError, match="non-contiguous"):
        parse_manifest_text("levels[0].level = 5\nlevels[2].level = 7\n")


def test_malformed_lines_rejected():
    with pytest.raises(ManifestError, match="key = value"):
        parse_manifest_text("just some words\n")
    with pytest.raises(ManifestError, match="malformed"):
        parse_manifest_text("levels[x].level = 5\n")


def test_value_types():
    tree = parse_manifest_text("a = 3\nb = 2.5\nc = hello.png\nd = 1, 2.5, x\n")
    assert tree == {"a": 3, "b": 2.5, "c": "hello.png", "d": (1, 2.5, "x")}


def test_bad_rect_and_airlight_messages():
    from hazebench.manifest import _build_scene

    bad_roi = MINIMAL.replace("10, 20, 40, 30", "10, 20, 0, 30")
    with pytest.raises(ManifestError, match="roi"):
        _build_scene(parse_manifest_text(bad_roi), ".")
    bad_air = MINIMAL.replace("levels[0].airlight = 0.92, 0.94, 0.97", "levels[0].airlight = 0.92, 1.4, 0.97")
    with pytest.raises(ManifestError, match="airlight"):
        _build_scene(parse_manifest_text(bad_air), ".")


def test_duplicate_level_rejected():
    from hazebench.manifest import _build_scene

    dup = MINIMAL.replace("levels[1].level = 9", "levels[1].level = 5")
    with pytest.raises(ManifestError, match="duplicates"):
        _build_scene(parse_manifest_text(dup), ".")


def test_patch_rois_must_be_complete():
    from hazebench.manifest import _build_scene

    partial = MINIMAL + "\ncheckers[0].patch_rois[0] = 1, 1, 2, 2\n"
    with pytest.raises(ManifestError, match="24"):
        _build_scene(parse_manifest_text(partial), ".")


def test_roi_outside_crop_rejected():
    from hazebench.manifest import _build_scene

    cropped = MINIMAL + "\nscene.crop = 0, 0, 30, 30\n"
    with pytest.raises(ManifestError, match="crop"):
        _build_scene(parse_manifest_text(cropped), ".")


def test_dump_round_trips(tmp_path):
    from hazebench.manifest import _build_scene

    rois = "\n".join(
        f"checkers[0].patch_rois[{j}] = {1 + 5 * (j % 6)}, {1 + 5 * (j // 6)}, 4, 4" for j in range(24)
    )
    text = MINIMAL + rois + "\nchroma_patches = 2, 6, 7\nscene.crop = 0, 0, 60, 60\n"
    scene = _build_scene(parse_manifest_text(text), "/base")
    again = _build_scene(parse_manifest_text(dump_manifest(scene)), "/base")
    assert again == scene


def test_unknown_level_lookup():
    from hazebench.manifest import _build_scene

    scene = _build_scene(parse_manifest_text(MINIMAL), ".")
    with pytest.raises(ManifestError, match="level 7"):
        scene.level(7)


def test_chroma_regions_indexing():
    from hazebench.manifest import _build_scene

    rois = "\n".join(f"checkers[0].patch_rois[{j}] = {j}, 0, 1, 1" for j in range(24))
    text = MINIMAL + rois + "\nchroma_patches = 1, 24\n"
    scene = _build_scene(parse_manifest_text(text), ".")
    regions = scene.chroma_regions(scene.checkers[0])
    # 1-based patch numbers: patch 1 -> first roi (x=0), patch 24 -> last (x=23)
    assert regions[0].rect[0] == 0
    assert regions[1].rect[0] == 23


# ---------------------------------------------------------------------------
# run config
# ---------------------------------------------------------------------------


def test_run_config_defaults(tmp_path):
    cfg_path = tmp_path / "run.txt"
    cfg_path.write_text("run.manifest = scene.txt\n")
    cfg = load_run_config(cfg_path)
    assert cfg.methods == ("dcp", "fast", "clahe", "mininet")
    assert cfg.trim_fraction == 0.15
    assert cfg.record_timing is False
    assert cfg.manifest == str(tmp_path / "scene.txt")
    assert cfg.dcp.omega == 0.95
    assert cfg.edges.threshold == 0.05


def test_run_config_overrides(tmp_path):
    cfg_path = tmp_path / "run.txt"
    cfg_path.write_text(
        "run.manifest = scene.txt\n"
        "run.methods = dcp, clahe\n"
        "run.levels = 5, 9\n"
        "run.record_timing = true\n"
        "dcp.omega = 0.9\n"
        "dcp.refine.radius = 12\n"
        "fast.window = 10\n"
        "clahe.clip_limit = 3.0\n"
        "net.stride = 2\n"
        "edges.threshold = 0.1\n"
    )
    cfg = load_run_config(cfg_path)
    assert cfg.methods == ("dcp", "clahe")
    assert cfg.levels == (5, 9)
    assert cfg.record_timing is True
    assert cfg.dcp.omega == 0.9
    assert cfg.dcp.refine.radius == 12
    assert cfg.fast.window == 10
    assert cfg.clahe.clip_limit == 3.0
    assert cfg.net_stride == 2
    assert cfg.edges.threshold == 0.1


def test_run_config_unknown_key_named(tmp_path):
    cfg_path = tmp_path / "run.txt"
    cfg_path.write_text("run.manifest = s.txt\ndcp.omcga = 0.9\n")
    with pytest.raises(ManifestError, match="omcga"):
        load_run_config(cfg_path)


def test_run_config_unknown_method():
    with pytest.raises(ManifestError, match="unknown method"):
        RunConfig(manifest="m", methods=("dcp", "wavelet"))


def test_run_config_ordered_methods():
    cfg = RunConfig(manifest="m", methods=("mininet", "dcp"))
    assert cfg.ordered_methods() == ("dcp", "mininet")


def test_run_config_validation():
    with pytest.raises(ManifestError):
        RunConfig(manifest="m", methods=())
    with pytest.raises(ManifestError):
        RunConfig(manifest="m", methods=("dcp", "dcp"))
    with pytest.raises(ManifestError):
        RunConfig(manifest="m", trim_fraction=0.5)
    with pytest.raises(ManifestError):
        RunConfig(manifest="m", net_stride=0)
