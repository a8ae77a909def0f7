"""Acceptance gate: one test per shipping criterion.

Each test prints a single PASS/FAIL line straight to the terminal
(bypassing capture) so a plain ``pytest -v`` run doubles as the
acceptance report. Stated runtime budgets are asserted alongside the
numeric tolerances.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import dark_channel_brute, net_forward_ref, trimmed_mean_oracle

from hazebench.bench import run_and_emit, run_benchmark
from hazebench.dcp import dark_channel
from hazebench.imaging import apply_haze, invert_haze, transmission_from_depth
from hazebench.manifest import RunConfig, load_scene_manifest
from hazebench.metrics import RegionMask, e_index, mean_chromaticity_distance, r_index, trimmed_mean
from hazebench.mininet import (
    TrainConfig,
    evaluate,
    init_params,
    loss_and_gradients,
    predict_map,
    save_params,
    train,
)
from hazebench.synth import (
    PatchSample,
    SynthConfig,
    build_demo_scene,
    procedural_texture,
    synthesize_patch_dataset,
    synthesize_scene,
)


class _Reporter:
    def __init__(self, capsys):
        self._capsys = capsys

    def line(self, status: str, num: int, label: str, detail: str = "") -> None:
        text = f"[{status}] criterion {num}: {label}"
        if detail:
            text = f"{text} ({detail})"
        with self._capsys.disabled():
            print(text, flush=True)

    def check(self, num: int, label: str, ok: bool, detail: str = "") -> None:
        self.line("PASS" if ok else "FAIL", num, label, detail)
        assert ok, f"criterion {num}: {label} ({detail})"


@pytest.fixture
def report(capsys):
    return _Reporter(capsys)


# (beta in 1e-3 per metre, distance in metres) -> transmission
GROUND_TRUTH_T = [
    (103.69, 7.00, 0.484),
    (83.57, 7.00, 0.557),
    (17.84, 7.00, 0.883),
    (103.69, 4.35, 0.637),
    (83.57, 4.35, 0.695),
    (17.84, 4.35, 0.925),
]


def test_criterion_1_transmission_table(report):
    worst = max(
        abs(float(transmission_from_depth(dist, b_e3 / 1000.0)) - want)
        for b_e3, dist, want in GROUND_TRUTH_T
    )
    report.check(
        1,
        "transmission matches the six tabulated beta/distance pairs to 1e-3",
        worst <= 1e-3,
        f"max err {worst:.2e}",
    )


def test_criterion_2_haze_round_trip(report):
    rng = np.random.default_rng(20)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        img = rng.uniform(0.0, 1.0, (24, 32, 3))
        t = rng.uniform(0.1, 1.0, (24, 32))
        airlight = tuple(rng.uniform(0.6, 1.0, 3))
        back = invert_haze(apply_haze(img, t, airlight), t, airlight)
        worst = max(worst, float(np.abs(back - img).max()))
    elapsed = time.perf_counter() - start
    report.check(
        2,
        "100 random apply/invert round trips at t >= 0.1 agree to 1e-6",
        worst <= 1e-6 and elapsed < 1.0,
        f"max err {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_3_trimmed_mean_exact(report):
    rng = np.random.default_rng(30)
    trims = (0.0, 0.1, 0.15, 0.25, 0.4)
    start = time.perf_counter()
    mismatches = 0
    small = 0
    for i in range(1000):
        n = int(rng.integers(1, 7)) if i % 4 == 0 else int(rng.integers(1, 61))
        small += n < 7
        values = rng.uniform(-5.0, 5.0, n)
        if i % 3 == 0:
            values = np.round(values)  # force ties
        trim = trims[i % len(trims)]
        if trimmed_mean(values, trim) != trimmed_mean_oracle(values, trim):
            mismatches += 1
    elapsed = time.perf_counter() - start
    report.check(
        3,
        "trimmed mean equals the sort-and-slice oracle on 1000 vectors",
        mismatches == 0 and small > 0 and elapsed < 1.0,
        f"{mismatches} mismatches, {small} short vectors, {elapsed:.2f}s",
    )


def test_criterion_4_dark_channel_exact(report):
    rng = np.random.default_rng(40)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(50):
        img = rng.uniform(0.0, 1.0, (16, 16, 3))
        for radius in (0, 1, 3):
            if not np.array_equal(dark_channel(img, radius), dark_channel_brute(img, radius)):
                mismatches += 1
    elapsed = time.perf_counter() - start
    report.check(
        4,
        "dark channel equals brute force on 50 random images at radii 0/1/3",
        mismatches == 0 and elapsed < 1.0,
        f"{mismatches} mismatches, {elapsed:.2f}s",
    )


def test_criterion_5_gradient_check(report):
    # The loss is piecewise quadratic in any single weight, so a central
    # difference is exact up to roundoff provided no max tie or clamp bound
    # flips inside [w - h, w + h]. Draws resample the patch until the kink
    # margin is safe, then scale the step to stay well inside it.
    rng = np.random.default_rng(50)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        params = init_params(seed=int(rng.integers(1 << 31)))
        for _ in range(300):
            patch = rng.uniform(0.0, 1.0, (16, 16, 3))
            _, margin = net_forward_ref(params, patch)
            if margin > 5e-5:
                break
        else:
            pytest.fail("no kink-safe patch found")
        step = min(1e-5, margin / 200.0)
        sample = [PatchSample(patch, float(rng.uniform(0.0, 1.0)))]
        _, grads = loss_and_gradients(params, sample)
        arrays = dict(params.array_items())
        name = sorted(grads)[int(rng.integers(len(grads)))]
        idx = np.unravel_index(int(rng.integers(arrays[name].size)), arrays[name].shape)
        analytic = float(grads[name][idx])
        kept = arrays[name][idx]
        arrays[name][idx] = kept + step
        plus, _ = loss_and_gradients(params, sample)
        arrays[name][idx] = kept - step
        minus, _ = loss_and_gradients(params, sample)
        arrays[name][idx] = kept
        fd = (plus - minus) / (2.0 * step)
        worst = max(worst, abs(fd - analytic) / max(abs(fd), abs(analytic), 1e-6))
    elapsed = time.perf_counter() - start
    report.check(
        5,
        "analytic gradients match central differences on 100 draws to 1e-4",
        worst < 1e-4 and elapsed < 30.0,
        f"max rel err {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_6_training_pipeline(report):
    start = time.perf_counter()
    sources = [procedural_texture(64, 64, seed=i) for i in range(8)]
    train_set = synthesize_patch_dataset(sources, SynthConfig(count=2000, seed=11))
    held_out = synthesize_patch_dataset(sources, SynthConfig(count=500, seed=12))
    params = train(init_params(seed=0), train_set, TrainConfig())
    mse = evaluate(params, held_out)

    clean = procedural_texture(80, 96, seed=30)
    depth = np.tile(np.linspace(4.35, 7.0, 96), (80, 1))
    hazy = synthesize_scene(clean, depth, 83.57e-3, (1.0, 1.0, 1.0))
    tmap = predict_map(params, hazy, stride=4)
    restored = invert_haze(hazy, tmap, (1.0, 1.0, 1.0))
    mae_hazy = float(np.abs(hazy - clean).mean())
    mae_restored = float(np.abs(restored - clean).mean())
    elapsed = time.perf_counter() - start
    report.check(
        6,
        "trained net reaches held-out mse < 0.05 and improves scene restoration",
        mse < 0.05 and mae_restored < mae_hazy and elapsed < 300.0,
        f"mse {mse:.4f}, mae {mae_hazy:.4f} -> {mae_restored:.4f}, {elapsed:.0f}s",
    )


def test_criterion_7_metric_identities(report):
    rng = np.random.default_rng(70)
    start = time.perf_counter()
    img = rng.uniform(0.0, 1.0, (24, 24, 3))
    whole = [RegionMask(rect=(0, 0, 24, 24))]
    e_same = e_index(img, img)
    r_same = r_index(img, img)
    chroma_same = mean_chromaticity_distance(img, img, whole)

    ramp = np.tile(np.arange(7) * 0.08, (7, 1))
    r_double = r_index(ramp, 2.0 * ramp)

    def stepped(columns):
        out = np.zeros((16, 16))
        for c in columns:
            out[:, c:] += 0.5
        return out

    e_double = e_index(stepped([4]), stepped([4, 12]))
    elapsed = time.perf_counter() - start
    ok = (
        e_same == 0.0
        and abs(r_same - 1.0) <= 1e-6
        and chroma_same == 0.0
        and abs(r_double - 2.0) <= 1e-6
        and e_double == 1.0
        and elapsed < 1.0
    )
    report.check(
        7,
        "metric identities and doubling laws hold",
        ok,
        f"e(x,x)={e_same}, r(x,x)={r_same:.12f}, chroma(x,x)={chroma_same}, "
        f"r(2x)={r_double:.8f}, e(double)={e_double}, {elapsed:.2f}s",
    )


# published DCP transmission estimates, keyed by checker distance then level
REAL_CAPTURE_DCP_T = {
    7.00: {5: 0.133, 7: 0.255, 9: 0.617},
    4.35: {5: 0.262, 7: 0.432, 9: 0.725},
}


def test_criterion_8_real_capture_reproduction(report):
    manifest = os.environ.get("HAZEBENCH_CHIC_MANIFEST", "")
    if not manifest:
        report.line("SKIP", 8, "real-capture reproduction", "HAZEBENCH_CHIC_MANIFEST not set")
        pytest.skip("real-capture manifest not configured (set HAZEBENCH_CHIC_MANIFEST)")
    scene = load_scene_manifest(manifest)
    distances = {c.name: c.distance_m for c in scene.checkers}
    out = run_benchmark(RunConfig(manifest=manifest, methods=("dcp",), levels=(5, 7, 9)))

    worst_est = 0.0
    worst_gt = 0.0
    checked = 0
    for row in out.rows:
        dist = distances[row.checker]
        table = next(
            (v for d, v in REAL_CAPTURE_DCP_T.items() if abs(d - dist) < 0.01), None
        )
        if table is None or row.level not in table:
            continue
        checked += 1
        worst_est = max(worst_est, abs(row.t_est - table[row.level]))
        want_gt = next(
            w for b, d, w in GROUND_TRUTH_T if abs(d - dist) < 0.01
            and abs(b / 1000.0 - scene.level(row.level).beta) < 1e-9
        )
        worst_gt = max(worst_gt, abs(row.t_gt - want_gt))
    report.check(
        8,
        "dark-channel estimates reproduce the published table on real captures",
        checked == 6 and worst_est <= 0.05 and worst_gt <= 1e-3,
        f"{checked} cells, max est err {worst_est:.3f}, max gt err {worst_gt:.2e}",
    )


def test_criterion_9_deterministic_reports(report, tmp_path):
    manifest = build_demo_scene(tmp_path / "scene", seed=3, size=(96, 80), levels=(5, 9))
    sources = [procedural_texture(48, 48, seed=40 + i) for i in range(3)]
    data = synthesize_patch_dataset(sources, SynthConfig(count=300, seed=5))
    params = train(init_params(seed=1), data, TrainConfig(epochs=3))
    weights = tmp_path / "weights.hznet"
    save_params(params, weights)

    outputs = []
    for run_dir in ("run_a", "run_b"):
        cfg = RunConfig(
            manifest=str(manifest),
            net_params=str(weights),
            out_dir=str(tmp_path / run_dir),
        )
        paths = run_and_emit(cfg)
        outputs.append({key: Path(p).read_bytes() for key, p in sorted(paths.items())})
    same = outputs[0] == outputs[1]
    report.check(
        9,
        "two consecutive benchmark runs emit byte-identical reports and charts",
        same and {"report", "svg_5", "svg_9"} <= set(outputs[0]),
        f"files {sorted(outputs[0])}, identical={same}",
    )
