"""Command-line interface.

Subcommands: synth (self-contained demo scene + training data), train,
dehaze, metrics, bench. Exit codes: 0 success, 1 bad input or usage,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import mininet, synth
from .bench import run_and_emit
from .clahe import ClaheConfig, clahe_dehaze
from .dcp import DcpConfig, dcp_dehaze, estimate_airlight
from .errors import HazebenchError, TrainingError
from .imageio import read_image, write_image
from .imaging import invert_haze
from .manifest import METHODS, RunConfig, load_run_config
from .metrics import RegionMask, e_index, mean_chromaticity_distance, r_index
from .veil import VeilConfig, veil_dehaze, veil_to_transmission

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # usage problems are input errors, same exit code as validation failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hazebench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="deterministic RNG seed")
    common.add_argument("--out-dir", default=".", help="directory for outputs")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic scene and dataset")
    p.add_argument("--size", default="128x96", help="scene size as WxH")
    p.add_argument("--levels", default="5,6,7,8,9", help="haze levels, comma separated")
    p.add_argument("--dataset-count", type=int, default=0, help="also write this many training patches")
    p.add_argument("--patch-size", type=int, default=16)

    p = sub.add_parser("train", parents=[common], help="train the transmission net")
    p.add_argument("--dataset", required=True, help="directory written by synth")
    p.add_argument("--params-out", default="weights.hznet", help="output weights file")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--learning-rate", type=float, default=0.005)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("dehaze", parents=[common], help="dehaze one image")
    p.add_argument("input", help="hazy image (png/ppm)")
    p.add_argument("--method", choices=METHODS, default="dcp")
    p.add_argument("--airlight", default=None, help="R,G,B in (0,1]; default: estimated")
    p.add_argument("--net-params", default=None, help="weights file (mininet only)")
    p.add_argument("--net-stride", type=int, default=4)

    p = sub.add_parser("metrics", parents=[common], help="compare a restored image to a reference")
    p.add_argument("reference")
    p.add_argument("restored")

    p = sub.add_parser("bench", parents=[common], help="run the full benchmark")
    p.add_argument("--config", default=None, help="run configuration file")
    p.add_argument("--manifest", default=None, help="scene manifest (overrides config)")
    p.add_argument("--methods", default=None, help="comma-separated subset of methods")
    p.add_argument("--net-params", default=None, help="weights file for the mininet method")
    p.add_argument("--record-timing", action="store_true")
    p.add_argument("--save-images", action="store_true", help="also write restored frames")
    return parser


def _cmd_synth(args) -> int:
    manifest_path = synth.build_demo_scene(
        args.out_dir,
        seed=args.seed,
        size=_parse_size(args.size),
        levels=_parse_int_list(args.levels),
    )
    print(f"wrote {manifest_path}")
    if args.dataset_count > 0:
        sources = [synth.procedural_texture(64, 64, seed=args.seed + i) for i in range(8)]
        cfg = synth.SynthConfig(
            count=args.dataset_count, patch_size=args.patch_size, seed=args.seed
        )
        samples = synth.synthesize_patch_dataset(sources, cfg)
        dataset_dir = os.path.join(args.out_dir, "dataset")
        synth.save_dataset(samples, dataset_dir)
        print(f"wrote {len(samples)} patches to {dataset_dir}")
    return 0


def _cmd_train(args) -> int:
    samples = synth.load_dataset(args.dataset)
    if not samples:
        raise ValueError(f"dataset {args.dataset} is empty")
    patch_size = samples[0].patch.shape[0]
    params = mininet.init_params(seed=args.seed, patch_size=patch_size)
    cfg = mininet.TrainConfig(
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    params = mininet.train(params, samples, cfg)
    mse = mininet.evaluate(params, samples)
    out = args.params_out
    if not os.path.isabs(out):
        out = os.path.join(args.out_dir, out)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    mininet.save_params(params, out)
    print(f"trained on {len(samples)} patches, training mse = {mse:.6f}")
    print(f"wrote {out}")
    return 0


def _cmd_dehaze(args) -> int:
    hazy = read_image(args.input)
    if args.airlight is not None:
        airlight = tuple(float(v) for v in args.airlight.split(","))
    else:
        airlight = estimate_airlight(hazy)
        print(f"estimated airlight = {airlight[0]:.4f}, {airlight[1]:.4f}, {airlight[2]:.4f}")
    if args.method == "dcp":
        restored, tmap = dcp_dehaze(hazy, airlight, DcpConfig())
    elif args.method == "fast":
        restored, veil = veil_dehaze(hazy, airlight, VeilConfig())
        tmap = veil_to_transmission(veil, airlight)
    elif args.method == "clahe":
        restored, tmap = clahe_dehaze(hazy, ClaheConfig()), None
    else:
        if args.net_params is None:
            raise ValueError("--net-params is required with --method mininet")
        params = mininet.load_params(args.net_params)
        tmap = mininet.predict_map(params, hazy, stride=args.net_stride)
        restored = invert_haze(hazy, tmap, airlight)

    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    out_img = os.path.join(args.out_dir, f"{stem}.dehazed.png")
    write_image(out_img, restored)
    print(f"wrote {out_img}")
    if tmap is not None:
        out_t = os.path.join(args.out_dir, f"{stem}.tmap.png")
        write_image(out_t, tmap)
        print(f"wrote {out_t}")
    return 0


def _cmd_metrics(args) -> int:
    ref = read_image(args.reference)
    res = read_image(args.restored)
    whole = RegionMask(rect=(0, 0, ref.shape[1], ref.shape[0]))

    def show(name, value):
        text = "n/a" if value != value else f"{value:.6f}"
        print(f"{name} = {text}")

    show("e", e_index(ref, res))
    show("r", r_index(ref, res))
    show("chroma_dist", mean_chromaticity_distance(res, ref, [whole]))
    return 0


def _cmd_bench(args) -> int:
    if args.config is not None:
        cfg = load_run_config(args.config, manifest_override=args.manifest)
        overrides = {}
        if args.out_dir != ".":
            overrides["out_dir"] = args.out_dir
        if args.record_timing:
            overrides["record_timing"] = True
        if args.methods is not None:
            overrides["methods"] = tuple(m.strip() for m in args.methods.split(","))
        if args.net_params is not None:
            overrides["net_params"] = args.net_params
        if overrides:
            from dataclasses import replace

            cfg = replace(cfg, **overrides)
    else:
        if args.manifest is None:
            raise ValueError("bench needs --config or --manifest")
        if args.methods is not None:
            methods = tuple(m.strip() for m in args.methods.split(","))
        elif args.net_params is None:
            methods = tuple(m for m in METHODS if m != "mininet")
        else:
            methods = METHODS
        cfg = RunConfig(
            manifest=args.manifest,
            methods=methods,
            out_dir=args.out_dir,
            seed=args.seed,
            record_timing=args.record_timing,
            net_params=args.net_params,
        )
    paths = run_and_emit(cfg, write_images=args.save_images)
    print(f"wrote {paths['report']}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "dehaze": _cmd_dehaze,
    "metrics": _cmd_metrics,
    "bench": _cmd_bench,
}


def _parse_size(text: str) -> tuple[int, int]:
    w, sep, h = text.lower().partition("x")
    if not sep or not w.isdigit() or not h.isdigit():
        raise ValueError(f"size must look like 128x96, got {text!r}")
    return int(w), int(h)


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except TrainingError as exc:
        print(f"hazebench: training failed: {exc}", file=sys.stderr)
        return 2
    except (HazebenchError, ValueError) as exc:
        print(f"hazebench: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"hazebench: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
