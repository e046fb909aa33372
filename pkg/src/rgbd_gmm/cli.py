"""Command-line entry point: ``synth``, ``segment``, ``eval``, ``bench``.

Every failure ends with exit status 1 and a single ``error: ...`` line on
stderr; usage errors exit with status 2 (argparse).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .dataset import SequenceManifest, load_mask, load_sequence, save_mask
from .engine import WorkerPool, run_pipeline
from .evaluation import CONFIGURATION_LABELS, CONFIGURATIONS, evaluate_sequence, measure_throughput
from .scenarios import builtin_scenario
from .synthetic import ScenarioSpec, generate_synthetic
from .workflow import METHODS, RGBDSegmenter, normalize_methods


class CLIError(Exception):
    pass


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _methods(text: str) -> tuple[str, ...]:
    try:
        return normalize_methods(text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_config(args) -> RunConfig:
    config = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    engine = config.engine
    if getattr(args, "workers", None) is not None:
        engine = dataclasses.replace(engine, workers=args.workers)
    if getattr(args, "pipeline", None) is not None:
        engine = dataclasses.replace(engine, pipeline=args.pipeline)
    return dataclasses.replace(config, engine=engine)


def output_methods(methods) -> tuple[str, ...]:
    """Methods whose masks get written; ``fused`` also emits its two inputs."""
    wanted = set(methods)
    if "fused" in wanted:
        wanted |= {"rgb", "depth"}
    return tuple(m for m in METHODS if m in wanted)


# ------------------------------------------------------------------ commands

def cmd_synth(args) -> int:
    if (args.scenario is None) == (args.spec is None):
        raise CLIError("give exactly one of --scenario or --spec")
    if args.spec:
        spec = ScenarioSpec.load(args.spec)
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
        if args.frames is not None:
            spec = dataclasses.replace(spec, frame_count=args.frames)
    else:
        try:
            spec = builtin_scenario(
                args.scenario,
                seed=7 if args.seed is None else args.seed,
                frame_count=300 if args.frames is None else args.frames,
            )
        except KeyError as exc:
            raise CLIError(exc.args[0]) from None
    generate_synthetic(spec, args.out)
    print(Path(args.out) / "manifest.json")
    return 0


def cmd_segment(args) -> int:
    config = _load_config(args)
    reader = load_sequence(args.manifest, with_gt=False)
    manifest = reader.manifest
    width, height = manifest.width, manifest.height
    if width is None:
        if len(reader) == 0:
            raise CLIError("cannot infer frame size of an empty sequence without width/height")
        height, width = reader.read(0).shape
    out = Path(args.out)
    written = output_methods(args.methods)
    for method in written:
        (out / method).mkdir(parents=True, exist_ok=True)

    def sink(frame, masks):
        for method in written:
            save_mask(masks[method], out / method / f"{frame.index:06d}.png")

    with WorkerPool(config.engine.workers) as pool:
        seg = RGBDSegmenter(
            width, height, config, written, manifest.calibration, manifest.registered, pool
        )
        stats = run_pipeline(iter(reader), seg.process, sink, pipelined=config.engine.pipeline)
    print(
        f"segmented {stats.frames_processed} frames ({', '.join(written)}) "
        f"in {stats.wall_time:.2f} s, {stats.fps:.1f} fps -> {out}"
    )
    return 0


def _parse_pred(items) -> dict:
    preds = {}
    for item in items or ():
        method, sep, path = item.partition("=")
        if not sep or not path:
            raise CLIError(f"--pred expects METHOD=DIR, got {item!r}")
        method = method.strip().lower()
        if method not in METHODS:
            raise CLIError(f"unknown method {method!r} in --pred; choose from {', '.join(METHODS)}")
        preds[method] = Path(path)
    if not preds:
        raise CLIError("no predictions given; use --pred METHOD=DIR")
    return preds


def cmd_eval(args) -> int:
    config = _load_config(args)
    preds = _parse_pred(args.pred)
    manifest = SequenceManifest.load(args.manifest)
    if not manifest.has_ground_truth:
        raise CLIError("manifest has no ground truth for every frame")
    for method, directory in preds.items():
        for entry in manifest.frames:
            path = directory / f"{entry.index:06d}.png"
            if not path.is_file():
                raise CLIError(f"frame {entry.index}: missing {method} prediction {path}")
    gt = []
    for e in manifest.frames:
        path = manifest.resolve(e.gt)
        if not path.is_file():
            raise CLIError(f"frame {e.index}: missing ground truth {path}")
        gt.append(load_mask(path))
    streams = {
        m: [load_mask(d / f"{e.index:06d}.png") for e in manifest.frames] for m, d in preds.items()
    }
    warmup = config.evaluation.warmup_frames if args.warmup is None else args.warmup
    report = evaluate_sequence(streams, gt, warmup_frames=warmup, frames=[e.index for e in manifest.frames])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "metrics.csv")
    report.write_json(out / "summary.json")
    if report.methods and not report.scored(report.methods[0]):
        print(f"note: every frame falls inside the {warmup}-frame warm-up; aggregates are empty")
    for method in report.methods:
        agg = report.aggregate(method)
        print(
            f"{method:<10} F1={agg['f1']:.3f} P={agg['precision']:.3f} "
            f"R={agg['recall']:.3f} mean-F1={report.mean_f1(method):.3f}"
        )
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args)
    manifest = SequenceManifest.load(args.manifest)
    names = [c.strip() for c in args.configs.split(",") if c.strip()]
    for name in names:
        if name not in CONFIGURATIONS:
            raise CLIError(f"unknown configuration {name!r}; choose from {', '.join(CONFIGURATIONS)}")
    results = [
        measure_throughput(manifest, name, config, args.methods, frame_limit=args.frames)
        for name in names
    ]
    identical = len({r.digest for r in results}) <= 1
    print(f"{'config':<10} {'description':<26} {'frames':>6} {'wall s':>8} {'fps':>8}")
    for r in results:
        s = r.stats
        print(
            f"{r.configuration:<10} {CONFIGURATION_LABELS[r.configuration]:<26} "
            f"{s.frames_processed:>6} {s.wall_time:>8.2f} {s.fps:>8.2f}"
        )
    print(f"masks identical across configurations: {'yes' if identical else 'NO'}")
    if args.out:
        payload = {
            "manifest": str(args.manifest),
            "methods": list(args.methods),
            "configurations": [r.to_dict() for r in results],
            "masks_identical": identical,
        }
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    if not identical:
        raise CLIError("configurations produced different masks")
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgbd-gmm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--dump-config", action="store_true", help="print the complete default config as JSON"
    )
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (partial files keep defaults)")
    common.add_argument("--workers", type=int, help="worker threads, 0 = all cores")
    common.add_argument("--pipeline", type=_bool, help="three-stage pipeline on/off")

    p = sub.add_parser("synth", help="generate a synthetic RGBD sequence")
    p.add_argument("--scenario", help="built-in scenario name (A or B)")
    p.add_argument("--spec", help="scenario spec JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--frames", type=int, help="override the frame count")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", parents=[common], help="write per-frame foreground masks")
    p.add_argument("manifest")
    p.add_argument("--methods", type=_methods, default=("fused",),
                   help=f"comma list from {','.join(METHODS)} (default fused)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", parents=[common], help="score masks against ground truth")
    p.add_argument("manifest")
    p.add_argument("--pred", action="append", metavar="METHOD=DIR")
    p.add_argument("--warmup", type=int, help="frames excluded from aggregates")
    p.add_argument("-o", "--out", required=True, help="directory for metrics.csv and summary.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", parents=[common], help="throughput of the engine configurations")
    p.add_argument("manifest")
    p.add_argument("--configs", default=",".join(CONFIGURATIONS))
    p.add_argument("--methods", type=_methods, default=("fused",))
    p.add_argument("--frames", type=int, help="only the first N frames")
    p.add_argument("-o", "--out", help="JSON stats path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_config:
        print(RunConfig().to_json())
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("error: no command given", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    except Exception as exc:  # single-line, machine-parsable report
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: {exc.__class__.__name__}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
