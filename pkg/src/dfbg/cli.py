"""Command line interface: ``dfbg run | synth | eval | oracle``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
assertion failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, PipelineConfig, dump_config, load_config, parse_config_text
from .evaluation import evaluate_video
from .pipeline import Pipeline

log = logging.getLogger("dfbg")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    flags = {
        "model": args.model, "color_space": args.color_space, "history": args.history,
        "input": args.input, "truth": args.truth, "output": args.output,
        "mrf_lambda": args.mrf_lambda, "min_blob": args.min_blob, "workers": args.workers,
    }
    for k, v in flags.items():
        if v is not None:
            out[k] = str(v)
    if args.confidence_band is not None:
        out["confidence_band"] = args.confidence_band
    if args.adaptive:
        out["adaptive"] = "true"
    if args.raw_masks:
        out["raw_masks"] = "true"
    if args.candidates:
        try:
            cand = parse_config_text(Path(args.candidates).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read candidates file: {exc}") from None
        for k in cand:
            if k not in ("spatial_candidates", "color_candidates"):
                raise ConfigError(f"candidates file may only set spatial/color candidates, got {k!r}")
        out.update(cand)
    return out


def run_pipeline(cfg: PipelineConfig, echo=print) -> int:
    if not cfg.input or not cfg.output:
        raise ConfigError("run needs an input directory and an output directory")
    frames = io.load_sequence(cfg.input, with_ids=True)
    truth = io.load_truth(cfg.truth) if cfg.truth else None
    if truth is not None:
        ids = {fid for fid, _ in frames}
        missing = sorted(set(truth) - ids)
        if missing:
            raise io.DataError(f"ground truth frames without input frames: {missing[:5]}")

    out = Path(cfg.output)
    (out / "posterior").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(dump_config(cfg))
    fingerprint = cfg.fingerprint()
    io.write_manifest(out, complete=False, frames_total=len(frames), frames_written=0,
                      fingerprint=fingerprint)

    pipe = Pipeline(cfg)
    masks: dict[int, np.ndarray] = {}
    totals: dict[str, float] = {}
    written = 0
    try:
        for fid, frame in frames:
            res = pipe.step(frame)
            io.write_posterior(out / "posterior" / f"frame_{fid:06d}.png", res.bg_posterior)
            io.write_mask(out / "masks" / f"frame_{fid:06d}.png", res.mask)
            masks[fid] = res.mask
            written += 1
            for k, v in res.timing.items():
                totals[k] = totals.get(k, 0.0) + v
    except Exception as exc:
        io.write_manifest(out, complete=False, frames_total=len(frames), frames_written=written,
                          fingerprint=fingerprint, error=str(exc))
        raise

    summary = {"frames": written, "fingerprint": fingerprint,
               "seconds_per_frame": {k: v / max(written, 1) for k, v in totals.items()}}
    if truth is not None:
        report = evaluate_video(masks, truth, fingerprint)
        (out / "report.json").write_text(report.to_json() + "\n")
        (out / "report.txt").write_text(report.table() + "\n")
        echo(report.table())
        summary.update(pooled_f=report.pooled_f, mean_f=report.mean_f)
    io.write_manifest(out, complete=True, frames_total=len(frames), frames_written=written,
                      fingerprint=fingerprint)
    timing = ", ".join(f"{k} {v * 1000:.1f} ms" for k, v in summary["seconds_per_frame"].items())
    echo(f"{written} frames, per frame: {timing}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    return run_pipeline(cfg)


def _pair(text: str, cast=int) -> tuple:
    parts = text.lower().replace("x", ",").split(",")
    return tuple(cast(p) for p in parts if p.strip())


def cmd_synth(args) -> int:
    from .synth import SynthSpec, generate

    try:
        spec = SynthSpec(kind=args.kind, size=_pair(args.size), frames=args.frames,
                         region=_pair(args.region) if args.region else None,
                         magnitude=args.magnitude, seed=args.seed, square_size=args.square_size)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    frames, truth = generate(spec)
    io.write_sequence(args.out, frames, truth)
    print(f"wrote {len(frames)} frames to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    masks = io.load_masks(args.masks)
    truth = io.load_truth(args.truth)
    try:
        report = evaluate_video(masks, truth)
    except KeyError as exc:
        raise io.DataError(str(exc)) from None
    print(report.table())
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .core import KernelConfig, ModelHistory
    from .joint import JointModel, joint_likelihood
    from .likelihood import background_likelihood, foreground_likelihood
    from .oracle import brute_force_likelihood, relative_error

    rng = np.random.default_rng(args.seed)
    cfg = KernelConfig()
    worst = 0.0
    t0 = time.perf_counter()
    for n in range(args.instances):
        size = args.sizes[n % len(args.sizes)]
        T = int(rng.integers(1, args.max_history + 1))
        hist = ModelHistory(T)
        for _ in range(T):
            hist.append(rng.integers(0, 256, (size, size, 3)), rng.random((size, size)))
        frame = rng.integers(0, 256, (size, size, 3)).astype(float)
        samples, bg = hist.stacked()
        checks = [
            (background_likelihood(hist, frame, cfg), "bg", "dfb"),
            (foreground_likelihood(hist, frame, cfg), "fg", "dfb"),
            (joint_likelihood(JointModel(hist, cfg), frame, "bg"), "bg", "jkde"),
            (joint_likelihood(JointModel(hist, cfg), frame, "fg"), "fg", "jkde"),
        ]
        for fast, label, model in checks:
            sv = cfg.bg_spatial_var if label == "bg" else cfg.fg_spatial_var
            cv = cfg.bg_color_var if label == "bg" else cfg.fg_color_var
            ref = brute_force_likelihood(samples, bg, frame, sv, cv, label, model)
            worst = max(worst, relative_error(fast, ref))
    print(json.dumps({"instances": args.instances, "max_relative_error": worst,
                      "seconds": round(time.perf_counter() - t0, 2)}))
    return EXIT_OK if worst < args.tolerance else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfbg", description="Distribution-field background subtraction")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="segment an image sequence")
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--in", dest="input")
    run.add_argument("--truth")
    run.add_argument("--out", dest="output")
    run.add_argument("--model", choices=["dfb", "jkde", "pixelwise-kde"])
    run.add_argument("--color-space", choices=["rgb", "lab"])
    run.add_argument("--history", type=int)
    run.add_argument("--adaptive", action="store_true")
    run.add_argument("--candidates", help="file with spatial_candidates / color_candidates")
    run.add_argument("--confidence-band", help="lo,hi")
    run.add_argument("--mrf-lambda", type=float)
    run.add_argument("--min-blob", type=int)
    run.add_argument("--raw-masks", action="store_true", help="skip MRF and blob filtering")
    run.add_argument("--workers", type=int)
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    run.set_defaults(func=cmd_run)

    syn = sub.add_parser("synth", help="write a synthetic video with ground truth")
    syn.add_argument("--kind", default="movingSquare",
                     choices=["constant", "spatialJitter", "colorNoise", "movingSquare"])
    syn.add_argument("--size", default="64x64", help="WxH")
    syn.add_argument("--frames", type=int, default=100)
    syn.add_argument("--region", help="x0,y0,x1,y1")
    syn.add_argument("--magnitude", type=float, default=2)
    syn.add_argument("--square-size", type=int, default=10)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=cmd_synth)

    ev = sub.add_parser("eval", help="score precomputed masks")
    ev.add_argument("--masks", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--report", help="write the JSON report here")
    ev.set_defaults(func=cmd_eval)

    orc = sub.add_parser("oracle", help="compare fast likelihoods with the brute-force oracle")
    orc.add_argument("--instances", type=int, default=20)
    orc.add_argument("--sizes", type=int, nargs="+", default=[8, 16])
    orc.add_argument("--max-history", type=int, default=5)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--tolerance", type=float, default=1e-10)
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2; those are config errors here
        return EXIT_CONFIG if exc.code == 2 else (exc.code or EXIT_OK)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (io.DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
