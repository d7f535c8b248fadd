"""Command-line interface: detect, evaluate, stage and synth subcommands."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, PipelineConfig, load_config
from .evaluation import EvaluationError, evaluate
from .filtering import median_filter
from .morphology import StructuringElement, bottom_hat
from .pipeline import run_detect
from .raster import PgmError, load_mask, load_pgm, save_pgm
from .synth import SyntheticSceneSpec, generate_scene
from .thresholding import otsu_threshold, singh_threshold
from .voting import multiscale_enhance

__all__ = ["main"]

STAGES = ("median", "bottomhat", "binarize", "otsu", "enhance")


class CliError(Exception):
    """Carries a stage/context name for the one-line diagnostic."""

    def __init__(self, context: str, message: str):
        super().__init__(message)
        self.context = context


def _load_image(path: str, context: str) -> np.ndarray:
    try:
        return load_pgm(path)
    except FileNotFoundError:
        raise CliError(context, f"input file not found: {path}") from None
    except PgmError as exc:
        raise CliError(context, f"{path}: {exc}") from exc


def _load_mask(path: str, context: str) -> np.ndarray:
    try:
        return load_mask(path)
    except FileNotFoundError:
        raise CliError(context, f"input file not found: {path}") from None
    except PgmError as exc:
        raise CliError(context, f"{path}: {exc}") from exc


def _load_cfg(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        return load_config(path)
    except FileNotFoundError:
        raise CliError("config", f"config file not found: {path}") from None
    except ConfigError as exc:
        raise CliError("config", str(exc)) from exc


def _emit_report(report: dict, report_path: str | None) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if report_path:
        Path(report_path).write_text(text + "\n")


def _dump_saliency(debug: dict, out_dir: Path) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, value in debug.items():
        if hasattr(value, "stick"):
            for kind in ("stick", "ball"):
                data = getattr(value, kind)
                peak = data.max()
                path = out_dir / f"{name}_{kind}.pgm"
                save_pgm(data / peak if peak > 0 else data, path)
                written.append(str(path))
        elif getattr(value, "dtype", None) == bool:
            path = out_dir / f"{name}.pgm"
            save_pgm(value, path)
            written.append(str(path))
    return written


def cmd_detect(args) -> int:
    cfg = _load_cfg(args.config)
    image = _load_image(args.input, "detect")
    want_debug = cfg.dump_saliency or args.dump_saliency is not None
    result = run_detect(image, cfg, collect_debug=want_debug)
    save_pgm(result.mask, args.output)
    report = result.summary(include_timings=not args.no_timings)
    report["input"] = args.input
    report["output"] = args.output
    if want_debug:
        dump_dir = Path(args.dump_saliency) if args.dump_saliency else Path(args.output).parent / (
            Path(args.output).stem + "_saliency"
        )
        report["saliency_dumps"] = _dump_saliency(result.debug, dump_dir)
    if args.figures:
        from .figures import render_detect_figures

        report["figures"] = [str(p) for p in render_detect_figures(image, result, args.figures)]
    _emit_report(report, args.report)
    return 0


def cmd_evaluate(args) -> int:
    detected = _load_mask(args.input, "evaluate")
    reference = _load_mask(args.reference, "evaluate")
    try:
        report = evaluate(detected, reference, tau=args.tau, pixel_size=args.pixel_size)
    except (EvaluationError, ValueError) as exc:
        raise CliError("evaluate", str(exc)) from exc
    doc = report.to_dict()
    doc["detected"] = args.input
    doc["reference"] = args.reference
    if args.figures:
        from .figures import render_evaluate_figures

        doc["figures"] = [str(p) for p in render_evaluate_figures(detected, reference, report, args.figures)]
    if args.csv:
        _append_csv(args.csv, doc)
    _emit_report(doc, args.report)
    return 0


_CSV_FIELDS = (
    "detected", "reference", "tau", "pixel_size",
    "h_det_ref", "h_ref_det", "hausdorff", "sm",
    "detected_pixels", "reference_pixels",
)


def _append_csv(path: str, doc: dict) -> None:
    target = Path(path)
    new = not target.exists()
    with target.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS, extrasaction="ignore")
        if new:
            writer.writeheader()
        writer.writerow(doc)


def cmd_stage(args) -> int:
    cfg = _load_cfg(args.config)
    if args.stage == "enhance":
        mask = _load_mask(args.input, args.stage)
        out = multiscale_enhance(mask, cfg.voting)
    else:
        image = _load_image(args.input, args.stage)
        if args.stage == "median":
            out = median_filter(image, cfg.median_neighborhood())
        elif args.stage == "bottomhat":
            out = bottom_hat(image, StructuringElement.disk(cfg.bottomhat_radius))
        elif args.stage == "binarize":
            out = singh_threshold(image, cfg.singh)
        else:
            out = otsu_threshold(image)
    save_pgm(out, args.output)
    return 0


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSceneSpec.load(args.spec)
    except FileNotFoundError:
        raise CliError("synth", f"scene spec not found: {args.spec}") from None
    except (ValueError, TypeError) as exc:
        raise CliError("synth", f"bad scene spec: {exc}") from exc
    scene = generate_scene(spec, seed=args.seed)
    save_pgm(scene.image, args.output)
    save_pgm(scene.crack_mask, args.truth)
    if args.specks:
        save_pgm(scene.speck_mask, args.specks)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pavecrack",
        description="Pavement crack detection and evaluation on grayscale PGM images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the full detection pipeline")
    p.add_argument("--input", required=True, help="input PGM image")
    p.add_argument("--output", required=True, help="output crack mask (PGM)")
    p.add_argument("--config", help="pipeline config file")
    p.add_argument("--report", help="also write the JSON summary to this path")
    p.add_argument("--figures", help="render stage figures (PNG) into this directory")
    p.add_argument("--dump-saliency", metavar="DIR", help="write per-round saliency maps as PGM into DIR")
    p.add_argument("--no-timings", action="store_true", help="omit wall-clock timings for reproducible reports")
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("evaluate", help="score a detected mask against a reference mask")
    p.add_argument("--input", required=True, help="detected mask (PGM)")
    p.add_argument("--reference", required=True, help="reference mask (PGM)")
    p.add_argument("--tau", type=float, default=2.0, help="search radius in pixels (default 2)")
    p.add_argument("--pixel-size", type=float, default=1.0, help="scale applied to reported distances")
    p.add_argument("--report", help="also write the JSON report to this path")
    p.add_argument("--figures", help="render overlay/histogram figures into this directory")
    p.add_argument("--csv", help="append one delimited result row to this CSV file")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("stage", help="run a single pipeline stage")
    p.add_argument("--stage", required=True, choices=STAGES)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="pipeline config file")
    p.set_defaults(fn=cmd_stage)

    p = sub.add_parser("synth", help="generate a synthetic test scene with ground truth")
    p.add_argument("--spec", required=True, help="scene spec (JSON)")
    p.add_argument("--output", required=True, help="output scene image (PGM)")
    p.add_argument("--truth", required=True, help="output ground-truth crack mask (PGM)")
    p.add_argument("--specks", help="optionally write the speck (noise) mask here")
    p.add_argument("--seed", type=int, help="override the seed in the spec")
    p.set_defaults(fn=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"pavecrack: error: {exc.context}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"pavecrack: error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
