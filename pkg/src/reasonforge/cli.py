"""
Command line interface for reasonforge.

Subcommands:

- generate: synthesize a dataset (instances.jsonl, images/, manifest.json)
- stats: recompute dataset statistics and cross-check the manifest
- filter: classify questions Simple/Challenging from trial logs
- stage: write curriculum stage files from difficulty records
- eval: score MCQ predictions against a dataset
- render-preview: write one scene's three views for manual inspection

Flags override config file values. Exit codes: 0 success, 1 validation
error, 2 I/O error, 3 external matching service failure.
"""

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from . import __version__
from .config import PipelineConfig, apply_overrides, find_config_file, load_config
from .curriculum import (
    DifficultyRecord,
    aggregate_trial_logs,
    build_baseline_file,
    build_stage_files,
    classify_difficulty,
)
from .dataset import compute_stats, generate_dataset, load_instances, render_preview
from .errors import ConfigError, ErrorCode, ReasonForgeError, exit_code_for
from .evaluation import GoldItem, match_predictions, parse_prediction_rows, score
from .logging import get_logger, setup_logging
from .matching import ExternalMatcher
from .utils import as_fraction, iter_jsonl, write_json, write_jsonl

RECORDS_FILE = "difficulty.jsonl"
STAGES_DIR = "stages"


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="reasonforge",
        description="Synthetic multi-image reasoning datasets with curriculum staging and MCQ evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"reasonforge {__version__}")
    parser.add_argument("--config", help="Path to configuration file", default=None)
    parser.add_argument("--log-file", help="Log file path (empty string disables file logging)", default=None)
    parser.add_argument("-v", "--verbose", action="store_true", help="Echo progress logs to stderr")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # --- generate ---
    gen = subparsers.add_parser("generate", help="Generate a dataset")
    gen.add_argument("--count", type=int, help="Number of instances")
    gen.add_argument("--seed", type=int, help="Master seed")
    gen.add_argument("--output", "-o", dest="output_dir", help="Output directory")
    gen.add_argument("--dataset-id", help="Prefix for instance ids")
    gen.add_argument("--workers", type=int, help="Worker threads")
    gen.add_argument("--width", type=int, help="Raster width in pixels")
    gen.add_argument("--height", type=int, help="Raster height in pixels")
    gen.add_argument("--format", choices=["png", "ppm"], help="Image format")
    gen.add_argument("--templates", help="Template catalog JSON")

    # --- stats ---
    stats = subparsers.add_parser("stats", help="Recompute and verify dataset statistics")
    stats.add_argument("dataset_dir", help="Dataset directory")
    stats.add_argument("--json", action="store_true", help="Print statistics as JSON")

    # --- filter ---
    flt = subparsers.add_parser("filter", help="Classify question difficulty from trial logs")
    flt.add_argument("dataset_dir", help="Dataset directory")
    flt.add_argument("--logs", required=True, help="Trial log JSONL")
    flt.add_argument("--threshold", help="Simple if correct rate >= threshold (default from config)")
    flt.add_argument("--model-id", help="Only use trials from this model")
    flt.add_argument("--out", help=f"Records file (default: <dataset>/{RECORDS_FILE})")

    # --- stage ---
    stg = subparsers.add_parser("stage", help="Write curriculum stage files")
    stg.add_argument("dataset_dir", help="Dataset directory")
    stg.add_argument("--records", help=f"Difficulty records (default: <dataset>/{RECORDS_FILE})")
    stg.add_argument("--fraction", help="Share of the challenging pool sampled per stage")
    stg.add_argument("--seed", type=int, help="Sampling seed (default: master seed)")
    stg.add_argument("--stages", type=int, help="Number of stages")
    stg.add_argument("--variant", choices=["figure", "equation"], help="Stage recurrence")
    stg.add_argument("--out", help=f"Output directory (default: <dataset>/{STAGES_DIR})")
    stg.add_argument("--baseline", action="store_true", help="Also write baseline.jsonl (no curriculum)")

    # --- eval ---
    ev = subparsers.add_parser("eval", help="Score MCQ predictions")
    ev.add_argument("--gold", required=True, help="Dataset directory or instances.jsonl")
    ev.add_argument("--predictions", required=True, help="Predictions JSONL {question_id, output}")
    ev.add_argument("--external", action="store_true", help="Use the external matching service")
    ev.add_argument("--max-in-flight", type=int, help="Concurrent external requests")
    ev.add_argument("--out", help="Write report JSON here")

    # --- render-preview ---
    prev = subparsers.add_parser("render-preview", help="Render one scene's front/side/top views")
    prev.add_argument("--seed", type=int, default=0, help="Scene seed")
    prev.add_argument("--out", default="preview", help="Output directory")
    prev.add_argument("--width", type=int, help="Raster width in pixels")
    prev.add_argument("--height", type=int, help="Raster height in pixels")
    prev.add_argument("--format", choices=["png", "ppm"], help="Image format")

    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        sys.exit(0)

    return args


def _load_env():
    """Load .env (matcher URL/key, LOG_LEVEL) if present."""
    from dotenv import load_dotenv

    for env_path in (".env", os.path.join(os.path.dirname(__file__), "..", "..", ".env")):
        expanded = os.path.abspath(env_path)
        if os.path.exists(expanded):
            load_dotenv(expanded)
            return


def _pipeline_config(args: argparse.Namespace, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    config = load_config(find_config_file(args.config))
    return PipelineConfig.from_dict(apply_overrides(config, overrides or {}))


def _fail(e: BaseException) -> int:
    print(f"❌ {e}", file=sys.stderr)
    return exit_code_for(e)


def cmd_generate(args: argparse.Namespace) -> int:
    config = _pipeline_config(
        args,
        {
            "count": args.count,
            "seed": args.seed,
            "output_dir": args.output_dir,
            "dataset_id": args.dataset_id,
            "workers": args.workers,
            "render.width": args.width,
            "render.height": args.height,
            "render.format": args.format,
            "templates": args.templates,
        },
    )
    print(f"Generating {config.count} instances (seed {config.master_seed}) into {config.output_dir}")
    manifest = generate_dataset(config)
    counts = ", ".join(f"{c} {n}" for c, n in manifest.counts.items())
    print(f"✅ {manifest.count} instances ({counts}); {manifest.total_images} images, mean {manifest.mean_images:.2f}")
    print(f"   instances.jsonl sha256 {manifest.instances_sha256}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    stats = compute_stats(args.dataset_dir)
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
    else:
        print(stats.format_table())
        print("✅ Manifest checks passed")
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    config = _pipeline_config(args, {"curriculum.threshold": _number(args.threshold)})

    logs = aggregate_trial_logs(iter_jsonl(args.logs), model_id=args.model_id)
    records = classify_difficulty(logs, config.threshold)

    known = {inst.id for inst in load_instances(args.dataset_dir)}
    unknown = [r.question_id for r in records if r.question_id not in known]
    if unknown:
        get_logger("cli").warning("%d logged ids are not in the dataset (first: %s)", len(unknown), unknown[0])

    out = Path(args.out) if args.out else Path(args.dataset_dir) / RECORDS_FILE
    write_jsonl(out, (r.to_dict() for r in records))
    simple = sum(1 for r in records if r.difficulty.value == "Simple")
    print(f"✅ {len(records)} questions: {simple} Simple, {len(records) - simple} Challenging -> {out}")
    return 0


def cmd_stage(args: argparse.Namespace) -> int:
    config = _pipeline_config(
        args,
        {
            "curriculum.fraction": _number(args.fraction),
            "curriculum.stages": args.stages,
            "curriculum.variant": args.variant,
        },
    )
    curriculum = config.raw["curriculum"]
    seed = args.seed if args.seed is not None else config.master_seed

    dataset_dir = Path(args.dataset_dir)
    instances = load_instances(dataset_dir)
    records_path = Path(args.records) if args.records else dataset_dir / RECORDS_FILE
    records = [DifficultyRecord.from_dict(row) for row in iter_jsonl(records_path)]
    out = Path(args.out) if args.out else dataset_dir / STAGES_DIR

    files = build_stage_files(
        instances,
        records,
        out,
        stages=curriculum["stages"],
        fraction=config.stage_fraction,
        seed=seed,
        variant=curriculum["variant"],
    )
    for f in files:
        print(f"   stage {f.stage}: {f.rows} rows -> {f.path}")
    if args.baseline:
        rows = build_baseline_file(instances, out / "baseline.jsonl")
        print(f"   baseline: {rows} rows -> {out / 'baseline.jsonl'}")
    print("✅ Stage files written")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _pipeline_config(args, {"matcher.max_in_flight": args.max_in_flight})
    matcher_cfg = config.raw["matcher"]

    gold = {inst.id: GoldItem.from_instance(inst) for inst in load_instances(args.gold)}
    rows = parse_prediction_rows(iter_jsonl(args.predictions))

    matcher = None
    if args.external or matcher_cfg["enabled"]:
        _load_env()
        matcher = ExternalMatcher.from_env(timeout=matcher_cfg["timeout_seconds"])

    predictions = match_predictions(rows, gold, matcher, matcher_cfg["max_in_flight"])
    report = score(predictions, list(gold.values()))
    print(report.format_table())
    if args.out:
        write_json(args.out, report.to_dict())
        print(f"   report -> {args.out}")
    return 0


def cmd_render_preview(args: argparse.Namespace) -> int:
    config = _pipeline_config(
        args,
        {"render.width": args.width, "render.height": args.height, "render.format": args.format},
    )
    for path in render_preview(config, args.seed, args.out):
        print(f"   {path}")
    return 0


def _number(value: Optional[str]) -> Optional[Fraction]:
    """Parse a rate flag; "0.7" and "7/10" are both accepted."""
    if value is None:
        return None
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(ErrorCode.CONFIG_INVALID_VALUE, f"not a number: {value!r}")


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "generate": cmd_generate,
    "stats": cmd_stats,
    "filter": cmd_filter,
    "stage": cmd_stage,
    "eval": cmd_eval,
    "render-preview": cmd_render_preview,
}


def main(argv: Optional[List[str]] = None):
    """Main CLI entry point."""
    try:
        args = parse_args(argv)
        _load_env()

        try:
            config_for_logging = load_config(find_config_file(args.config))
        except ReasonForgeError:
            config_for_logging = None
        setup_logging(config=config_for_logging, log_file=args.log_file, verbose=args.verbose)
        get_logger("cli").info("reasonforge %s: command %s", __version__, args.command)

        try:
            exit_code = COMMANDS[args.command](args)
        except ReasonForgeError as e:
            exit_code = _fail(e)
        except OSError as e:
            exit_code = _fail(e)

        sys.exit(exit_code)

    except KeyboardInterrupt:
        print("\n\nInterrupted.", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
