"""Command-line entry point: extract, synth, stats, pca, bench.

Every run writes a manifest capturing the exact flags (and seed) next to
its outputs, with no timestamps, so identical invocations produce
identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import background as bg
from . import corners, flow, pipeline
from .bench import per_object_csv, run_benchmark
from .bridge import DEFAULT_MAX_IN_FLIGHT, DEFAULT_TIMEOUT, BridgeForecaster
from .dataset import (
    read_series_dir,
    write_manifest,
    write_series_csv,
    write_series_jsonl,
)
from .errors import BenchmarkError, FlowseriesError
from .forecasters import BUILTIN_FORECASTERS
from .frames import load_frame_sequence
from .stats import DEFAULT_ENTROPY_BINS, DEFAULT_PCA_RESAMPLE, pca_compare, summarize_dataset
from .synth import SceneSpec, write_scene

BASELINE_SPEC = "builtin:linreg"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowseries",
        description="Extract univariate time series from frame sequences and "
        "benchmark zero-shot forecasters on them.",
    )
    parser.add_argument("--version", action="version", version=f"flowseries {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="turn a frame directory into series records")
    p_extract.add_argument("--frames", required=True, help="directory of PGM/PNG frames")
    p_extract.add_argument("--pattern", default=None, help="filename glob (default: all supported)")
    p_extract.add_argument("--out", required=True, help="output dataset directory")
    p_extract.add_argument("--source-id", default=None, help="video identifier (default: directory name)")
    p_extract.add_argument("--object-tag", default=None, help="category label (default: from directory name)")
    p_extract.add_argument("--burn-in", type=int, default=pipeline.DEFAULT_BURN_IN,
                           help="background-model frames before corner seeding (default %(default)s)")
    p_extract.add_argument("--mog2-alpha", type=float, default=bg.DEFAULT_ALPHA,
                           help="background learning rate (default %(default)s)")
    p_extract.add_argument("--mog2-tbg", type=float, default=bg.T_BG,
                           help="cumulative background weight threshold (default %(default)s)")
    p_extract.add_argument("--mask-cleanup", action="store_true",
                           help="apply a 3x3 majority filter to foreground masks")
    p_extract.add_argument("--dump-masks", default=None, metavar="DIR",
                           help="write per-frame foreground masks as PGM files")
    p_extract.add_argument("--max-corners", type=int, default=corners.DEFAULT_MAX_CORNERS,
                           help="corners to seed (default %(default)s)")
    p_extract.add_argument("--quality", type=float, default=corners.DEFAULT_QUALITY_LEVEL,
                           help="corner quality as a fraction of the best score (default %(default)s)")
    p_extract.add_argument("--min-distance", type=float, default=corners.DEFAULT_MIN_DISTANCE,
                           help="minimum corner spacing in pixels (default %(default)s)")
    p_extract.add_argument("--lk-window", type=int, default=flow.DEFAULT_WINDOW,
                           help="tracking window size in pixels (default %(default)s)")
    p_extract.add_argument("--pyr-levels", type=int, default=flow.DEFAULT_PYRAMID_DEPTH,
                           help="pyramid depth (default %(default)s)")
    p_extract.add_argument("--lk-iters", type=int, default=flow.DEFAULT_MAX_ITER,
                           help="iteration cap per pyramid level (default %(default)s)")
    p_extract.add_argument("--lk-eps", type=float, default=flow.DEFAULT_EPS,
                           help="per-level convergence threshold in pixels (default %(default)s)")
    p_extract.add_argument("--fb-thresh", type=float, default=flow.DEFAULT_FB_THRESHOLD,
                           help="forward-backward distance cutoff (default %(default)s)")
    p_extract.add_argument("--err-thresh", type=float, default=flow.DEFAULT_RESIDUAL_THRESHOLD,
                           help="single-direction residual cutoff (default %(default)s)")
    p_extract.add_argument("--min-track-len", type=int, default=pipeline.DEFAULT_MIN_TRACK_LEN,
                           help="minimum track lifetime in frames (default %(default)s)")
    p_extract.add_argument("--min-live", type=int, default=pipeline.DEFAULT_MIN_LIVE,
                           help="re-detect corners when fewer tracks survive (default %(default)s)")
    p_extract.add_argument("--select-k", type=int, default=pipeline.DEFAULT_SELECT_K,
                           help="least-correlated tracks to keep (default %(default)s)")
    p_extract.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    p_extract.add_argument("--jobs", type=int, default=1,
                           help="worker cap, reserved for multi-video batches")
    p_extract.set_defaults(func=cmd_extract)

    p_synth = sub.add_parser("synth", help="render a synthetic scene with ground truth")
    p_synth.add_argument("--spec", required=True, help="scene spec JSON file")
    p_synth.add_argument("--seed", type=int, required=True, help="texture seed")
    p_synth.add_argument("--out", required=True, help="output frame directory")
    p_synth.set_defaults(func=cmd_synth)

    p_stats = sub.add_parser("stats", help="summary statistics of a series dataset")
    p_stats.add_argument("--data", required=True, help="dataset directory of *.jsonl files")
    p_stats.add_argument("--entropy-bins", type=int, default=DEFAULT_ENTROPY_BINS,
                         help="histogram bins for entropy (default %(default)s)")
    p_stats.set_defaults(func=cmd_stats)

    p_pca = sub.add_parser("pca", help="project two datasets onto joint principal axes")
    p_pca.add_argument("--a", required=True, help="first dataset directory")
    p_pca.add_argument("--b", required=True, help="second dataset directory")
    p_pca.add_argument("--out", required=True, help="output CSV of labeled 2-D points")
    p_pca.add_argument("--resample-len", type=int, default=DEFAULT_PCA_RESAMPLE,
                       help="common series length before projection (default %(default)s)")
    p_pca.set_defaults(func=cmd_pca)

    p_bench = sub.add_parser("bench", help="score forecasters on a series dataset")
    p_bench.add_argument("--data", required=True, help="dataset directory of *.jsonl files")
    p_bench.add_argument("--forecaster", action="append", required=True, metavar="SPEC",
                         help="builtin:linreg | builtin:naive | cmd:\"<command>\"; "
                         "prefix with NAME= to rename; repeatable")
    p_bench.add_argument("--out", required=True, help="report JSON path")
    p_bench.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                         help="seconds per external request (default %(default)s)")
    p_bench.add_argument("--max-in-flight", type=int, default=DEFAULT_MAX_IN_FLIGHT,
                         help="outstanding external requests (default %(default)s)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def _flags_dict(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _manifest_payload(args: argparse.Namespace) -> dict:
    return {
        "tool": "flowseries",
        "version": __version__,
        "command": args.command,
        "flags": _flags_dict(args),
    }


def cmd_extract(args) -> int:
    seq = load_frame_sequence(
        args.frames, pattern=args.pattern, source_id=args.source_id, object_tag=args.object_tag
    )
    config = pipeline.PipelineConfig(
        burn_in=args.burn_in,
        mog2_alpha=args.mog2_alpha,
        mog2_tbg=args.mog2_tbg,
        mask_cleanup=args.mask_cleanup,
        max_corners=args.max_corners,
        quality_level=args.quality,
        min_distance=args.min_distance,
        lk_window=args.lk_window,
        pyr_levels=args.pyr_levels,
        lk_iters=args.lk_iters,
        lk_eps=args.lk_eps,
        fb_threshold=args.fb_thresh,
        residual_threshold=args.err_thresh,
        min_track_len=args.min_track_len,
        min_live=args.min_live,
        select_k=args.select_k,
        dump_masks=args.dump_masks,
    )
    records, _ = pipeline.extract_series(seq, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series_file = out / f"{seq.source_id}.jsonl"
    write_series_jsonl(records, series_file)
    write_series_csv(records, out / "series.csv")
    manifest = _manifest_payload(args)
    manifest["videos"] = [
        {
            "source": seq.source_id,
            "object": seq.object_tag or "",
            "frames": len(seq),
            "series_count": len(records),
            "file": series_file.name,
        }
    ]
    manifest["series_total"] = len(records)
    manifest["config"] = config.to_dict()
    write_manifest(out / "manifest.json", manifest)
    print(f"extracted {len(records)} series from {len(seq)} frames -> {series_file}")
    return 0


def cmd_synth(args) -> int:
    spec = SceneSpec.from_json(args.spec)
    seq, truths = write_scene(spec, args.seed, args.out)
    manifest = _manifest_payload(args)
    manifest["scene"] = {
        "source": seq.source_id,
        "frames": len(seq),
        "objects": len(truths),
        "width": seq.width,
        "height": seq.height,
    }
    write_manifest(Path(args.out) / "manifest.json", manifest)
    print(f"rendered {len(seq)} frames ({len(truths)} object(s)) -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    records = read_series_dir(args.data)
    summary = summarize_dataset(records, bins=args.entropy_bins)
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_pca(args) -> int:
    records_a = read_series_dir(args.a)
    records_b = read_series_dir(args.b)
    projection = pca_compare(records_a, records_b, resample_len=args.resample_len)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        fh.write("label,pc1,pc2\n")
        for label, (pc1, pc2) in zip(projection.labels, projection.points.tolist()):
            fh.write(f"{label},{pc1!r},{pc2!r}\n")
    manifest = _manifest_payload(args)
    manifest["points"] = len(projection.labels)
    manifest["explained_variance"] = projection.explained_variance.tolist()
    write_manifest(out.parent / f"{out.stem}.manifest.json", manifest)
    print(f"projected {len(projection.labels)} series -> {out}")
    return 0


def parse_forecaster_spec(spec: str, timeout: float, max_in_flight: int) -> tuple[str, object, str]:
    """Return (name, forecaster, raw_spec); NAME=SPEC renames the entry."""
    name, sep, rest = spec.partition("=")
    if not sep or name.startswith(("builtin:", "cmd:")):
        name, rest = spec, spec
    if rest in BUILTIN_FORECASTERS:
        return name, BUILTIN_FORECASTERS[rest], rest
    if rest.startswith("cmd:"):
        command = rest[len("cmd:") :].strip()
        if not command:
            raise BenchmarkError("empty command in forecaster spec")
        return name, BridgeForecaster(command, timeout=timeout, max_in_flight=max_in_flight), rest
    raise BenchmarkError(
        f"unknown forecaster spec '{spec}' (expected builtin:linreg, builtin:naive, or cmd:...)"
    )


def cmd_bench(args) -> int:
    records = read_series_dir(args.data)
    forecasters: dict[str, object] = {}
    baseline = None
    for spec in args.forecaster:
        name, forecaster, raw = parse_forecaster_spec(spec, args.timeout, args.max_in_flight)
        if name in forecasters:
            raise BenchmarkError(f"duplicate forecaster name '{name}'")
        forecasters[name] = forecaster
        if raw == BASELINE_SPEC and baseline is None:
            baseline = name
    if baseline is None:
        raise BenchmarkError(
            f"the baseline forecaster ({BASELINE_SPEC}) must be included"
        )

    report = run_benchmark(records, forecasters, baseline=baseline)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json(), encoding="utf-8")
    (out.parent / "per_object.csv").write_text(per_object_csv(report), encoding="utf-8")
    manifest = _manifest_payload(args)
    manifest["windows_total"] = report.windows_total
    manifest["series_skipped"] = report.series_skipped
    write_manifest(out.parent / f"{out.stem}.manifest.json", manifest)
    print(f"benchmarked {len(forecasters)} forecaster(s) on {report.windows_total} windows -> {out}")
    return 0


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FlowseriesError as exc:
        print(f"flowseries {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
