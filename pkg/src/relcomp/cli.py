"""Command-line entry point tying the pipeline together.

Machine-readable output (CSV/JSON) goes to stdout, human progress and
summaries to stderr. Failure classes map to distinct exit codes so batch
callers can tell an annotation problem from a transcoder crash.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import api_service, pipeline, quality, study
from .errors import (
    AnnotationError,
    CatalogError,
    EncodingError,
    PlanningError,
    ProfileError,
    QualityError,
    RelcompError,
    ReportError,
    SessionError,
)
from .profiles import (
    CodecFamily,
    OptimalProfileTable,
    default_optimal_table,
    setup_grid,
)
from .timeline import IdlePolicy, RelevanceLevel, default_relevance_table

EXIT_CODES: tuple[tuple[type, int], ...] = (
    (AnnotationError, 3),
    (PlanningError, 3),
    (EncodingError, 4),
    (CatalogError, 5),
    (SessionError, 5),
    (ProfileError, 5),
    (QualityError, 6),
    (ReportError, 7),
    (RelcompError, 1),
)


def _codec(name: str) -> CodecFamily:
    try:
        return CodecFamily(name.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown codec {name!r} (choose from h264, h265, av1)"
        )


def _policy(name: str) -> IdlePolicy:
    try:
        return IdlePolicy(name.lower())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown idle policy {name!r} (drop, merge-preceding, merge-subsequent)"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relcomp",
        description="Relevance-based compression of phase-annotated surgery videos.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress one recording end to end")
    p.add_argument("video", type=Path)
    p.add_argument("annotations", type=Path)
    p.add_argument("--codec", type=_codec, default=CodecFamily.H265)
    p.add_argument("--idle-policy", type=_policy, default=IdlePolicy.DROP)
    p.add_argument("--profiles", type=Path, help="optimal-profile table JSON")
    p.add_argument("--relevance-overrides", type=Path, help="relevance override CSV")
    p.add_argument("--out", type=Path, default=Path("archive"))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--baseline-crf", type=int, default=16)
    p.add_argument("--baseline-kbps", type=float, default=None)
    p.add_argument("--no-baseline", action="store_true")
    p.add_argument("--measure-ssim", action="store_true")
    p.add_argument("--json", action="store_true", help="print the manifest to stdout")

    p = sub.add_parser("grid", help="print a codec's evaluation setup grid")
    p.add_argument("--codec", type=_codec, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("rank", help="rank measurements into a setup catalog")
    p.add_argument("measurements", type=Path)
    p.add_argument("--out", type=Path, help="write catalog CSV here instead of stdout")

    p = sub.add_parser("thresholds", help="derive per-category thresholds and optima")
    p.add_argument("results", type=Path, help="CSV participant,category,result_setup")
    p.add_argument("--catalog", type=Path, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("study", help="rating-study service")
    study_sub = p.add_subparsers(dest="study_command", required=True)
    s = study_sub.add_parser("serve", help="run the rating HTTP service")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=None)

    return parser


def cmd_compress(args: argparse.Namespace) -> int:
    annotations = args.annotations.read_text(encoding="utf-8")
    table = default_optimal_table()
    if args.profiles:
        table = OptimalProfileTable.from_json(args.profiles.read_text(encoding="utf-8"))
    relevance = default_relevance_table()
    if args.relevance_overrides:
        relevance = relevance.with_overrides(
            args.relevance_overrides.read_text(encoding="utf-8")
        )
    result = pipeline.compress_video(
        source=args.video,
        annotations=annotations,
        codec=args.codec,
        policy=args.idle_policy,
        out_dir=args.out,
        profile_table=table,
        relevance_table=relevance,
        workers=args.workers,
        baseline_crf=None if args.no_baseline else args.baseline_crf,
        baseline_kbps=args.baseline_kbps,
        measure_ssim=args.measure_ssim,
    )
    manifest = result.manifest
    print(
        f"wrote {len(manifest['segments'])} segments "
        f"({manifest['planned_frames']}/{manifest['total_frames']} frames) "
        f"to {result.out_dir}",
        file=sys.stderr,
    )
    for row in result.report.surgeries:
        print(
            f"total saving with {row.codec.value}: {100.0 * row.total_saving:.2f}%",
            file=sys.stderr,
        )
    if args.json:
        print(json.dumps(manifest, indent=2))
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    profiles = setup_grid(args.codec)
    if args.json:
        print(
            json.dumps(
                [
                    {
                        "codec": p.codec.value,
                        "crf": p.crf,
                        "width": p.resolution.width,
                        "height": p.resolution.height,
                    }
                    for p in profiles
                ],
                indent=2,
            )
        )
    else:
        print("codec,crf,width,height")
        for p in profiles:
            print(f"{p.codec.value},{p.crf},{p.resolution.width},{p.resolution.height}")
    print(f"{len(profiles)} setups for {args.codec.value}", file=sys.stderr)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    measurements = quality.measurements_from_csv(
        args.measurements.read_text(encoding="utf-8")
    )
    catalog = quality.build_catalog(measurements)
    text = quality.catalog_to_csv(catalog)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
        print(f"wrote {len(catalog)} ranked setups to {args.out}", file=sys.stderr)
    else:
        print(text, end="")
    return 0


def cmd_thresholds(args: argparse.Namespace) -> int:
    catalog = quality.catalog_from_csv(args.catalog.read_text(encoding="utf-8"))
    rows = [
        line.split(",")
        for line in args.results.read_text(encoding="utf-8").strip().splitlines()[1:]
        if line.strip()
    ]
    by_category: dict[RelevanceLevel, list[int]] = {}
    for row in rows:
        if len(row) < 3:
            raise SessionError(f"bad results row: {row!r}")
        by_category.setdefault(RelevanceLevel.from_code(row[1].strip()), []).append(
            int(row[2])
        )
    output = {}
    for category in sorted(by_category, reverse=True):
        threshold = study.threshold_from_ratings(
            by_category[category], catalog, category
        )
        optima = study.select_optimal(catalog, threshold)
        output[category.code] = {
            "threshold_setup": threshold.setup_number,
            "threshold_ssim": threshold.ssim,
            "optimal": {
                codec.value: {
                    "setup": entry.setup_number,
                    "crf": entry.profile.crf,
                    "resolution": str(entry.profile.resolution),
                    "ssim": entry.mean_ssim,
                    "bitrate_kbps": entry.bitrate_kbps,
                }
                for codec, entry in sorted(optima.items(), key=lambda kv: kv[0].value)
            },
        }
    if args.json:
        print(json.dumps(output, indent=2))
    else:
        print("category,threshold_setup,threshold_ssim,codec,setup,crf,resolution,ssim,bitrate_kbps")
        for code, row in output.items():
            for codec_name, opt in row["optimal"].items():
                print(
                    f"{code},{row['threshold_setup']},{row['threshold_ssim']:.4f},"
                    f"{codec_name},{opt['setup']},{opt['crf']},{opt['resolution']},"
                    f"{opt['ssim']:.4f},{opt['bitrate_kbps']:.2f}"
                )
    return 0


def cmd_study_serve(args: argparse.Namespace) -> int:
    config = api_service.ServiceConfig.from_file(args.config)
    api_service.serve(config, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handlers = {
        "compress": cmd_compress,
        "grid": cmd_grid,
        "rank": cmd_rank,
        "thresholds": cmd_thresholds,
        "study": cmd_study_serve,
    }
    try:
        return handlers[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except RelcompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for klass, code in EXIT_CODES:
            if isinstance(exc, klass):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
