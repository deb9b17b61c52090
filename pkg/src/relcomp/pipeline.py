"""End-to-end compression: parse, plan, encode, assemble, report.

This is the orchestration the ``compress`` command fronts. Given a source
recording and its phase annotations, it plans segments under the idle
policy, encodes each with the optimal profile of its relevance level, lays
out the archive, and accounts the savings against a baseline encode
(H.264 at the recording CRF) of the same source.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from . import analysis, quality, transcode
from .errors import EncodingError
from .profiles import CodecFamily, OptimalProfileTable, Resolution, default_optimal_table
from .timeline import (
    IdlePolicy,
    RelevanceTable,
    default_relevance_table,
    pad_to_frames,
    parse_annotations,
    plan_segments,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompressionResult:
    manifest: dict
    report: analysis.SavingsReport
    out_dir: Path


def measure_plan_ssim(
    source: str | Path,
    plan,
    clips: list[transcode.EncodedClip],
    backend: transcode.FfmpegBackend,
    workdir: Path,
    fps: float,
    total_frames: int,
) -> list[float]:
    """Mean SSIM per planned segment: encoded output vs the source frames.

    Both sides are dumped to raw yuv420p; the encoded frames are upscaled
    back to source resolution before comparison.
    """
    values = []
    for i, (seg, clip) in enumerate(zip(plan.segments, clips)):
        ref_cut = workdir / f"ssim_ref_{i:03d}.mp4"
        ref_clip = transcode.extract_segment(
            source, (seg.start_frame, seg.end_frame), backend, ref_cut,
            fps=fps, total_frames=total_frames,
        )
        ref_yuv = workdir / f"ssim_ref_{i:03d}.yuv"
        enc_yuv = workdir / f"ssim_enc_{i:03d}.yuv"
        transcode.decode_to_yuv420p(ref_clip.path, ref_yuv, backend)
        transcode.decode_to_yuv420p(clip.path, enc_yuv, backend)
        ref_info = backend.probe(ref_clip.path)
        res = clip.profile.resolution
        ref_frames = quality.read_yuv420p(ref_yuv, ref_info.width, ref_info.height)
        enc_frames = quality.read_yuv420p(enc_yuv, res.width, res.height)
        values.append(quality.ssim_clip(ref_frames, enc_frames).mean)
        for p in (ref_cut, ref_yuv, enc_yuv):
            p.unlink()
    return values


def compress_video(
    source: str | Path,
    annotations: str,
    codec: CodecFamily,
    policy: IdlePolicy = IdlePolicy.DROP,
    out_dir: str | Path = "archive",
    backend: transcode.FfmpegBackend | None = None,
    profile_table: OptimalProfileTable | None = None,
    relevance_table: RelevanceTable | None = None,
    workers: int | None = None,
    baseline_crf: int | None = 16,
    baseline_kbps: float | None = None,
    measure_ssim: bool = False,
) -> CompressionResult:
    """Run the full relevance-based compression of one recording.

    ``annotations`` is the annotation CSV text. The baseline bitrate comes
    from ``baseline_kbps`` when given, otherwise from a fresh H.264 encode
    of the source at ``baseline_crf``; with neither, the report carries no
    savings rows.
    """
    backend = backend or transcode.FfmpegBackend()
    profile_table = profile_table or default_optimal_table()
    relevance_table = relevance_table or default_relevance_table()
    out_dir = Path(out_dir)
    workdir = out_dir / "work"
    workdir.mkdir(parents=True, exist_ok=True)

    info = backend.probe(source)
    timeline = parse_annotations(
        annotations, fps=info.fps, frame_width=info.width, frame_height=info.height
    )
    timeline = pad_to_frames(timeline, info.frames)
    plan = plan_segments(timeline, relevance_table, policy)
    log.info(
        "planned %d segments, dropping %d of %d frames",
        len(plan.segments), plan.dropped_frames, plan.total_frames,
    )

    clips = transcode.encode_plan(
        source, plan, codec, profile_table, backend, workdir,
        fps=info.fps, workers=workers,
        source_resolution=Resolution(info.width, info.height),
    )

    ssim_values: list[float] | None = None
    if measure_ssim:
        ssim_values = measure_plan_ssim(
            source, plan, clips, backend, workdir, info.fps, info.frames
        )

    baseline: transcode.BaselineEncode | None = None
    if baseline_kbps is None and baseline_crf is not None:
        baseline = transcode.encode_baseline(
            source, backend, workdir / "baseline.mp4",
            crf=baseline_crf, duration_s=info.duration_s,
        )
        baseline_kbps = baseline.bitrate_kbps
        log.info("baseline CRF %d: %.0f kbps", baseline_crf, baseline_kbps)

    manifest = transcode.assemble(
        plan, clips, out_dir, Path(source).name, info.fps,
        ssim_per_segment=ssim_values,
    )
    if baseline_kbps is not None:
        manifest["baseline_kbps"] = round(baseline_kbps, 3)

    report = build_savings_report(plan, clips, codec, baseline_kbps)
    (out_dir / "report.json").write_text(
        analysis.emit_report(report, "json"), encoding="utf-8"
    )
    (out_dir / "report.csv").write_text(
        analysis.emit_report(report, "csv"), encoding="utf-8"
    )
    if "baseline_kbps" in manifest:
        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
    return CompressionResult(manifest=manifest, report=report, out_dir=out_dir)


def build_savings_report(
    plan,
    clips: list[transcode.EncodedClip],
    codec: CodecFamily,
    baseline_kbps: float | None,
) -> analysis.SavingsReport:
    """Aggregate per-relevance and whole-surgery savings from encoded clips."""
    if len(clips) != len(plan.segments):
        raise EncodingError("clips do not match the plan")
    categories = []
    surgeries = []
    if baseline_kbps is not None:
        by_level: dict = {}
        for seg, clip in zip(plan.segments, clips):
            bucket = by_level.setdefault(seg.level, [0, 0.0])
            bucket[0] += clip.size_bytes
            bucket[1] += clip.duration_s
        for level in sorted(by_level, reverse=True):
            size_bytes, duration = by_level[level]
            kbps = transcode.measure_bitrate(size_bytes, duration)
            categories.append(
                analysis.category_saving(level, codec, baseline_kbps, kbps)
            )
        total_bytes = sum(c.size_bytes for c in clips)
        planned_duration = sum(c.duration_s for c in clips)
        compressed_kbps = transcode.measure_bitrate(total_bytes, planned_duration)
        dropped_fraction = plan.dropped_frames / plan.total_frames
        surgeries.append(
            analysis.surgery_saving(
                codec, dropped_fraction, baseline_kbps, compressed_kbps
            )
        )
    return analysis.SavingsReport(
        categories=tuple(categories), surgeries=tuple(surgeries)
    )
