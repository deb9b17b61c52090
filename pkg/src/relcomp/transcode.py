"""Segment extraction, external encoding, and archive assembly.

Encoding is delegated to an external transcoder process (ffmpeg or a
compatible drop-in). Planned segments are first cut frame-accurately into a
lossless intermediate, then encoded with the profile of their relevance
level; a bounded worker pool runs the per-segment jobs concurrently and
assembly writes per-segment files plus a JSON manifest.
"""

from __future__ import annotations

import json
import logging
import os
import shutil
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import EncodingError
from .profiles import CodecFamily, EncodingProfile, OptimalProfileTable, Resolution
from .timeline import EncodePlan, PlannedSegment

log = logging.getLogger(__name__)

FFMPEG_ENV = "RELCOMP_FFMPEG"
FFPROBE_ENV = "RELCOMP_FFPROBE"

# Container per codec family: AV1-in-mp4 is not reliable across older
# transcoder builds, Matroska always is.
_CONTAINERS = {
    CodecFamily.H264: ".mp4",
    CodecFamily.H265: ".mp4",
    CodecFamily.AV1: ".mkv",
}


@dataclass(frozen=True)
class ClipRef:
    """A playable clip covering one source frame range."""

    path: Path
    start_frame: int
    end_frame: int
    fps: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", Path(self.path))
        if self.start_frame < 0 or self.start_frame >= self.end_frame:
            raise EncodingError(
                f"invalid frame range [{self.start_frame}, {self.end_frame})"
            )
        if self.fps <= 0:
            raise EncodingError(f"fps must be positive, got {self.fps}")

    @property
    def frames(self) -> int:
        return self.end_frame - self.start_frame

    @property
    def duration_s(self) -> float:
        return self.frames / self.fps


@dataclass(frozen=True)
class EncodedClip:
    """Result of one encoder job with its measured cost."""

    path: Path
    profile: EncodingProfile
    size_bytes: int
    duration_s: float
    bitrate_kbps: float


def measure_bitrate(size_bytes: int, duration_s: float) -> float:
    """kbps from a payload size and duration."""
    if duration_s <= 0:
        raise EncodingError(f"duration must be positive, got {duration_s}")
    return size_bytes * 8.0 / duration_s / 1000.0


@dataclass(frozen=True)
class VideoInfo:
    width: int
    height: int
    fps: float
    frames: int
    duration_s: float


class FfmpegBackend:
    """Invocation template for an ffmpeg-compatible external transcoder.

    The executable is resolved from the constructor argument, the
    RELCOMP_FFMPEG / RELCOMP_FFPROBE environment variables, or PATH, in that
    order. Speed-oriented knobs (presets, AV1 cpu-used) change encoding time
    and size but never the requested codec, CRF, or resolution.
    """

    def __init__(
        self,
        executable: str | None = None,
        probe_executable: str | None = None,
        x264_preset: str = "medium",
        x265_preset: str = "medium",
        av1_cpu_used: int = 6,
        timeout_s: float | None = None,
    ) -> None:
        self.executable = executable or os.environ.get(FFMPEG_ENV) or shutil.which("ffmpeg")
        if not self.executable:
            raise EncodingError(
                "no ffmpeg executable found (set RELCOMP_FFMPEG or install ffmpeg)"
            )
        self.probe_executable = (
            probe_executable or os.environ.get(FFPROBE_ENV) or shutil.which("ffprobe")
        )
        self.x264_preset = x264_preset
        self.x265_preset = x265_preset
        self.av1_cpu_used = av1_cpu_used
        self.timeout_s = timeout_s

    def capabilities(self) -> set[CodecFamily]:
        return {CodecFamily.H264, CodecFamily.H265, CodecFamily.AV1}

    def codec_args(self, profile: EncodingProfile) -> list[str]:
        """Encoder selector, CRF, and speed flags for one profile."""
        if profile.codec is CodecFamily.H264:
            return ["-c:v", "libx264", "-preset", self.x264_preset, "-crf", str(profile.crf)]
        if profile.codec is CodecFamily.H265:
            return [
                "-c:v", "libx265", "-preset", self.x265_preset,
                "-x265-params", "log-level=error", "-crf", str(profile.crf),
            ]
        if profile.codec is CodecFamily.AV1:
            return [
                "-c:v", "libaom-av1", "-b:v", "0", "-crf", str(profile.crf),
                "-cpu-used", str(self.av1_cpu_used), "-row-mt", "1",
                "-strict", "experimental",
            ]
        raise EncodingError(f"unsupported codec {profile.codec}")

    def encode_args(
        self, input_path: Path, profile: EncodingProfile, output_path: Path
    ) -> list[str]:
        res = profile.resolution
        return [
            self.executable, "-hide_banner", "-loglevel", "error", "-y",
            "-i", str(input_path), "-an",
            "-vf", f"scale={res.width}:{res.height}",
            "-pix_fmt", "yuv420p",
            *self.codec_args(profile),
            str(output_path),
        ]

    def run(self, args: list[str]) -> None:
        log.debug("exec: %s", " ".join(args))
        try:
            proc = subprocess.run(
                args, capture_output=True, text=True, timeout=self.timeout_s
            )
        except subprocess.TimeoutExpired as exc:
            raise EncodingError(f"transcoder timed out after {exc.timeout}s") from None
        except OSError as exc:
            raise EncodingError(f"cannot run transcoder: {exc}") from None
        if proc.returncode != 0:
            tail = (proc.stderr or "").strip().splitlines()[-5:]
            raise EncodingError(
                f"transcoder exited with {proc.returncode}: {' | '.join(tail)}"
            )

    def probe(self, path: str | Path) -> VideoInfo:
        """Stream metadata of the first video stream."""
        if not self.probe_executable:
            raise EncodingError(
                "no ffprobe executable found (set RELCOMP_FFPROBE or install ffprobe)"
            )
        args = [
            self.probe_executable, "-v", "error",
            "-select_streams", "v:0",
            "-count_frames",
            "-show_entries",
            "stream=width,height,r_frame_rate,nb_read_frames",
            "-of", "json", str(path),
        ]
        try:
            proc = subprocess.run(args, capture_output=True, text=True, timeout=self.timeout_s)
        except OSError as exc:
            raise EncodingError(f"cannot run ffprobe: {exc}") from None
        if proc.returncode != 0:
            raise EncodingError(f"ffprobe failed on {path}: {proc.stderr.strip()}")
        stream = json.loads(proc.stdout)["streams"][0]
        num, den = stream["r_frame_rate"].split("/")
        fps = float(num) / float(den)
        frames = int(stream["nb_read_frames"])
        return VideoInfo(
            width=int(stream["width"]),
            height=int(stream["height"]),
            fps=fps,
            frames=frames,
            duration_s=frames / fps,
        )


def extract_segment(
    source: str | Path,
    frame_range: tuple[int, int],
    backend: FfmpegBackend,
    out_path: str | Path,
    fps: float | None = None,
    total_frames: int | None = None,
) -> ClipRef:
    """Cut one frame range into a lossless intermediate clip.

    Selection is by frame index (decode + re-encode, not keyframe-aligned
    stream copy) so cuts land exactly on the annotation boundaries. The
    intermediate is lossless x264 to keep the measured encode the only lossy
    generation. fps / total_frames are probed from the source when omitted.
    """
    start, end = frame_range
    if start >= end:
        raise EncodingError(f"empty frame range [{start}, {end})")
    if fps is None or total_frames is None:
        info = backend.probe(source)
        fps = fps if fps is not None else info.fps
        total_frames = total_frames if total_frames is not None else info.frames
    if start < 0 or end > total_frames:
        raise EncodingError(
            f"frame range [{start}, {end}) outside source [0, {total_frames})"
        )
    out_path = Path(out_path)
    args = [
        backend.executable, "-hide_banner", "-loglevel", "error", "-y",
        "-i", str(source), "-an",
        "-vf", f"select=between(n\\,{start}\\,{end - 1}),setpts=N/FRAME_RATE/TB",
        "-vsync", "0",
        "-c:v", "libx264", "-qp", "0", "-preset", "ultrafast",
        str(out_path),
    ]
    backend.run(args)
    return ClipRef(path=out_path, start_frame=start, end_frame=end, fps=fps)


def encode_clip(
    clip: ClipRef,
    profile: EncodingProfile,
    backend: FfmpegBackend,
    out_path: str | Path | None = None,
) -> EncodedClip:
    """Encode one clip with one profile and measure the result."""
    if profile.codec not in backend.capabilities():
        raise EncodingError(f"unsupported codec {profile.codec.value}")
    if out_path is None:
        out_path = clip.path.with_name(
            clip.path.stem + f".{profile.codec.value}-crf{profile.crf}"
            + _CONTAINERS[profile.codec]
        )
    out_path = Path(out_path)
    started = time.monotonic()
    backend.run(backend.encode_args(clip.path, profile, out_path))
    log.info(
        "encoded %s [%d frames] with %s crf=%d %s in %.1fs",
        clip.path.name, clip.frames, profile.codec.value, profile.crf,
        profile.resolution, time.monotonic() - started,
    )
    size = out_path.stat().st_size
    duration = clip.duration_s
    return EncodedClip(
        path=out_path,
        profile=profile,
        size_bytes=size,
        duration_s=duration,
        bitrate_kbps=measure_bitrate(size, duration),
    )


def decode_to_yuv420p(
    source: str | Path,
    out_path: str | Path,
    backend: FfmpegBackend,
) -> None:
    """Dump a clip as raw planar yuv420p (dimensions via probe)."""
    args = [
        backend.executable, "-hide_banner", "-loglevel", "error", "-y",
        "-i", str(source), "-an",
        "-pix_fmt", "yuv420p", "-f", "rawvideo", str(out_path),
    ]
    backend.run(args)


def encode_plan(
    source: str | Path,
    plan: EncodePlan,
    codec: CodecFamily,
    table: OptimalProfileTable,
    backend: FfmpegBackend,
    workdir: str | Path,
    fps: float,
    workers: int | None = None,
    source_resolution: Resolution | None = None,
) -> list[EncodedClip]:
    """Extract and encode every planned segment, bounded-parallel.

    Returns encoded clips in plan order. Extraction and encoding of one
    segment form one job; up to ``workers`` external processes run at once
    (default: logical CPU count). When ``source_resolution`` is given,
    profiles larger than the source are clamped to it: upscaling only
    inflates bitrate, it cannot restore detail.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = os.cpu_count() or 1

    def effective_profile(level) -> EncodingProfile:
        profile = table.get(level, codec).profile
        src = source_resolution
        if src and (
            profile.resolution.width > src.width
            or profile.resolution.height > src.height
        ):
            return EncodingProfile(profile.codec, profile.crf, src)
        return profile

    def job(index: int, seg: PlannedSegment) -> EncodedClip:
        profile = effective_profile(seg.level)
        cut = workdir / f"cut_{index:03d}.mp4"
        clip = extract_segment(
            source, (seg.start_frame, seg.end_frame), backend, cut,
            fps=fps, total_frames=plan.total_frames,
        )
        out = workdir / (
            f"seg_{index:03d}.{profile.codec.value}-crf{profile.crf}"
            + _CONTAINERS[profile.codec]
        )
        encoded = encode_clip(clip, profile, backend, out)
        cut.unlink()
        return encoded

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job, i, seg) for i, seg in enumerate(plan.segments)]
        return [f.result() for f in futures]


def assemble(
    plan: EncodePlan,
    clips: list[EncodedClip],
    out_dir: str | Path,
    source_name: str,
    fps: float,
    ssim_per_segment: list[float | None] | None = None,
) -> dict:
    """Lay out per-segment files plus manifest.json in timeline order.

    The manifest records original frame ranges, source phases, and per-file
    cost so the archive stays self-describing. Returns the manifest dict;
    clip payloads are copied, not re-encoded.
    """
    if len(clips) != len(plan.segments):
        raise EncodingError(
            f"{len(plan.segments)} planned segments but {len(clips)} encoded clips"
        )
    if not clips:
        raise EncodingError("nothing to assemble: no planned segments")
    if ssim_per_segment is not None and len(ssim_per_segment) != len(clips):
        raise EncodingError("ssim list does not match segment count")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for i, (seg, clip) in enumerate(zip(plan.segments, clips)):
        name = f"segment_{i:03d}{clip.path.suffix}"
        target = out_dir / name
        if clip.path.resolve() != target.resolve():
            shutil.copyfile(clip.path, target)
        entry = {
            "file": name,
            "labels": [label.value for label in seg.source_labels],
            "relevance": seg.level.code,
            "frames": [seg.start_frame, seg.end_frame],
            "profile": {
                "codec": clip.profile.codec.value,
                "crf": clip.profile.crf,
                "resolution": str(clip.profile.resolution),
            },
            "bytes": clip.size_bytes,
            "kbps": round(clip.bitrate_kbps, 3),
        }
        if ssim_per_segment is not None and ssim_per_segment[i] is not None:
            entry["ssim"] = round(ssim_per_segment[i], 6)
        entries.append(entry)

    manifest = {
        "source": source_name,
        "policy": plan.idle_policy.value,
        "fps": fps,
        "total_frames": plan.total_frames,
        "planned_frames": plan.planned_frames,
        "dropped_frames": plan.dropped_frames,
        "total_bytes": sum(c.size_bytes for c in clips),
        "planned_duration_s": plan.planned_frames / fps,
        "segments": entries,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def concat_clips(
    clips: list[EncodedClip],
    out_path: str | Path,
    backend: FfmpegBackend,
) -> Path:
    """Concatenate clips into one container without re-encoding.

    Only valid when every clip shares codec and resolution; mixed-codec
    archives stay per-segment files.
    """
    if not clips:
        raise EncodingError("nothing to concatenate")
    profiles = {(c.profile.codec, c.profile.resolution) for c in clips}
    if len(profiles) > 1:
        raise EncodingError(
            "cannot concatenate mixed codec/resolution segments into one container"
        )
    out_path = Path(out_path)
    listing = out_path.with_suffix(".concat.txt")
    listing.write_text(
        "".join(f"file '{c.path.resolve()}'\n" for c in clips), encoding="utf-8"
    )
    args = [
        backend.executable, "-hide_banner", "-loglevel", "error", "-y",
        "-f", "concat", "-safe", "0", "-i", str(listing),
        "-c", "copy", str(out_path),
    ]
    backend.run(args)
    listing.unlink()
    return out_path


@dataclass(frozen=True)
class BaselineEncode:
    """Reference encode the savings are measured against (H.264, CRF 14-16)."""

    path: Path
    crf: int
    size_bytes: int
    duration_s: float
    bitrate_kbps: float


def encode_baseline(
    source: str | Path,
    backend: FfmpegBackend,
    out_path: str | Path,
    crf: int = 16,
    duration_s: float | None = None,
) -> BaselineEncode:
    """Encode the whole source the way the archive would store it today:
    H.264 at the recording CRF, original resolution.

    The recording CRF sits below the evaluation ladder on purpose; this
    establishes the original bitrate that savings are measured against.
    """
    out_path = Path(out_path)
    if duration_s is None:
        info = backend.probe(source)
        duration_s = info.duration_s
    args = [
        backend.executable, "-hide_banner", "-loglevel", "error", "-y",
        "-i", str(source), "-an",
        "-pix_fmt", "yuv420p",
        "-c:v", "libx264", "-preset", backend.x264_preset, "-crf", str(crf),
        str(out_path),
    ]
    backend.run(args)
    size = out_path.stat().st_size
    return BaselineEncode(
        path=out_path,
        crf=crf,
        size_bytes=size,
        duration_s=duration_s,
        bitrate_kbps=measure_bitrate(size, duration_s),
    )
