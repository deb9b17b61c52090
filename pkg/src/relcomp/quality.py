"""Frame-level SSIM, plane rescaling, and SSIM-ranked setup catalogs.

SSIM is computed on the luma plane with the canonical parameters: an 11x11
Gaussian window (sigma 1.5), K1=0.01, K2=0.03 on an 8-bit dynamic range,
and only windows that lie fully inside the frame (no border padding).
Encodes at reduced resolution are upscaled back to the reference resolution
(bilinear) before comparison so every setup lands on one quality scale.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CatalogError, QualityError
from .profiles import (
    CodecFamily,
    EncodingProfile,
    Resolution,
    SetupCatalog,
    SetupEntry,
)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2


@dataclass(frozen=True)
class Frame:
    """One decoded frame: 8-bit luma plane plus optional 4:2:0 chroma."""

    y: np.ndarray
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.y.ndim != 2 or self.y.dtype != np.uint8:
            raise QualityError("luma plane must be a 2D uint8 array")
        ch, cw = (self.height + 1) // 2, (self.width + 1) // 2
        for name, plane in (("u", self.u), ("v", self.v)):
            if plane is None:
                continue
            if plane.shape != (ch, cw) or plane.dtype != np.uint8:
                raise QualityError(
                    f"{name} plane must be uint8 of shape {(ch, cw)} for 4:2:0, "
                    f"got {plane.shape}"
                )
        if (self.u is None) != (self.v is None):
            raise QualityError("chroma planes must be both present or both absent")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    @property
    def resolution(self) -> Resolution:
        return Resolution(self.width, self.height)


@dataclass(frozen=True)
class SsimResult:
    per_frame: tuple[float, ...]
    mean: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        if not self.per_frame:
            raise QualityError("SSIM result needs at least one frame")
        if np.isnan(self.mean):
            object.__setattr__(self, "mean", float(np.mean(self.per_frame)))


def _gaussian_taps() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - SSIM_WINDOW // 2
    taps = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
    return taps / taps.sum()


_TAPS = _gaussian_taps()


def _window_means(img: np.ndarray) -> np.ndarray:
    """Gaussian-weighted window means, valid positions only (separable)."""
    h, w = img.shape
    r = SSIM_WINDOW - 1
    rows = np.zeros((h, w - r))
    for k in range(SSIM_WINDOW):
        rows += _TAPS[k] * img[:, k : w - r + k]
    out = np.zeros((h - r, w - r))
    for k in range(SSIM_WINDOW):
        out += _TAPS[k] * rows[k : h - r + k, :]
    return out


def _luma(frame: Frame | np.ndarray) -> np.ndarray:
    plane = frame.y if isinstance(frame, Frame) else frame
    return np.asarray(plane, dtype=np.float64)


def ssim_frame(reference: Frame | np.ndarray, test: Frame | np.ndarray) -> float:
    """Mean SSIM between two equal-sized frames, luma only.

    Identical inputs score exactly 1.0. Raises QualityError on a dimension
    mismatch (rescale first) or if the frame is smaller than the window.
    """
    a = _luma(reference)
    b = _luma(test)
    if a.shape != b.shape:
        raise QualityError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < SSIM_WINDOW:
        raise QualityError(
            f"frame {a.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    mu_a = _window_means(a)
    mu_b = _window_means(b)
    var_a = _window_means(a * a) - mu_a * mu_a
    var_b = _window_means(b * b) - mu_b * mu_b
    cov = _window_means(a * b) - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + _C1) * (2.0 * cov + _C2)) / (
        (mu_a * mu_a + mu_b * mu_b + _C1) * (var_a + var_b + _C2)
    )
    return float(ssim_map.mean())


def _resize_plane(plane: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear resample with corner-aligned sampling, rounded back to uint8."""
    src = plane.astype(np.float64)
    h, w = src.shape
    xs = np.linspace(0.0, w - 1.0, width)
    x0 = np.floor(xs).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    fx = xs - x0
    rows = src[:, x0] * (1.0 - fx) + src[:, x1] * fx
    ys = np.linspace(0.0, h - 1.0, height)
    y0 = np.floor(ys).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    fy = (ys - y0)[:, None]
    out = rows[y0, :] * (1.0 - fy) + rows[y1, :] * fy
    return np.rint(np.clip(out, 0.0, 255.0)).astype(np.uint8)


def rescale(frame: Frame, target: Resolution) -> Frame:
    """Bilinear rescale of all planes to the target resolution."""
    if target.width <= 0 or target.height <= 0:
        raise QualityError(f"invalid target resolution {target}")
    if frame.resolution == target:
        return frame
    y = _resize_plane(frame.y, target.height, target.width)
    u = v = None
    if frame.u is not None and frame.v is not None:
        ch, cw = (target.height + 1) // 2, (target.width + 1) // 2
        u = _resize_plane(frame.u, ch, cw)
        v = _resize_plane(frame.v, ch, cw)
    return Frame(y=y, u=u, v=v)


def ssim_clip(
    reference: Sequence[Frame],
    test: Sequence[Frame],
) -> SsimResult:
    """Per-frame SSIM over two clips plus the arithmetic mean.

    Test frames at a different resolution are upscaled to the reference
    resolution first. Frames are compared independently and in order.
    """
    if len(reference) != len(test):
        raise QualityError(
            f"frame-count mismatch: {len(reference)} reference vs {len(test)} test"
        )
    if not reference:
        raise QualityError("empty clip")
    values = []
    for ref, enc in zip(reference, test):
        if enc.resolution != ref.resolution:
            enc = rescale(enc, ref.resolution)
        values.append(ssim_frame(ref, enc))
    return SsimResult(per_frame=tuple(values))


@dataclass(frozen=True)
class Measurement:
    """Measured quality and cost of one encoding setup."""

    profile: EncodingProfile
    mean_ssim: float
    bitrate_kbps: float


def build_catalog(
    measurements: Iterable[Measurement],
    scope: frozenset[CodecFamily] | None = None,
) -> SetupCatalog:
    """Rank measurements into a setup catalog (1 = best mean SSIM).

    Ties on SSIM break toward lower bitrate, then lexicographic profile, so
    the numbering is deterministic.
    """
    items = list(measurements)
    if not items:
        raise CatalogError("no measurements to rank")
    items.sort(key=lambda m: (-m.mean_ssim, m.bitrate_kbps, m.profile.sort_key()))
    entries = tuple(
        SetupEntry(
            setup_number=i,
            profile=m.profile,
            mean_ssim=m.mean_ssim,
            bitrate_kbps=m.bitrate_kbps,
        )
        for i, m in enumerate(items, start=1)
    )
    if scope is None:
        scope = frozenset(m.profile.codec for m in items)
    return SetupCatalog(entries=entries, scope=scope)


CATALOG_CSV_HEADER = ["setup", "codec", "crf", "width", "height", "mean_ssim", "bitrate_kbps"]


def catalog_to_csv(catalog: SetupCatalog) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CATALOG_CSV_HEADER)
    for e in catalog.entries:
        writer.writerow(
            [
                e.setup_number,
                e.profile.codec.value,
                e.profile.crf,
                e.profile.resolution.width,
                e.profile.resolution.height,
                f"{e.mean_ssim:.6f}",
                f"{e.bitrate_kbps:.3f}",
            ]
        )
    return out.getvalue()


def catalog_from_csv(text: str) -> SetupCatalog:
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != CATALOG_CSV_HEADER:
        raise CatalogError(
            f"catalog CSV must start with header {','.join(CATALOG_CSV_HEADER)!r}"
        )
    entries = []
    for row in rows[1:]:
        if len(row) != 7:
            raise CatalogError(f"bad catalog row: {row!r}")
        entries.append(
            SetupEntry(
                setup_number=int(row[0]),
                profile=EncodingProfile(
                    CodecFamily(row[1]), int(row[2]), Resolution(int(row[3]), int(row[4]))
                ),
                mean_ssim=float(row[5]),
                bitrate_kbps=float(row[6]),
            )
        )
    scope = frozenset(e.profile.codec for e in entries)
    return SetupCatalog(entries=tuple(entries), scope=scope)


def measurements_from_csv(text: str) -> list[Measurement]:
    """Read raw (unranked) measurements in the catalog CSV column layout.

    The setup column is ignored if present; a leading header row is required.
    Used by the ``rank`` entry point to (re)build a catalog from encoder runs.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise CatalogError("empty measurements document")
    header = [c.strip() for c in rows[0]]
    if header == CATALOG_CSV_HEADER:
        offset = 1
    elif header == CATALOG_CSV_HEADER[1:]:
        offset = 0
    else:
        raise CatalogError(
            "measurements CSV header must be "
            f"{','.join(CATALOG_CSV_HEADER)!r} (setup column optional)"
        )
    measurements = []
    for row in rows[1:]:
        if len(row) != 6 + offset:
            raise CatalogError(f"bad measurements row: {row!r}")
        r = row[offset:]
        measurements.append(
            Measurement(
                profile=EncodingProfile(
                    CodecFamily(r[0]), int(r[1]), Resolution(int(r[2]), int(r[3]))
                ),
                mean_ssim=float(r[4]),
                bitrate_kbps=float(r[5]),
            )
        )
    return measurements


def read_yuv420p(path: str | Path, width: int, height: int) -> list[Frame]:
    """Load a raw planar yuv420p file; dimensions are supplied out of band."""
    if width <= 0 or height <= 0:
        raise QualityError("dimensions must be positive")
    ch, cw = (height + 1) // 2, (width + 1) // 2
    frame_bytes = width * height + 2 * ch * cw
    data = Path(path).read_bytes()
    if not data or len(data) % frame_bytes != 0:
        raise QualityError(
            f"file size {len(data)} is not a multiple of the "
            f"{width}x{height} yuv420p frame size {frame_bytes}"
        )
    frames = []
    for off in range(0, len(data), frame_bytes):
        buf = np.frombuffer(data, dtype=np.uint8, count=frame_bytes, offset=off)
        y = buf[: width * height].reshape(height, width)
        u = buf[width * height : width * height + ch * cw].reshape(ch, cw)
        v = buf[width * height + ch * cw :].reshape(ch, cw)
        frames.append(Frame(y=y.copy(), u=u.copy(), v=v.copy()))
    return frames


def write_yuv420p(path: str | Path, frames: Sequence[Frame]) -> None:
    if not frames:
        raise QualityError("no frames to write")
    with open(path, "wb") as fh:
        for frame in frames:
            if frame.u is None or frame.v is None:
                raise QualityError("yuv420p output requires chroma planes")
            fh.write(frame.y.tobytes())
            fh.write(frame.u.tobytes())
            fh.write(frame.v.tobytes())
