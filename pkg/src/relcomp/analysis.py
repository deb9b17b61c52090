"""Storage-savings accounting, distribution statistics, and report output.

Savings are computed on bitrates rather than file sizes so they are
duration-invariant: a segment saving is 1 - compressed/original for one
relevance category, and the whole-surgery saving additionally credits the
removed idle fraction.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from .errors import ReportError
from .profiles import CodecFamily
from .study import ParticipantProfile
from .timeline import PhaseTimeline, Purpose, RelevanceLevel, RelevanceTable

# The recording setup these savings are measured against: H.264 at CRF 14-16,
# around 506 MiB per surgery.
BASELINE_CODEC = CodecFamily.H264
BASELINE_CRF_RANGE = (14, 16)
BASELINE_REFERENCE_MIB = 506


def segment_saving(original_kbps: float, compressed_kbps: float) -> float:
    """Bitrate saving fraction for one encoded segment or category."""
    if original_kbps <= 0:
        raise ReportError("original bitrate must be positive")
    if compressed_kbps < 0:
        raise ReportError("compressed bitrate must be non-negative")
    return 1.0 - compressed_kbps / original_kbps


def total_saving(
    idle_fraction: float,
    original_kbps: float,
    compressed_kbps: float,
) -> float:
    """Whole-surgery saving when the idle fraction is removed before encoding."""
    if not 0.0 <= idle_fraction < 1.0:
        raise ReportError(f"idle fraction {idle_fraction} outside [0, 1)")
    if original_kbps <= 0:
        raise ReportError("original bitrate must be positive")
    if compressed_kbps < 0:
        raise ReportError("compressed bitrate must be non-negative")
    return 1.0 - (1.0 - idle_fraction) * (compressed_kbps / original_kbps)


@dataclass(frozen=True)
class TimelineDistribution:
    """Duration fraction per relevance level for one purpose."""

    purpose: Purpose
    fractions: dict[RelevanceLevel, float]

    def fraction(self, *levels: RelevanceLevel) -> float:
        return sum(self.fractions[lvl] for lvl in levels)


def relevance_distribution(
    timeline: PhaseTimeline,
    table: RelevanceTable,
    purpose: Purpose,
) -> TimelineDistribution:
    """How the surgery's duration splits across relevance levels.

    Uses the single-purpose rating (not the max over purposes): the same
    timeline distributes differently for teaching than for research.
    """
    frames = {level: 0 for level in RelevanceLevel}
    for seg in timeline.segments:
        frames[table.level(seg.label, purpose)] += seg.frames
    total = timeline.total_frames
    return TimelineDistribution(
        purpose=purpose,
        fractions={level: frames[level] / total for level in RelevanceLevel},
    )


def timeline_plot_data(
    timeline: PhaseTimeline,
    table: RelevanceTable,
    purpose: Purpose,
) -> str:
    """Stacked-bar plot data: CSV ``segment,label,relevance,frames``."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["segment", "label", "relevance", "frames"])
    for i, seg in enumerate(timeline.segments):
        writer.writerow(
            [i, seg.label.value, table.level(seg.label, purpose).code, seg.frames]
        )
    return out.getvalue()


@dataclass(frozen=True)
class BoxplotStats:
    lower_whisker: float
    q1: float
    median: float
    q3: float
    upper_whisker: float

    def __post_init__(self) -> None:
        ordered = (self.lower_whisker, self.q1, self.median, self.q3, self.upper_whisker)
        if any(a > b for a, b in zip(ordered, ordered[1:])):
            raise ReportError(f"boxplot fields out of order: {ordered}")


def boxplot(values: list[float], whiskers: str = "minmax") -> BoxplotStats:
    """Five-number summary with linear-interpolation quartiles.

    ``whiskers`` is "minmax" (sample extremes) or "tukey" (furthest points
    within 1.5 IQR of the box).
    """
    if not values:
        raise ReportError("boxplot of an empty list")
    data = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(data, [25.0, 50.0, 75.0])
    if whiskers == "minmax":
        lower, upper = float(data.min()), float(data.max())
    elif whiskers == "tukey":
        reach = 1.5 * (q3 - q1)
        lower = float(data[data >= q1 - reach].min())
        upper = float(data[data <= q3 + reach].max())
    else:
        raise ReportError(f"unknown whisker mode {whiskers!r}")
    return BoxplotStats(lower, float(q1), float(med), float(q3), upper)


def experience_correlation(
    participants: list[ParticipantProfile],
    chosen_ssim: list[float],
    method: str = "pearson",
) -> float:
    """Correlation between surgical experience and the accepted SSIM level.

    Pearson by default; Spearman is available since panels are small. Raises
    on constant inputs, where the coefficient is undefined.
    """
    if len(participants) != len(chosen_ssim):
        raise ReportError("participants and ssim values must pair up")
    if len(participants) < 2:
        raise ReportError("correlation needs at least two participants")
    years = np.asarray([p.experience_years for p in participants], dtype=np.float64)
    ssim = np.asarray(chosen_ssim, dtype=np.float64)
    if np.ptp(years) == 0 or np.ptp(ssim) == 0:
        raise ReportError("correlation undefined for a constant series")
    if method == "pearson":
        return float(scipy_stats.pearsonr(years, ssim).statistic)
    if method == "spearman":
        return float(scipy_stats.spearmanr(years, ssim).statistic)
    raise ReportError(f"unknown correlation method {method!r}")


@dataclass(frozen=True)
class CategorySaving:
    """Savings of one relevance category under one codec."""

    relevance: RelevanceLevel
    codec: CodecFamily
    original_kbps: float
    compressed_kbps: float
    saving: float


@dataclass(frozen=True)
class SurgerySaving:
    """Whole-surgery savings for one codec after idle removal."""

    codec: CodecFamily
    idle_fraction: float
    total_saving: float


@dataclass(frozen=True)
class SavingsBaseline:
    codec: str = BASELINE_CODEC.value
    crf_range: tuple[int, int] = BASELINE_CRF_RANGE
    reference_size_mib: float = BASELINE_REFERENCE_MIB


@dataclass(frozen=True)
class SavingsReport:
    categories: tuple[CategorySaving, ...]
    surgeries: tuple[SurgerySaving, ...]
    baseline: SavingsBaseline = field(default_factory=SavingsBaseline)

    def __post_init__(self) -> None:
        for row in self.categories:
            if not 0.0 <= row.saving <= 1.0:
                raise ReportError(f"category saving {row.saving} outside [0, 1]")
        for row in self.surgeries:
            if not 0.0 <= row.total_saving <= 1.0:
                raise ReportError(f"total saving {row.total_saving} outside [0, 1]")


def category_saving(
    relevance: RelevanceLevel,
    codec: CodecFamily,
    original_kbps: float,
    compressed_kbps: float,
) -> CategorySaving:
    return CategorySaving(
        relevance=relevance,
        codec=codec,
        original_kbps=original_kbps,
        compressed_kbps=compressed_kbps,
        saving=segment_saving(original_kbps, compressed_kbps),
    )


def surgery_saving(
    codec: CodecFamily,
    idle_fraction: float,
    original_kbps: float,
    compressed_kbps: float,
) -> SurgerySaving:
    return SurgerySaving(
        codec=codec,
        idle_fraction=idle_fraction,
        total_saving=total_saving(idle_fraction, original_kbps, compressed_kbps),
    )


def emit_report(report: SavingsReport, format: str = "json") -> str:
    """Serialize a savings report; JSON round-trips, CSV prints percentages."""
    if format == "json":
        doc = {
            "baseline": {
                "codec": report.baseline.codec,
                "crf_range": list(report.baseline.crf_range),
                "reference_size_mib": report.baseline.reference_size_mib,
            },
            "categories": [
                {
                    "relevance": row.relevance.code,
                    "codec": row.codec.value,
                    "original_kbps": row.original_kbps,
                    "compressed_kbps": row.compressed_kbps,
                    "saving": row.saving,
                }
                for row in report.categories
            ],
            "surgeries": [
                {
                    "codec": row.codec.value,
                    "idle_fraction": row.idle_fraction,
                    "total_saving": row.total_saving,
                }
                for row in report.surgeries
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            ["relevance", "codec", "original_kbps", "compressed_kbps", "saving"]
        )
        for row in report.categories:
            writer.writerow(
                [
                    row.relevance.code,
                    row.codec.value,
                    f"{row.original_kbps:.2f}",
                    f"{row.compressed_kbps:.2f}",
                    f"{100.0 * row.saving:.2f}%",
                ]
            )
        writer.writerow([])
        writer.writerow(["codec", "idle_fraction", "total_saving"])
        for row in report.surgeries:
            writer.writerow(
                [
                    row.codec.value,
                    f"{100.0 * row.idle_fraction:.2f}%",
                    f"{100.0 * row.total_saving:.2f}%",
                ]
            )
        return out.getvalue()
    raise ReportError(f"unknown report format {format!r}")


def report_from_json(text: str) -> SavingsReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"invalid report JSON: {exc}") from None
    return SavingsReport(
        categories=tuple(
            CategorySaving(
                relevance=RelevanceLevel.from_code(row["relevance"]),
                codec=CodecFamily(row["codec"]),
                original_kbps=row["original_kbps"],
                compressed_kbps=row["compressed_kbps"],
                saving=row["saving"],
            )
            for row in doc["categories"]
        ),
        surgeries=tuple(
            SurgerySaving(
                codec=CodecFamily(row["codec"]),
                idle_fraction=row["idle_fraction"],
                total_saving=row["total_saving"],
            )
            for row in doc["surgeries"]
        ),
        baseline=SavingsBaseline(
            codec=doc["baseline"]["codec"],
            crf_range=tuple(doc["baseline"]["crf_range"]),
            reference_size_mib=doc["baseline"]["reference_size_mib"],
        ),
    )
