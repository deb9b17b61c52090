"""Phase timelines, relevance mapping, and encode-segment planning.

A surgery recording is described by a frame-accurate annotation of the 12
standard cataract phases; everything between annotated phases is idle time
(instrument changes). Each phase carries a clinical relevance level per
purpose (teaching / documentation / research); the effective level used for
compression is the maximum over purposes. Planning turns a timeline plus an
idle policy into the list of segments that actually get encoded.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

from .errors import AnnotationError, PlanningError


class PhaseLabel(enum.Enum):
    """The 12 standard surgical phases plus the synthetic Idle label."""

    INCISION = "Incision"
    VISCOELASTIC_I = "ViscoelasticI"
    CAPSULORHEXIS = "Capsulorhexis"
    HYDRODISSECTION = "Hydrodissection"
    PHACO = "Phaco"
    IRRIGATION_ASPIRATION = "IrrigationAspiration"
    CAPSULE_POLISHING = "CapsulePolishing"
    VISCOELASTIC_II = "ViscoelasticII"
    IMPLANTATION = "Implantation"
    VISCOELASTIC_ASPIRATION = "ViscoelasticAspiration"
    SEALING_OF_INCISIONS = "SealingOfIncisions"
    ANTIBIOTIC_INJECTION = "AntibioticInjection"
    IDLE = "Idle"

    @property
    def is_idle(self) -> bool:
        return self is PhaseLabel.IDLE


SURGICAL_PHASES: tuple[PhaseLabel, ...] = tuple(
    p for p in PhaseLabel if not p.is_idle
)


class Purpose(enum.Enum):
    TEACHING = "teaching"
    DOCUMENTATION = "documentation"
    RESEARCH = "research"


class RelevanceLevel(enum.IntEnum):
    """Clinical relevance, totally ordered from irrelevant to highly relevant."""

    NOT_RELEVANT = 0
    SOMEWHAT_RELEVANT = 1
    RELEVANT = 2
    HIGHLY_RELEVANT = 3

    @property
    def code(self) -> str:
        return _LEVEL_CODES[self]

    @classmethod
    def from_code(cls, code: str) -> "RelevanceLevel":
        try:
            return _CODE_LEVELS[code]
        except KeyError:
            raise AnnotationError(f"unknown relevance code {code!r}") from None


_LEVEL_CODES = {
    RelevanceLevel.NOT_RELEVANT: "N",
    RelevanceLevel.SOMEWHAT_RELEVANT: "SR",
    RelevanceLevel.RELEVANT: "R",
    RelevanceLevel.HIGHLY_RELEVANT: "HR",
}
_CODE_LEVELS = {v: k for k, v in _LEVEL_CODES.items()}

_N = RelevanceLevel.NOT_RELEVANT
_SR = RelevanceLevel.SOMEWHAT_RELEVANT
_R = RelevanceLevel.RELEVANT
_HR = RelevanceLevel.HIGHLY_RELEVANT

# Clinician-surveyed relevance per phase and purpose (teaching, documentation,
# research). These are the shipped defaults; deployments can override the
# surgical rows via a CSV file, Idle is pinned to NOT_RELEVANT.
_DEFAULT_RATINGS: dict[PhaseLabel, tuple[RelevanceLevel, RelevanceLevel, RelevanceLevel]] = {
    PhaseLabel.INCISION: (_R, _SR, _SR),
    PhaseLabel.VISCOELASTIC_I: (_SR, _SR, _SR),
    PhaseLabel.CAPSULORHEXIS: (_HR, _R, _R),
    PhaseLabel.HYDRODISSECTION: (_HR, _SR, _SR),
    PhaseLabel.PHACO: (_HR, _R, _R),
    PhaseLabel.IRRIGATION_ASPIRATION: (_R, _SR, _SR),
    PhaseLabel.CAPSULE_POLISHING: (_SR, _SR, _SR),
    PhaseLabel.VISCOELASTIC_II: (_SR, _SR, _SR),
    PhaseLabel.IMPLANTATION: (_R, _R, _R),
    PhaseLabel.VISCOELASTIC_ASPIRATION: (_R, _SR, _SR),
    PhaseLabel.SEALING_OF_INCISIONS: (_R, _SR, _SR),
    PhaseLabel.ANTIBIOTIC_INJECTION: (_R, _R, _R),
}

_PURPOSE_ORDER = (Purpose.TEACHING, Purpose.DOCUMENTATION, Purpose.RESEARCH)


@dataclass(frozen=True)
class RelevanceTable:
    """Per-phase, per-purpose relevance ratings for the 12 surgical phases.

    Idle is not stored: it is NOT_RELEVANT for every purpose and cannot be
    overridden.
    """

    ratings: dict[tuple[PhaseLabel, Purpose], RelevanceLevel]

    def __post_init__(self) -> None:
        expected = {(p, u) for p in SURGICAL_PHASES for u in Purpose}
        if set(self.ratings) != expected:
            missing = expected - set(self.ratings)
            extra = set(self.ratings) - expected
            raise AnnotationError(
                f"relevance table must cover exactly the 12 surgical phases x 3 "
                f"purposes (missing {len(missing)}, unexpected {len(extra)})"
            )

    def level(self, phase: PhaseLabel, purpose: Purpose) -> RelevanceLevel:
        """Relevance of one phase for one purpose; Idle is always NOT_RELEVANT."""
        if phase.is_idle:
            return RelevanceLevel.NOT_RELEVANT
        return self.ratings[(phase, purpose)]

    def with_overrides(self, text: str) -> "RelevanceTable":
        """Return a copy updated from an override CSV.

        Format: header ``label,teaching,documentation,research``, one row per
        surgical phase to override, level codes in {N, SR, R, HR}. Idle rows
        are rejected: idle content is irrelevant by definition.
        """
        reader = csv.reader(io.StringIO(text))
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
        if not rows:
            raise AnnotationError("empty relevance override document")
        header = [cell.strip() for cell in rows[0]]
        if header != ["label", "teaching", "documentation", "research"]:
            raise AnnotationError(
                "override header must be 'label,teaching,documentation,research'"
            )
        updated = dict(self.ratings)
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise AnnotationError(f"line {lineno}: expected 4 fields, got {len(row)}")
            label = _parse_label(row[0].strip(), lineno)
            if label.is_idle:
                raise AnnotationError(
                    f"line {lineno}: Idle relevance is fixed and cannot be overridden"
                )
            for purpose, cell in zip(_PURPOSE_ORDER, row[1:]):
                updated[(label, purpose)] = RelevanceLevel.from_code(cell.strip())
        return RelevanceTable(updated)


def default_relevance_table() -> RelevanceTable:
    """The shipped relevance ratings (median expert ratings per phase)."""
    return RelevanceTable(
        {
            (phase, purpose): levels[i]
            for phase, levels in _DEFAULT_RATINGS.items()
            for i, purpose in enumerate(_PURPOSE_ORDER)
        }
    )


def effective_relevance(phase: PhaseLabel, table: RelevanceTable) -> RelevanceLevel:
    """Highest relevance over the three purposes; Idle maps to NOT_RELEVANT."""
    if phase.is_idle:
        return RelevanceLevel.NOT_RELEVANT
    return max(table.level(phase, purpose) for purpose in Purpose)


@dataclass(frozen=True)
class PhaseSegment:
    """A contiguous frame range labeled with one phase.

    ``start_frame`` is inclusive, ``end_frame`` exclusive.
    """

    label: PhaseLabel
    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if self.start_frame < 0:
            raise AnnotationError(f"negative start frame {self.start_frame}")
        if self.start_frame >= self.end_frame:
            raise AnnotationError(
                f"out-of-order range: [{self.start_frame}, {self.end_frame}) "
                f"for {self.label.value}"
            )

    @property
    def frames(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class PhaseTimeline:
    """Gap-free sequence of phase segments covering frames [0, total_frames)."""

    fps: float
    frame_width: int
    frame_height: int
    segments: tuple[PhaseSegment, ...]

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise AnnotationError(f"fps must be positive, got {self.fps}")
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise AnnotationError("frame dimensions must be positive")
        if not self.segments:
            raise AnnotationError("timeline has no segments")
        if self.segments[0].start_frame != 0:
            raise AnnotationError("timeline must start at frame 0")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if cur.start_frame != prev.end_frame:
                raise AnnotationError(
                    f"segments not contiguous at frame {prev.end_frame}"
                )
            if cur.label is prev.label:
                raise AnnotationError(
                    f"adjacent segments share label {cur.label.value}"
                )

    @property
    def total_frames(self) -> int:
        return self.segments[-1].end_frame

    @property
    def duration_s(self) -> float:
        return self.total_frames / self.fps


def parse_annotations(
    text: str,
    fps: float = 60.0,
    frame_width: int = 1024,
    frame_height: int = 768,
) -> PhaseTimeline:
    """Parse an annotation CSV into a timeline, materializing gaps as Idle.

    The document format is one header line ``label,start_frame,end_frame``
    followed by one row per surgical phase, in ascending frame order. Rows
    may touch but not overlap; touching rows with the same label merge into
    one segment. Idle is never annotated explicitly, it is inferred from the
    gaps between rows.

    fps and frame dimensions are not part of the document and must be
    supplied by the caller (defaults match the recording setup this scheme
    was designed around: 60 fps at 1024x768).
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise AnnotationError("empty annotation document")
    header = [cell.strip() for cell in rows[0]]
    if header != ["label", "start_frame", "end_frame"]:
        raise AnnotationError("annotation header must be 'label,start_frame,end_frame'")
    if len(rows) == 1:
        raise AnnotationError("annotation document has no phase rows")

    segments: list[PhaseSegment] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise AnnotationError(f"line {lineno}: expected 3 fields, got {len(row)}")
        label = _parse_label(row[0].strip(), lineno)
        if label.is_idle:
            raise AnnotationError(
                f"line {lineno}: Idle must not be annotated, it is inferred from gaps"
            )
        try:
            start = int(row[1])
            end = int(row[2])
        except ValueError:
            raise AnnotationError(
                f"line {lineno}: frame indices must be integers, got "
                f"{row[1]!r}, {row[2]!r}"
            ) from None
        if start < 0:
            raise AnnotationError(f"line {lineno}: negative start frame {start}")
        if start >= end:
            raise AnnotationError(f"line {lineno}: out-of-order range [{start}, {end})")
        if segments:
            prev = segments[-1]
            if start < prev.end_frame:
                raise AnnotationError(
                    f"line {lineno}: range [{start}, {end}) overlaps or is out of "
                    f"order with previous end {prev.end_frame}"
                )
            if start > prev.end_frame:
                segments.append(PhaseSegment(PhaseLabel.IDLE, prev.end_frame, start))
            elif label is prev.label:
                segments[-1] = PhaseSegment(label, prev.start_frame, end)
                continue
        elif start > 0:
            segments.append(PhaseSegment(PhaseLabel.IDLE, 0, start))
        segments.append(PhaseSegment(label, start, end))

    return PhaseTimeline(fps, frame_width, frame_height, tuple(segments))


def serialize_annotations(timeline: PhaseTimeline) -> str:
    """Inverse of parse_annotations: surgical rows only, Idle left implicit.

    A trailing Idle segment cannot be represented and is dropped; on
    canonical-form documents (which end with a surgical phase) parse and
    serialize round-trip exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["label", "start_frame", "end_frame"])
    for seg in timeline.segments:
        if not seg.label.is_idle:
            writer.writerow([seg.label.value, seg.start_frame, seg.end_frame])
    return out.getvalue()


def _parse_label(raw: str, lineno: int) -> PhaseLabel:
    try:
        return PhaseLabel(raw)
    except ValueError:
        raise AnnotationError(f"line {lineno}: unknown label {raw!r}") from None


class IdlePolicy(enum.Enum):
    """How planning treats idle (and otherwise irrelevant) segments."""

    DROP = "drop"
    MERGE_PRECEDING = "merge-preceding"
    MERGE_SUBSEQUENT = "merge-subsequent"


@dataclass(frozen=True)
class PlannedSegment:
    """One encoder job: a frame range, its relevance, and its source phases."""

    start_frame: int
    end_frame: int
    level: RelevanceLevel
    source_labels: tuple[PhaseLabel, ...]

    @property
    def frames(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class EncodePlan:
    """Orderly list of segments to encode plus accounting of dropped frames."""

    segments: tuple[PlannedSegment, ...]
    idle_policy: IdlePolicy
    total_frames: int
    dropped_frames: int = field(default=0)

    @property
    def planned_frames(self) -> int:
        return sum(seg.frames for seg in self.segments)


def plan_segments(
    timeline: PhaseTimeline,
    table: RelevanceTable,
    policy: IdlePolicy = IdlePolicy.DROP,
) -> EncodePlan:
    """Turn a timeline into encoder jobs under the given idle policy.

    DROP removes every NOT_RELEVANT segment (idle, or a surgical phase an
    override table demoted to NOT_RELEVANT) and counts its frames as dropped.
    MERGE_PRECEDING absorbs each such segment into the surviving segment
    before it (a leading run falls forward onto the subsequent one);
    MERGE_SUBSEQUENT is the mirror image. Adjacent planned segments that end
    up with equal relevance are coalesced into a single encoder job.
    """
    levels = [effective_relevance(seg.label, table) for seg in timeline.segments]
    keep = [
        (seg, lvl)
        for seg, lvl in zip(timeline.segments, levels)
        if lvl is not RelevanceLevel.NOT_RELEVANT
    ]
    if not keep:
        raise PlanningError("no relevant content in timeline")

    planned: list[PlannedSegment] = []
    if policy is IdlePolicy.DROP:
        for seg, lvl in keep:
            planned.append(
                PlannedSegment(seg.start_frame, seg.end_frame, lvl, (seg.label,))
            )
    else:
        # Assign every irrelevant run to a neighboring kept segment. Walk the
        # kept segments and let each one swallow the gap on its merge side;
        # boundary runs that have no neighbor on that side fall the other way.
        merge_back = policy is IdlePolicy.MERGE_PRECEDING
        total = timeline.total_frames
        starts: list[int] = []
        ends: list[int] = []
        for i, (seg, _) in enumerate(keep):
            prev_end = keep[i - 1][0].end_frame if i > 0 else 0
            next_start = keep[i + 1][0].start_frame if i + 1 < len(keep) else total
            if merge_back:
                # Swallow the following gap; the first segment also takes the
                # leading gap (no preceding segment exists for it).
                starts.append(seg.start_frame if i > 0 else 0)
                ends.append(next_start)
            else:
                # Swallow the preceding gap; the last segment also takes the
                # trailing gap.
                starts.append(prev_end)
                ends.append(seg.end_frame if i + 1 < len(keep) else total)
        for (seg, lvl), start, end in zip(keep, starts, ends):
            labels: list[PhaseLabel] = []
            for src in timeline.segments:
                if src.end_frame > start and src.start_frame < end:
                    labels.append(src.label)
            planned.append(PlannedSegment(start, end, lvl, tuple(labels)))

    coalesced: list[PlannedSegment] = []
    for seg in planned:
        if (
            coalesced
            and coalesced[-1].end_frame == seg.start_frame
            and coalesced[-1].level is seg.level
        ):
            prev = coalesced[-1]
            coalesced[-1] = PlannedSegment(
                prev.start_frame,
                seg.end_frame,
                prev.level,
                prev.source_labels + seg.source_labels,
            )
        else:
            coalesced.append(seg)

    planned_frames = sum(seg.frames for seg in coalesced)
    return EncodePlan(
        segments=tuple(coalesced),
        idle_policy=policy,
        total_frames=timeline.total_frames,
        dropped_frames=timeline.total_frames - planned_frames,
    )


def idle_fraction(timeline: PhaseTimeline) -> float:
    """Fraction of total frames spent in idle segments."""
    idle = sum(seg.frames for seg in timeline.segments if seg.label.is_idle)
    return idle / timeline.total_frames


def pad_to_frames(timeline: PhaseTimeline, total_frames: int) -> PhaseTimeline:
    """Extend a timeline with trailing Idle up to the source frame count.

    Annotation documents end at the last surgical phase; the recording often
    runs a little longer. Raises if the annotations overrun the source.
    """
    current = timeline.total_frames
    if total_frames < current:
        raise AnnotationError(
            f"annotations cover {current} frames but the source has only "
            f"{total_frames}"
        )
    if total_frames == current:
        return timeline
    last = timeline.segments[-1]
    if last.label.is_idle:
        segments = timeline.segments[:-1] + (
            PhaseSegment(PhaseLabel.IDLE, last.start_frame, total_frames),
        )
    else:
        segments = timeline.segments + (
            PhaseSegment(PhaseLabel.IDLE, current, total_frames),
        )
    return PhaseTimeline(
        timeline.fps, timeline.frame_width, timeline.frame_height, segments
    )
