"""Shared fixtures: the Fig-2-style timeline transcription, synthetic clips,
and the external transcoder (tests that need it are skipped when absent)."""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relcomp.errors import EncodingError
from relcomp.synthetic import synth_clip, write_y4m
from relcomp.timeline import PhaseLabel, PhaseSegment, PhaseTimeline

# Temporal relevance blocks of one exemplary teaching-purpose surgery,
# transcribed stacked-bar segment by segment: (percent of duration, teaching
# relevance). Idle separates every surgical phase. Labels below are carriers
# chosen per relevance class; the distribution depends only on these pairs.
EXAMPLE_SURGERY_BLOCKS: tuple[tuple[float, str], ...] = (
    (0.45, "N"), (0.39, "R"), (0.92, "N"), (1.12, "R"), (1.14, "N"),
    (0.71, "SR"), (1.54, "N"), (9.62, "R"), (1.00, "N"), (2.65, "HR"),
    (0.33, "N"), (1.06, "HR"), (3.03, "N"), (16.90, "HR"), (4.50, "N"),
    (19.3, "R"), (1.63, "N"), (2.05, "SR"), (0.76, "N"), (0.81, "SR"),
    (0.90, "N"), (2.60, "R"), (0.69, "N"), (1.64, "R"), (0.60, "N"),
    (12.38, "R"), (0.72, "N"), (4.55, "R"), (1.01, "N"), (1.01, "R"),
    (0.31, "N"), (0.90, "R"), (0.83, "N"), (1.09, "R"), (0.60, "N"),
)

_POOLS = {
    "R": (
        PhaseLabel.INCISION,
        PhaseLabel.IRRIGATION_ASPIRATION,
        PhaseLabel.IMPLANTATION,
        PhaseLabel.VISCOELASTIC_ASPIRATION,
        PhaseLabel.SEALING_OF_INCISIONS,
        PhaseLabel.ANTIBIOTIC_INJECTION,
    ),
    "SR": (
        PhaseLabel.VISCOELASTIC_I,
        PhaseLabel.CAPSULE_POLISHING,
        PhaseLabel.VISCOELASTIC_II,
    ),
    "HR": (
        PhaseLabel.CAPSULORHEXIS,
        PhaseLabel.HYDRODISSECTION,
        PhaseLabel.PHACO,
    ),
}


def example_surgery_timeline(fps: float = 60.0) -> PhaseTimeline:
    """Build the exemplary surgery as a timeline (1% of duration = 100 frames)."""
    counters = {code: 0 for code in _POOLS}
    segments = []
    cursor = 0
    for percent, code in EXAMPLE_SURGERY_BLOCKS:
        frames = round(percent * 100)
        if code == "N":
            label = PhaseLabel.IDLE
        else:
            pool = _POOLS[code]
            label = pool[counters[code] % len(pool)]
            counters[code] += 1
        segments.append(PhaseSegment(label, cursor, cursor + frames))
        cursor += frames
    return PhaseTimeline(fps, 1024, 768, tuple(segments))


@pytest.fixture(scope="session")
def fig2_timeline() -> PhaseTimeline:
    return example_surgery_timeline()


@pytest.fixture(scope="session")
def backend():
    """External transcoder, or skip the test when none is installed."""
    pytest.importorskip("relcomp.transcode")
    from relcomp.transcode import FfmpegBackend

    if shutil.which("ffmpeg") is None:
        pytest.skip("ffmpeg not installed (see scripts/fetch_ffmpeg.py)")
    try:
        return FfmpegBackend()
    except EncodingError as exc:
        pytest.skip(str(exc))


@pytest.fixture(scope="session")
def tiny_clip(tmp_path_factory) -> dict:
    """A 24-frame 160x120 test clip as y4m plus its raw frames."""
    root = tmp_path_factory.mktemp("tiny_clip")
    frames = synth_clip(160, 120, 24, seed=3)
    path = write_y4m(root / "tiny.y4m", frames, fps=12.0)
    return {"path": path, "frames": frames, "fps": 12.0, "count": 24}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(set(lines)):
            terminalreporter.write_line(f"{status:8s} {name}")
