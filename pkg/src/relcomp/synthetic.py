"""Deterministic synthetic surgery clips for demos and desk-scale testing.

Real clinical recordings cannot ship with the code, so these generators
produce footage with comparable structure: a textured circular field that
drifts slowly, an instrument-like bright bar that moves during surgical
phases and disappears during idle gaps, and a stable border vignette.
Content is a pure function of (frame index, seed).
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .quality import Frame


def synth_frame(
    width: int,
    height: int,
    index: int,
    seed: int = 7,
    active: bool = True,
) -> Frame:
    """Render one frame; ``active`` adds the moving instrument."""
    rng = np.random.default_rng(seed)
    phase_x = rng.uniform(0, 2 * np.pi)
    phase_y = rng.uniform(0, 2 * np.pi)

    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cx, cy = width / 2.0, height / 2.0
    r = np.hypot(xx - cx, yy - cy) / (min(width, height) / 2.0)

    drift = index * 0.8
    texture = (
        40.0 * np.sin(xx / 17.0 + drift / 9.0 + phase_x)
        + 30.0 * np.cos(yy / 23.0 - drift / 13.0 + phase_y)
        + 25.0 * np.sin((xx + yy) / 31.0 + drift / 7.0)
    )
    luma = 120.0 + texture * np.clip(1.2 - r, 0.0, 1.0)
    luma *= np.clip(1.15 - 0.55 * r**2, 0.0, 1.0)

    if active:
        bar_x = cx + (width / 3.0) * np.sin(index / 11.0 + phase_x)
        bar_y = cy + (height / 3.5) * np.cos(index / 17.0 + phase_y)
        bar = np.exp(-(((xx - bar_x) / 9.0) ** 2) - (((yy - bar_y) / 60.0) ** 2))
        luma = luma + 110.0 * bar

    y = np.clip(luma, 0.0, 255.0).astype(np.uint8)

    ch, cw = (height + 1) // 2, (width + 1) // 2
    cyy, cxx = np.mgrid[0:ch, 0:cw].astype(np.float64)
    cr = np.hypot(cxx - cw / 2.0, cyy - ch / 2.0) / (min(cw, ch))
    u = np.clip(128.0 - 24.0 * np.clip(1.0 - cr, 0.0, 1.0), 0.0, 255.0).astype(np.uint8)
    v = np.clip(128.0 + 30.0 * np.clip(1.0 - cr, 0.0, 1.0), 0.0, 255.0).astype(np.uint8)
    return Frame(y=y, u=u, v=v)


def synth_clip(
    width: int,
    height: int,
    frames: int,
    seed: int = 7,
    idle_ranges: Sequence[tuple[int, int]] = (),
) -> list[Frame]:
    """A clip of ``frames`` frames; idle ranges render without the instrument."""

    def is_idle(i: int) -> bool:
        return any(a <= i < b for a, b in idle_ranges)

    return [
        synth_frame(width, height, i, seed=seed, active=not is_idle(i))
        for i in range(frames)
    ]


def write_y4m(path: str | Path, frames: Sequence[Frame], fps: float) -> Path:
    """Write frames as YUV4MPEG2 (yuv420p), readable by any ffmpeg build."""
    if not frames:
        raise ValueError("no frames to write")
    path = Path(path)
    w, h = frames[0].width, frames[0].height
    num = int(round(fps * 1000))
    with open(path, "wb") as fh:
        fh.write(f"YUV4MPEG2 W{w} H{h} F{num}:1000 Ip A1:1 C420mpeg2\n".encode())
        for frame in frames:
            if frame.u is None or frame.v is None:
                raise ValueError("y4m output requires chroma planes")
            fh.write(b"FRAME\n")
            fh.write(frame.y.tobytes())
            fh.write(frame.u.tobytes())
            fh.write(frame.v.tobytes())
    return path


SURGERY_ANNOTATIONS = """\
label,start_frame,end_frame
Incision,0,{p1_end}
Phaco,{p2_start},{p2_end}
SealingOfIncisions,{p3_start},{total}
"""


def synth_surgery(
    out_dir: str | Path,
    width: int = 1024,
    height: int = 768,
    fps: float = 30.0,
    duration_s: float = 10.0,
    seed: int = 7,
) -> tuple[Path, Path]:
    """A small three-phase surgery with two idle gaps plus its annotations.

    Returns (clip path, annotation CSV path). Phase boundaries scale with
    the requested duration: roughly 20% incision, idle, 40% phaco, idle,
    17% sealing, with idle close to the clinical ~24% share.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = int(round(fps * duration_s))
    p1_end = int(total * 0.20)
    p2_start = int(total * 0.33)
    p2_end = int(total * 0.73)
    p3_start = int(total * 0.83)
    idle_ranges = [(p1_end, p2_start), (p2_end, p3_start)]

    frames = synth_clip(width, height, total, seed=seed, idle_ranges=idle_ranges)
    clip_path = write_y4m(out_dir / "surgery.y4m", frames, fps)
    csv_path = out_dir / "surgery_annotations.csv"
    csv_path.write_text(
        SURGERY_ANNOTATIONS.format(
            p1_end=p1_end,
            p2_start=p2_start,
            p2_end=p2_end,
            p3_start=p3_start,
            total=total,
        ),
        encoding="utf-8",
    )
    return clip_path, csv_path
