#!/usr/bin/env python3
"""Compress a synthetic surgery end to end (requires ffmpeg).

Generates a small annotated recording, runs the full pipeline under the
drop policy, and prints the manifest and savings. The same flow is
available from the command line:

    relcomp compress surgery.y4m surgery_annotations.csv \\
        --codec h265 --idle-policy drop --out archive

Install ffmpeg with scripts/fetch_ffmpeg.py if it is not on PATH.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

from relcomp.pipeline import compress_video
from relcomp.profiles import CodecFamily
from relcomp.synthetic import synth_surgery
from relcomp.timeline import IdlePolicy


def main() -> int:
    if shutil.which("ffmpeg") is None:
        print("ffmpeg not found; run scripts/fetch_ffmpeg.py first", file=sys.stderr)
        return 1
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        print("generating a 4 s synthetic surgery at 320x240 ...")
        clip, annotations = synth_surgery(
            tmp, width=320, height=240, fps=15.0, duration_s=4.0
        )
        result = compress_video(
            source=clip,
            annotations=annotations.read_text(encoding="utf-8"),
            codec=CodecFamily.H265,
            policy=IdlePolicy.DROP,
            out_dir=tmp / "archive",
            baseline_crf=16,
        )
        manifest = result.manifest
        print(f"\nplanned {manifest['planned_frames']} of {manifest['total_frames']} "
              f"frames; dropped {manifest['dropped_frames']} idle frames")
        for seg in manifest["segments"]:
            print(f"  {seg['file']}: {'+'.join(seg['labels']):24s} "
                  f"{seg['relevance']:3s} {seg['profile']['codec']} "
                  f"crf {seg['profile']['crf']} -> {seg['kbps']:.1f} kbps")
        print(f"\nbaseline: {manifest['baseline_kbps']:.1f} kbps (H.264 CRF 16)")
        for row in result.report.surgeries:
            print(f"total saving: {100 * row.total_saving:.2f}%")
        print("\nmanifest.json:")
        print(json.dumps(manifest, indent=2)[:400] + " ...")
    return 0


if __name__ == "__main__":
    sys.exit(main())
