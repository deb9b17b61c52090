#!/usr/bin/env python3
"""Walk through phase annotations, relevance mapping, and segment planning.

A surgery recording arrives as a CSV of frame-accurate phase annotations.
Everything between annotated phases is idle time (instrument changes). This
demo parses a small document, shows how each phase's relevance is derived,
and compares the three idle policies side by side.
"""

from relcomp.timeline import (
    IdlePolicy,
    PhaseLabel,
    default_relevance_table,
    effective_relevance,
    idle_fraction,
    parse_annotations,
    plan_segments,
)

ANNOTATIONS = """\
label,start_frame,end_frame
Incision,0,240
ViscoelasticI,400,640
Capsulorhexis,800,1900
Phaco,2100,5400
IrrigationAspiration,5600,8200
Implantation,8500,9100
SealingOfIncisions,9300,9700
"""


def main() -> None:
    timeline = parse_annotations(ANNOTATIONS, fps=60, frame_width=1024, frame_height=768)
    print(f"timeline: {len(timeline.segments)} segments, "
          f"{timeline.total_frames} frames ({timeline.duration_s:.1f} s)")
    print(f"idle share: {100 * idle_fraction(timeline):.2f}%\n")

    table = default_relevance_table()
    print("effective relevance (max over teaching/documentation/research):")
    for label in (
        PhaseLabel.INCISION,
        PhaseLabel.VISCOELASTIC_I,
        PhaseLabel.CAPSULORHEXIS,
        PhaseLabel.PHACO,
        PhaseLabel.IDLE,
    ):
        print(f"  {label.value:20s} -> {effective_relevance(label, table).code}")

    for policy in IdlePolicy:
        plan = plan_segments(timeline, table, policy)
        print(f"\npolicy {policy.value}: {len(plan.segments)} planned segments, "
              f"{plan.dropped_frames} frames dropped")
        for seg in plan.segments:
            labels = "+".join(l.value for l in seg.source_labels)
            print(f"  [{seg.start_frame:5d},{seg.end_frame:5d}) {seg.level.code:3s} {labels}")


if __name__ == "__main__":
    main()
