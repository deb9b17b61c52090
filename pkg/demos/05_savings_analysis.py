#!/usr/bin/env python3
"""Storage-savings accounting and the temporal relevance distribution.

Savings are bitrate ratios, so they hold for any clip duration: a segment
saving is 1 - compressed/original, and removing the idle share of the
surgery compounds on top. The distribution report shows how much of a
recording is actually relevant for a given purpose.
"""

from relcomp.analysis import (
    emit_report,
    relevance_distribution,
    segment_saving,
    surgery_saving,
    category_saving,
    SavingsReport,
    timeline_plot_data,
    total_saving,
)
from relcomp.profiles import CodecFamily, default_optimal_table
from relcomp.timeline import (
    Purpose,
    RelevanceLevel,
    default_relevance_table,
    parse_annotations,
)

# per-category source bitrates of the clips the optima were measured on
ORIGINAL_KBPS = {
    RelevanceLevel.HIGHLY_RELEVANT: 12278.0,
    RelevanceLevel.RELEVANT: 12416.0,
    RelevanceLevel.SOMEWHAT_RELEVANT: 13074.0,
}
IDLE_SHARE = 0.2375  # corpus-level idle fraction

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
    table = default_optimal_table()
    print("per-category savings against the recording bitrate:")
    categories = []
    for level, original in ORIGINAL_KBPS.items():
        for codec in CodecFamily:
            choice = table.get(level, codec)
            categories.append(category_saving(level, codec, original, choice.bitrate_kbps))
            print(f"  {level.code:3s} {codec.value:5s} {choice.bitrate_kbps:7.2f} kbps "
                  f"-> {100 * segment_saving(original, choice.bitrate_kbps):5.2f}%")

    print("\nwhole-surgery savings once idle phases are removed:")
    surgeries = []
    hr = RelevanceLevel.HIGHLY_RELEVANT
    for codec in CodecFamily:
        compressed = table.get(hr, codec).bitrate_kbps
        surgeries.append(
            surgery_saving(codec, IDLE_SHARE, ORIGINAL_KBPS[hr], compressed)
        )
        print(f"  {codec.value:5s}: "
              f"{100 * total_saving(IDLE_SHARE, ORIGINAL_KBPS[hr], compressed):5.2f}%")

    report = SavingsReport(categories=tuple(categories), surgeries=tuple(surgeries))
    print("\nreport.csv rendering:\n")
    print(emit_report(report, "csv"))

    timeline = parse_annotations(ANNOTATIONS, fps=60)
    relevance = default_relevance_table()
    dist = relevance_distribution(timeline, relevance, Purpose.TEACHING)
    print("teaching-purpose relevance distribution of the sample timeline:")
    for level, fraction in sorted(dist.fractions.items(), reverse=True):
        print(f"  {level.code:3s} {100 * fraction:5.2f}%")
    print("\nstacked-bar plot data (first rows):")
    print("\n".join(timeline_plot_data(timeline, relevance, Purpose.TEACHING)
                    .splitlines()[:6]))


if __name__ == "__main__":
    main()
