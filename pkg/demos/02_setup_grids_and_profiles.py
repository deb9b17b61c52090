#!/usr/bin/env python3
"""Show the evaluation grids and the shipped optimal compression profiles.

Every codec is evaluated on 13 CRF points crossed with three resolutions
(39 setups per codec, 78 for the joint H.264+AV1 study). The optimal-profile
table is the end product of the expert study: per relevance level and codec,
the cheapest setup whose quality the panel still accepted.
"""

from relcomp.profiles import (
    CodecFamily,
    CRF_LADDERS,
    default_optimal_table,
    setup_grid,
)
from relcomp.timeline import RelevanceLevel


def main() -> None:
    for codec in CodecFamily:
        ladder = CRF_LADDERS[codec]
        grid = setup_grid(codec)
        print(f"{codec.value}: CRF {ladder[0]}..{ladder[-1]} "
              f"({len(ladder)} points) x 3 resolutions = {len(grid)} setups")
    joint = len(setup_grid(CodecFamily.H264)) + len(setup_grid(CodecFamily.AV1))
    print(f"joint H.264+AV1 study size: {joint} setups\n")

    table = default_optimal_table()
    print("shipped optimal profiles (relevance x codec):")
    print(f"{'rel':4s} {'codec':6s} {'resolution':10s} {'crf':>3s} "
          f"{'ssim':>7s} {'kbps':>8s} {'saving':>7s}")
    for level in (
        RelevanceLevel.HIGHLY_RELEVANT,
        RelevanceLevel.RELEVANT,
        RelevanceLevel.SOMEWHAT_RELEVANT,
    ):
        for codec in CodecFamily:
            c = table.get(level, codec)
            print(f"{level.code:4s} {codec.value:6s} {str(c.profile.resolution):10s} "
                  f"{c.profile.crf:3d} {c.ssim:7.4f} {c.bitrate_kbps:8.2f} "
                  f"{100 * c.saving:6.2f}%")

    print("\nthe table serializes to JSON for deployment overrides:")
    print(table.to_json()[:260] + "  ...")


if __name__ == "__main__":
    main()
