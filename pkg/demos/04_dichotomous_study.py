#!/usr/bin/env python3
"""Simulate the expert rating study end to end.

Eight simulated experts bisect a 78-setup catalog with binary verdicts; each
converges in at most 7 steps. The floored median of their results becomes
the category threshold, and the cheapest setup per codec at or above it is
the optimal profile. More experienced raters accept worse quality here, so
the experience correlation comes out negative.
"""

import numpy as np

from relcomp.analysis import boxplot, experience_correlation
from relcomp.profiles import (
    CATALOG_RESOLUTIONS,
    CRF_LADDERS,
    CodecFamily,
    EncodingProfile,
)
from relcomp.quality import Measurement, build_catalog
from relcomp.study import (
    ParticipantProfile,
    run_scripted_session,
    select_optimal,
    start_session,
    threshold_from_ratings,
)
from relcomp.timeline import RelevanceLevel


def make_joint_catalog():
    """78 synthetic measurements across H.264 and AV1."""
    rng = np.random.default_rng(99)
    measurements = []
    for codec in (CodecFamily.H264, CodecFamily.AV1):
        for crf in CRF_LADDERS[codec]:
            for res in CATALOG_RESOLUTIONS:
                quality = 0.99 - 0.0012 * crf - 0.02 * (1024 - res.width) / 1024
                measurements.append(
                    Measurement(
                        EncodingProfile(codec, crf, res),
                        quality + rng.normal(0, 0.002),
                        12000.0 * quality**14 + rng.uniform(0, 30),
                    )
                )
    return build_catalog(measurements)


def main() -> None:
    catalog = make_joint_catalog()
    print(f"catalog: {len(catalog)} setups, scope "
          f"{sorted(c.value for c in catalog.scope)}\n")

    # each simulated expert tolerates quality down to a personal boundary;
    # more experience = more tolerance = higher boundary setup
    panel = [
        ParticipantProfile("expert-1", 12), ParticipantProfile("expert-2", 10),
        ParticipantProfile("expert-3", 9), ParticipantProfile("expert-4", 3),
        ParticipantProfile("expert-5", 3), ParticipantProfile("expert-6", 2),
        ParticipantProfile("expert-7", 1), ParticipantProfile("expert-8", 0.5),
    ]
    results = []
    for participant in panel:
        boundary = int(20 + 3.2 * participant.experience_years)
        session = start_session(participant.id, RelevanceLevel.HIGHLY_RELEVANT, catalog)
        session = run_scripted_session(session, lambda setup: setup <= boundary)
        results.append(session.result)
        print(f"{participant.id}: {participant.experience_years:4.1f}y of practice, "
              f"result setup {session.result:2d} in {session.steps} verdicts")

    threshold = threshold_from_ratings(
        results, catalog, RelevanceLevel.HIGHLY_RELEVANT
    )
    print(f"\nHR threshold: setup {threshold.setup_number} "
          f"(SSIM {threshold.ssim:.4f})")

    chosen_ssim = [catalog.entry(r).mean_ssim for r in results]
    stats = boxplot(chosen_ssim)
    print(f"accepted-SSIM spread: whiskers [{stats.lower_whisker:.4f}, "
          f"{stats.upper_whisker:.4f}], median {stats.median:.4f}")
    corr = experience_correlation(panel, chosen_ssim)
    print(f"experience vs accepted SSIM correlation: {100 * corr:.2f}%\n")

    print("optimal profile per codec (cheapest at or above the threshold):")
    for codec, entry in sorted(select_optimal(catalog, threshold).items(),
                               key=lambda kv: kv[0].value):
        p = entry.profile
        print(f"  {codec.value:5s} setup {entry.setup_number:2d}: {p.resolution} "
              f"crf {p.crf}, SSIM {entry.mean_ssim:.4f}, {entry.bitrate_kbps:.1f} kbps")


if __name__ == "__main__":
    main()
