#!/usr/bin/env python3
"""SSIM scoring and ranking setups into a catalog.

SSIM runs on the luma plane with an 11x11 Gaussian window; encodes at
reduced resolution are upscaled back to the reference before comparison so
all setups land on one scale. Ranking mean SSIM descending yields the setup
numbers the rating study bisects over.
"""

import numpy as np

from relcomp.profiles import CodecFamily, EncodingProfile, Resolution
from relcomp.quality import (
    Frame,
    Measurement,
    build_catalog,
    catalog_to_csv,
    rescale,
    ssim_frame,
)
from relcomp.synthetic import synth_frame


def degrade(frame: Frame, strength: int, seed: int = 0) -> Frame:
    rng = np.random.default_rng(seed)
    noisy = frame.y.astype(int) + rng.integers(-strength, strength + 1, frame.y.shape)
    return Frame(y=np.clip(noisy, 0, 255).astype(np.uint8))


def main() -> None:
    ref = synth_frame(320, 240, index=4)
    print(f"identical frames:            SSIM = {ssim_frame(ref, ref):.6f}")
    for strength in (4, 16, 48):
        score = ssim_frame(ref, degrade(ref, strength))
        print(f"noise amplitude +-{strength:2d}:         SSIM = {score:.6f}")

    small = rescale(ref, Resolution(160, 120))
    back = rescale(small, Resolution(320, 240))
    print(f"downscale/upscale round trip: SSIM = {ssim_frame(ref, back):.6f}\n")

    # rank a small synthetic sweep: stronger degradation = lower SSIM = higher
    # setup number, exactly how encoder CRF sweeps are ranked
    measurements = []
    for i, crf in enumerate(range(23, 48, 2)):
        score = ssim_frame(ref, degrade(ref, 2 + 3 * i))
        measurements.append(
            Measurement(
                EncodingProfile(CodecFamily.H264, crf, Resolution(320, 240)),
                score,
                900.0 / (i + 1),
            )
        )
    catalog = build_catalog(measurements)
    print("ranked catalog (setup 1 = best quality):")
    print(catalog_to_csv(catalog))


if __name__ == "__main__":
    main()
