"""Encoding setup grids and the derived per-relevance optimal profiles.

A "setup" is one (codec, CRF, resolution) point. Each codec family is
evaluated on a fixed CRF ladder crossed with three output resolutions;
ranking the measured setups by mean SSIM yields the setup catalog the
rating study walks. The optimal-profile table holds, per relevance level
and codec, the cheapest setup whose quality the experts still accepted.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import CatalogError, ProfileError
from .timeline import RelevanceLevel


class CodecFamily(enum.Enum):
    H264 = "h264"
    H265 = "h265"
    AV1 = "av1"


@dataclass(frozen=True, order=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ProfileError(f"invalid resolution {self.width}x{self.height}")

    @property
    def area(self) -> int:
        return self.width * self.height

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"

    @classmethod
    def parse(cls, text: str) -> "Resolution":
        try:
            w, h = text.lower().split("x")
            return cls(int(w), int(h))
        except ValueError:
            raise ProfileError(f"cannot parse resolution {text!r}") from None


# Source material is 1024x768; the two smaller settings are the only
# downscales evaluated.
CATALOG_RESOLUTIONS: tuple[Resolution, ...] = (
    Resolution(1024, 768),
    Resolution(800, 600),
    Resolution(640, 480),
)

# CRF ladders per codec family: 13 points each. x264/x265 share 23..47
# step 2; AV1's scale is wider, 27..63 step 3.
CRF_LADDERS: dict[CodecFamily, tuple[int, ...]] = {
    CodecFamily.H264: tuple(range(23, 48, 2)),
    CodecFamily.H265: tuple(range(23, 48, 2)),
    CodecFamily.AV1: tuple(range(27, 64, 3)),
}


@dataclass(frozen=True)
class EncodingProfile:
    codec: CodecFamily
    crf: int
    resolution: Resolution

    def __post_init__(self) -> None:
        ladder = CRF_LADDERS[self.codec]
        if self.crf not in ladder:
            raise ProfileError(
                f"CRF {self.crf} not on the {self.codec.value} ladder "
                f"({ladder[0]}..{ladder[-1]})"
            )

    def sort_key(self) -> tuple:
        return (self.codec.value, self.crf, -self.resolution.area)


def setup_grid(codec: CodecFamily) -> list[EncodingProfile]:
    """Full evaluation grid for one codec: 13 CRFs x 3 resolutions = 39.

    Deterministic order: CRF ascending, then resolution by descending area,
    so generated catalogs are reproducible byte for byte.
    """
    return [
        EncodingProfile(codec, crf, res)
        for crf in CRF_LADDERS[codec]
        for res in CATALOG_RESOLUTIONS
    ]


@dataclass(frozen=True)
class SetupEntry:
    """One catalog row: rank, profile, and its measured quality and cost."""

    setup_number: int
    profile: EncodingProfile
    mean_ssim: float
    bitrate_kbps: float


@dataclass(frozen=True)
class SetupCatalog:
    """Setups ranked by mean SSIM descending; setup 1 is the best quality."""

    entries: tuple[SetupEntry, ...]
    scope: frozenset[CodecFamily]

    def __post_init__(self) -> None:
        if not self.entries:
            raise CatalogError("catalog has no entries")
        for i, entry in enumerate(self.entries, start=1):
            if entry.setup_number != i:
                raise CatalogError(
                    f"setup numbers must be dense from 1, got {entry.setup_number} "
                    f"at position {i}"
                )
        for a, b in zip(self.entries, self.entries[1:]):
            if a.mean_ssim < b.mean_ssim:
                raise CatalogError(
                    f"catalog not sorted by SSIM: setup {a.setup_number} "
                    f"({a.mean_ssim}) below setup {b.setup_number} ({b.mean_ssim})"
                )
        covered = {e.profile.codec for e in self.entries}
        if not covered <= self.scope:
            raise CatalogError("catalog contains codecs outside its declared scope")

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, setup_number: int) -> SetupEntry:
        if not 1 <= setup_number <= len(self.entries):
            raise CatalogError(
                f"setup {setup_number} outside catalog range 1..{len(self.entries)}"
            )
        return self.entries[setup_number - 1]


@dataclass(frozen=True)
class OptimalChoice:
    """The selected profile for one (relevance, codec) cell."""

    profile: EncodingProfile
    ssim: float
    bitrate_kbps: float
    saving: float
    setup_number: int | None = None


RATED_LEVELS: tuple[RelevanceLevel, ...] = (
    RelevanceLevel.HIGHLY_RELEVANT,
    RelevanceLevel.RELEVANT,
    RelevanceLevel.SOMEWHAT_RELEVANT,
)


@dataclass(frozen=True)
class OptimalProfileTable:
    """Map (relevance level, codec) -> optimal encoding choice."""

    choices: dict[tuple[RelevanceLevel, CodecFamily], OptimalChoice]

    def get(self, level: RelevanceLevel, codec: CodecFamily) -> OptimalChoice:
        if level is RelevanceLevel.NOT_RELEVANT:
            raise ProfileError("irrelevant content must be dropped or merged")
        try:
            return self.choices[(level, codec)]
        except KeyError:
            raise ProfileError(
                f"no optimal profile for ({level.code}, {codec.value})"
            ) from None

    def to_json(self) -> str:
        doc: dict[str, dict[str, dict]] = {}
        for (level, codec), choice in sorted(
            self.choices.items(), key=lambda kv: (-kv[0][0], kv[0][1].value)
        ):
            cell = {
                "resolution": str(choice.profile.resolution),
                "crf": choice.profile.crf,
                "ssim": choice.ssim,
                "bitrate_kbps": choice.bitrate_kbps,
                "saving": choice.saving,
            }
            if choice.setup_number is not None:
                cell["setup"] = choice.setup_number
            doc.setdefault(level.code, {})[codec.value] = cell
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OptimalProfileTable":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"invalid profile table JSON: {exc}") from None
        choices = {}
        for level_code, row in doc.items():
            level = RelevanceLevel.from_code(level_code)
            for codec_name, cell in row.items():
                codec = CodecFamily(codec_name)
                profile = EncodingProfile(
                    codec, int(cell["crf"]), Resolution.parse(cell["resolution"])
                )
                choices[(level, codec)] = OptimalChoice(
                    profile=profile,
                    ssim=float(cell["ssim"]),
                    bitrate_kbps=float(cell["bitrate_kbps"]),
                    saving=float(cell["saving"]),
                    setup_number=cell.get("setup"),
                )
        return cls(choices)


# Outcome of the expert study: per relevance level and codec, the cheapest
# setup that still met the category's SSIM threshold, with its measured mean
# SSIM, bitrate, and saving versus the category's source clip bitrate.
_HR = RelevanceLevel.HIGHLY_RELEVANT
_R = RelevanceLevel.RELEVANT
_SR = RelevanceLevel.SOMEWHAT_RELEVANT

_DEFAULT_OPTIMAL: tuple[tuple[RelevanceLevel, CodecFamily, int, str, int, float, float, float], ...] = (
    (_HR, CodecFamily.H264, 34, "640x480", 25, 0.9260, 653.39, 0.9468),
    (_R, CodecFamily.H264, 56, "640x480", 33, 0.9079, 252.11, 0.9797),
    (_SR, CodecFamily.H264, 52, "640x480", 31, 0.9162, 248.49, 0.9810),
    (_HR, CodecFamily.H265, 16, "640x480", 31, 0.9174, 207.12, 0.9831),
    (_R, CodecFamily.H265, 22, "640x480", 35, 0.9057, 130.10, 0.9895),
    (_SR, CodecFamily.H265, 16, "640x480", 31, 0.9202, 173.66, 0.9867),
    (_HR, CodecFamily.AV1, 36, "1024x768", 57, 0.9250, 190.38, 0.9845),
    (_R, CodecFamily.AV1, 57, "800x600", 63, 0.9078, 68.32, 0.9945),
    (_SR, CodecFamily.AV1, 51, "640x480", 60, 0.9179, 75.46, 0.9942),
)


def default_optimal_table() -> OptimalProfileTable:
    """The nine shipped optimal profiles from the expert study."""
    return OptimalProfileTable(
        {
            (level, codec): OptimalChoice(
                profile=EncodingProfile(codec, crf, Resolution.parse(res)),
                ssim=ssim,
                bitrate_kbps=kbps,
                saving=saving,
                setup_number=setup,
            )
            for level, codec, setup, res, crf, ssim, kbps, saving in _DEFAULT_OPTIMAL
        }
    )


def profile_for(
    plan_level: RelevanceLevel,
    codec: CodecFamily,
    table: OptimalProfileTable,
) -> EncodingProfile:
    """Profile to encode a planned segment of the given relevance with."""
    return table.get(plan_level, codec).profile
