"""Expert rating protocol: dichotomous search, thresholds, profile selection.

Setups are ranked 1..N from best to worst quality. Each expert bisects that
range with binary accept/reject verdicts until the worst still-acceptable
setup is pinned down, which takes at most ceil(log2(N+1)) verdicts (7 for
N=78, 6 for N=39). Per relevance category, the floored median of the
experts' result setups becomes the SSIM threshold; the cheapest setup of
each codec at or above the threshold is the optimal profile.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import SessionError
from .profiles import CodecFamily, SetupCatalog, SetupEntry
from .timeline import RelevanceLevel

log = logging.getLogger(__name__)

# Verdicts update the bisection interval in one of two directions. GOAL is
# the boundary search the method is for: an accepted setup becomes the new
# lower bound and the search pushes on toward worse quality. LITERAL moves
# the upper bound down on accept instead; it exists only to compare against
# a word-for-word reading of the protocol description and is not useful for
# finding the worst acceptable setup.
RULE_GOAL = "goal"
RULE_LITERAL = "literal"

# Result setup number meaning "rejected even the best setup".
NONE_ACCEPTABLE = 0


@dataclass(frozen=True)
class ParticipantProfile:
    """Study participant metadata used for the experience correlation."""

    id: str
    experience_years: float
    sector: str = "public"
    activities: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.experience_years < 0:
            raise SessionError("experience_years must be non-negative")


@dataclass(frozen=True)
class RatingSession:
    """Bisection state for one participant and one relevance category.

    ``lo`` is the highest setup known acceptable (0 = pristine sentinel),
    ``hi`` the lowest known unacceptable (N+1 sentinel). The session is done
    when the interval collapses to hi - lo = 1; the result is then ``lo``,
    with 0 meaning no setup was acceptable.
    """

    participant: str
    category: RelevanceLevel
    catalog_size: int
    lo: int
    hi: int
    current: int | None
    history: tuple[tuple[int, bool], ...] = ()
    version: int = 0
    catalog_id: str = ""
    update_rule: str = RULE_GOAL

    def __post_init__(self) -> None:
        if not 0 <= self.lo < self.hi <= self.catalog_size + 1:
            raise SessionError(
                f"invalid interval ({self.lo}, {self.hi}) for N={self.catalog_size}"
            )
        shown = [setup for setup, _ in self.history]
        if len(shown) != len(set(shown)):
            raise SessionError("a setup was shown twice in one session")

    @property
    def done(self) -> bool:
        return self.hi - self.lo == 1

    @property
    def result(self) -> int | None:
        """Worst acceptable setup, NONE_ACCEPTABLE (0), or None while open."""
        return self.lo if self.done else None

    @property
    def steps(self) -> int:
        return len(self.history)


def max_steps(catalog_size: int) -> int:
    """Worst-case verdict count for a catalog of the given size."""
    return math.ceil(math.log2(catalog_size + 1))


def start_session(
    participant: str,
    category: RelevanceLevel,
    catalog: SetupCatalog | int,
    catalog_id: str = "",
    update_rule: str = RULE_GOAL,
) -> RatingSession:
    """Open a session at the midpoint of the full setup range."""
    n = catalog if isinstance(catalog, int) else len(catalog)
    if n < 1:
        raise SessionError("catalog must contain at least one setup")
    if category not in (
        RelevanceLevel.HIGHLY_RELEVANT,
        RelevanceLevel.RELEVANT,
        RelevanceLevel.SOMEWHAT_RELEVANT,
    ):
        raise SessionError(f"sessions rate HR/R/SR content, not {category.code}")
    if update_rule not in (RULE_GOAL, RULE_LITERAL):
        raise SessionError(f"unknown update rule {update_rule!r}")
    lo, hi = 0, n + 1
    return RatingSession(
        participant=participant,
        category=category,
        catalog_size=n,
        lo=lo,
        hi=hi,
        current=(lo + hi) // 2,
        catalog_id=catalog_id,
        update_rule=update_rule,
    )


def record_verdict(session: RatingSession, acceptable: bool) -> RatingSession:
    """Apply one verdict on the current setup and bisect further.

    Under the goal rule an accept raises ``lo`` (quality was sufficient, try
    worse), a reject lowers ``hi``. Returns the updated session; raises once
    the session is done.
    """
    if session.done or session.current is None:
        raise SessionError("verdict on a finished session")
    if session.update_rule == RULE_LITERAL:
        moves_lo = not acceptable
    else:
        moves_lo = acceptable
    lo, hi = session.lo, session.hi
    if moves_lo:
        lo = session.current
    else:
        hi = session.current
    current = (lo + hi) // 2 if hi - lo > 1 else None
    return replace(
        session,
        lo=lo,
        hi=hi,
        current=current,
        history=session.history + ((session.current, acceptable),),
        version=session.version + 1,
    )


def run_scripted_session(
    session: RatingSession,
    rater,
) -> RatingSession:
    """Drive a session to completion with a callable ``rater(setup) -> bool``."""
    while not session.done:
        session = record_verdict(session, rater(session.current))
    return session


@dataclass(frozen=True)
class CategoryThreshold:
    """Per-category quality floor: the median result setup and its SSIM."""

    category: RelevanceLevel
    setup_number: int
    ssim: float


def threshold_from_ratings(
    results: list[int],
    catalog: SetupCatalog,
    category: RelevanceLevel,
) -> CategoryThreshold:
    """Derive the category threshold from per-participant result setups.

    The threshold setup is the median of the results, rounded down to an
    integer (an even-sized list uses the mean of the middle pair before
    flooring). NONE_ACCEPTABLE results carry no setup and are excluded;
    if every participant rejected everything there is no threshold.
    """
    if not results:
        raise SessionError("no rating results")
    accepted = [r for r in results if r != NONE_ACCEPTABLE]
    excluded = len(results) - len(accepted)
    if not accepted:
        raise SessionError("all participants found no setup acceptable")
    if excluded:
        log.warning(
            "%d of %d sessions found no acceptable setup; excluded from the median",
            excluded,
            len(results),
        )
    setup = math.floor(statistics.median(accepted))
    entry = catalog.entry(setup)
    return CategoryThreshold(category=category, setup_number=setup, ssim=entry.mean_ssim)


def select_optimal(
    catalog: SetupCatalog,
    threshold: CategoryThreshold,
) -> dict[CodecFamily, SetupEntry]:
    """Cheapest qualifying setup per codec family in the catalog's scope.

    Entries below the threshold SSIM are dropped; among the rest the lowest
    bitrate wins, ties going to higher SSIM and then lower setup number.
    A codec with no qualifying entry is omitted with a warning.
    """
    best: dict[CodecFamily, SetupEntry] = {}
    for entry in catalog.entries:
        if entry.mean_ssim < threshold.ssim:
            continue
        codec = entry.profile.codec
        cur = best.get(codec)
        if cur is None or (
            (entry.bitrate_kbps, -entry.mean_ssim, entry.setup_number)
            < (cur.bitrate_kbps, -cur.mean_ssim, cur.setup_number)
        ):
            best[codec] = entry
    for codec in sorted(catalog.scope, key=lambda c: c.value):
        if codec not in best:
            log.warning(
                "no %s setup reaches the %s threshold (SSIM %.4f); codec omitted",
                codec.value,
                threshold.category.code,
                threshold.ssim,
            )
    return best


# ---------------------------------------------------------------------------
# Session persistence and results export
# ---------------------------------------------------------------------------


def session_to_json(session: RatingSession) -> str:
    doc = {
        "participant": session.participant,
        "category": session.category.code,
        "catalog_id": session.catalog_id,
        "catalog_size": session.catalog_size,
        "lo": session.lo,
        "hi": session.hi,
        "current": session.current,
        "history": [[setup, verdict] for setup, verdict in session.history],
        "version": session.version,
        "update_rule": session.update_rule,
        "result": session.result,
    }
    return json.dumps(doc, indent=2) + "\n"


def session_from_json(text: str) -> RatingSession:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SessionError(f"invalid session JSON: {exc}") from None
    return RatingSession(
        participant=doc["participant"],
        category=RelevanceLevel.from_code(doc["category"]),
        catalog_size=int(doc["catalog_size"]),
        lo=int(doc["lo"]),
        hi=int(doc["hi"]),
        current=doc["current"],
        history=tuple((int(s), bool(v)) for s, v in doc["history"]),
        version=int(doc["version"]),
        catalog_id=doc.get("catalog_id", ""),
        update_rule=doc.get("update_rule", RULE_GOAL),
    )


class SessionStore:
    """One JSON document per session under a directory; written per verdict."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def save(self, session_id: str, session: RatingSession) -> None:
        tmp = self.path(session_id).with_suffix(".json.tmp")
        tmp.write_text(session_to_json(session), encoding="utf-8")
        tmp.replace(self.path(session_id))

    def load(self, session_id: str) -> RatingSession:
        path = self.path(session_id)
        if not path.exists():
            raise SessionError(f"unknown session {session_id!r}")
        return session_from_json(path.read_text(encoding="utf-8"))

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def find_open(self, participant: str, category: RelevanceLevel) -> str | None:
        for session_id in self.ids():
            s = self.load(session_id)
            if s.participant == participant and s.category is category and not s.done:
                return session_id
        return None


def results_to_csv(
    sessions: list[RatingSession],
    catalog_for: dict[str, SetupCatalog],
) -> str:
    """Export finished sessions as ``participant,category,result_setup,result_ssim``.

    NONE_ACCEPTABLE results are exported with an empty SSIM column.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["participant", "category", "result_setup", "result_ssim"])
    for s in sessions:
        if not s.done:
            continue
        result = s.result
        ssim = ""
        if result != NONE_ACCEPTABLE and s.catalog_id in catalog_for:
            ssim = f"{catalog_for[s.catalog_id].entry(result).mean_ssim:.6f}"
        writer.writerow([s.participant, s.category.code, result, ssim])
    return out.getvalue()
