"""Relevance-based compression of phase-annotated surgical video.

The library splits into small, mostly pure layers:

- ``timeline``: phase annotations, relevance mapping, segment planning
- ``profiles``: CRF/resolution setup grids and the optimal-profile table
- ``quality``: SSIM, plane rescaling, and SSIM-ranked setup catalogs
- ``transcode``: external-encoder orchestration and archive assembly
- ``study``: the dichotomous-search rating protocol and threshold math
- ``analysis``: savings accounting, distributions, correlations, reports
- ``api_service`` / ``cli``: the HTTP rating service and the command line
"""

from .errors import (
    AnnotationError,
    CatalogError,
    EncodingError,
    PlanningError,
    ProfileError,
    QualityError,
    RelcompError,
    ReportError,
    SessionError,
)
from .timeline import (
    EncodePlan,
    IdlePolicy,
    PhaseLabel,
    PhaseSegment,
    PhaseTimeline,
    PlannedSegment,
    Purpose,
    RelevanceLevel,
    RelevanceTable,
    default_relevance_table,
    effective_relevance,
    idle_fraction,
    parse_annotations,
    plan_segments,
    serialize_annotations,
)
from .profiles import (
    CATALOG_RESOLUTIONS,
    CRF_LADDERS,
    CodecFamily,
    EncodingProfile,
    OptimalProfileTable,
    Resolution,
    SetupCatalog,
    SetupEntry,
    default_optimal_table,
    profile_for,
    setup_grid,
)
from .quality import (
    Frame,
    Measurement,
    SsimResult,
    build_catalog,
    catalog_from_csv,
    catalog_to_csv,
    rescale,
    ssim_clip,
    ssim_frame,
)
from .study import (
    NONE_ACCEPTABLE,
    CategoryThreshold,
    ParticipantProfile,
    RatingSession,
    record_verdict,
    select_optimal,
    start_session,
    threshold_from_ratings,
)
from .analysis import (
    BoxplotStats,
    SavingsReport,
    TimelineDistribution,
    boxplot,
    emit_report,
    experience_correlation,
    relevance_distribution,
    segment_saving,
    total_saving,
)

__version__ = "0.1.0"
