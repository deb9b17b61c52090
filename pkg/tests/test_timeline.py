"""Annotation parsing, relevance mapping, and segment planning."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from relcomp.errors import AnnotationError, PlanningError
from relcomp.timeline import (
    IdlePolicy,
    PhaseLabel,
    PhaseSegment,
    PhaseTimeline,
    Purpose,
    RelevanceLevel,
    SURGICAL_PHASES,
    default_relevance_table,
    effective_relevance,
    idle_fraction,
    pad_to_frames,
    parse_annotations,
    plan_segments,
    serialize_annotations,
)

HEADER = "label,start_frame,end_frame\n"


def timeline_of(*segs: tuple[PhaseLabel, int, int], fps: float = 60.0) -> PhaseTimeline:
    return PhaseTimeline(fps, 1024, 768, tuple(PhaseSegment(*s) for s in segs))


class TestParsing:
    def test_gap_materializes_idle(self):
        text = HEADER + "Incision,0,120\nCapsulorhexis,180,600\n"
        t = parse_annotations(text, fps=60)
        assert [(s.label, s.start_frame, s.end_frame) for s in t.segments] == [
            (PhaseLabel.INCISION, 0, 120),
            (PhaseLabel.IDLE, 120, 180),
            (PhaseLabel.CAPSULORHEXIS, 180, 600),
        ]
        assert t.total_frames == 600

    def test_single_row_no_idle(self):
        t = parse_annotations(HEADER + "Phaco,0,100\n")
        assert len(t.segments) == 1
        assert t.segments[0].label is PhaseLabel.PHACO

    def test_leading_gap_becomes_idle(self):
        t = parse_annotations(HEADER + "Phaco,50,100\n")
        assert t.segments[0].label is PhaseLabel.IDLE
        assert t.segments[0].frames == 50

    def test_out_of_order_range_rejected(self):
        with pytest.raises(AnnotationError, match="out-of-order"):
            parse_annotations(HEADER + "Capsulorhexis,100,50\n")

    def test_overlapping_rows_rejected(self):
        text = HEADER + "Incision,0,100\nPhaco,80,200\n"
        with pytest.raises(AnnotationError, match="overlap"):
            parse_annotations(text)

    def test_unknown_label_rejected(self):
        with pytest.raises(AnnotationError, match="unknown label"):
            parse_annotations(HEADER + "Lensectomy,0,100\n")

    def test_labels_are_case_sensitive(self):
        with pytest.raises(AnnotationError, match="unknown label"):
            parse_annotations(HEADER + "phaco,0,100\n")

    def test_explicit_idle_rejected(self):
        with pytest.raises(AnnotationError, match="Idle"):
            parse_annotations(HEADER + "Idle,0,100\n")

    def test_empty_document_rejected(self):
        with pytest.raises(AnnotationError, match="empty"):
            parse_annotations("")
        with pytest.raises(AnnotationError, match="no phase rows"):
            parse_annotations(HEADER)

    def test_malformed_row_rejected(self):
        with pytest.raises(AnnotationError, match="expected 3 fields"):
            parse_annotations(HEADER + "Phaco,0\n")
        with pytest.raises(AnnotationError, match="integers"):
            parse_annotations(HEADER + "Phaco,zero,100\n")

    def test_touching_rows_with_same_label_merge(self):
        text = HEADER + "Phaco,0,100\nPhaco,100,150\n"
        t = parse_annotations(text)
        assert len(t.segments) == 1
        assert t.segments[0].frames == 150

    def test_roundtrip_on_canonical_document(self):
        text = HEADER + "Incision,0,120\nCapsulorhexis,180,600\nPhaco,700,900\n"
        t = parse_annotations(text)
        assert serialize_annotations(t) == text
        assert parse_annotations(serialize_annotations(t)) == t

    def test_pad_to_frames_appends_idle(self):
        t = parse_annotations(HEADER + "Phaco,0,100\n")
        padded = pad_to_frames(t, 160)
        assert padded.total_frames == 160
        assert padded.segments[-1].label is PhaseLabel.IDLE
        with pytest.raises(AnnotationError):
            pad_to_frames(t, 50)
        assert pad_to_frames(t, 100) == t


class TestRelevance:
    table = default_relevance_table()

    @pytest.mark.parametrize(
        "phase,expected",
        [
            (PhaseLabel.CAPSULORHEXIS, RelevanceLevel.HIGHLY_RELEVANT),
            (PhaseLabel.VISCOELASTIC_I, RelevanceLevel.SOMEWHAT_RELEVANT),
            (PhaseLabel.INCISION, RelevanceLevel.RELEVANT),
            (PhaseLabel.IDLE, RelevanceLevel.NOT_RELEVANT),
            (PhaseLabel.HYDRODISSECTION, RelevanceLevel.HIGHLY_RELEVANT),
            (PhaseLabel.IMPLANTATION, RelevanceLevel.RELEVANT),
        ],
    )
    def test_effective_relevance_defaults(self, phase, expected):
        assert effective_relevance(phase, self.table) is expected

    def test_levels_are_ordered(self):
        assert (
            RelevanceLevel.NOT_RELEVANT
            < RelevanceLevel.SOMEWHAT_RELEVANT
            < RelevanceLevel.RELEVANT
            < RelevanceLevel.HIGHLY_RELEVANT
        )

    def test_override_raises_phase(self):
        text = "label,teaching,documentation,research\nViscoelasticI,HR,HR,HR\n"
        table = self.table.with_overrides(text)
        assert (
            effective_relevance(PhaseLabel.VISCOELASTIC_I, table)
            is RelevanceLevel.HIGHLY_RELEVANT
        )
        # untouched phases keep their defaults
        assert (
            effective_relevance(PhaseLabel.INCISION, table) is RelevanceLevel.RELEVANT
        )

    def test_idle_not_overridable(self):
        text = "label,teaching,documentation,research\nIdle,HR,HR,HR\n"
        with pytest.raises(AnnotationError, match="Idle"):
            self.table.with_overrides(text)

    def test_override_bad_code_rejected(self):
        text = "label,teaching,documentation,research\nPhaco,XX,R,R\n"
        with pytest.raises(AnnotationError, match="relevance code"):
            self.table.with_overrides(text)

    @given(
        phase=st.sampled_from(SURGICAL_PHASES),
        purpose=st.sampled_from(list(Purpose)),
        raised=st.sampled_from(list(RelevanceLevel)),
    )
    def test_effective_relevance_monotone_in_table(self, phase, purpose, raised):
        base = default_relevance_table()
        if raised < base.level(phase, purpose):
            return
        ratings = dict(base.ratings)
        ratings[(phase, purpose)] = raised
        bumped = type(base)(ratings)
        assert effective_relevance(phase, bumped) >= effective_relevance(phase, base)


class TestPlanning:
    table = default_relevance_table()

    def three_segment_timeline(self) -> PhaseTimeline:
        return timeline_of(
            (PhaseLabel.INCISION, 0, 100),
            (PhaseLabel.IDLE, 100, 160),
            (PhaseLabel.CAPSULORHEXIS, 160, 400),
        )

    def test_drop_excludes_idle(self):
        plan = plan_segments(self.three_segment_timeline(), self.table, IdlePolicy.DROP)
        assert [s.source_labels for s in plan.segments] == [
            (PhaseLabel.INCISION,),
            (PhaseLabel.CAPSULORHEXIS,),
        ]
        assert plan.dropped_frames == 60
        assert plan.planned_frames + plan.dropped_frames == 400

    def test_merge_preceding(self):
        plan = plan_segments(
            self.three_segment_timeline(), self.table, IdlePolicy.MERGE_PRECEDING
        )
        first = plan.segments[0]
        assert (first.start_frame, first.end_frame) == (0, 160)
        assert first.level is RelevanceLevel.RELEVANT
        assert first.source_labels == (PhaseLabel.INCISION, PhaseLabel.IDLE)
        assert plan.dropped_frames == 0

    def test_merge_subsequent(self):
        plan = plan_segments(
            self.three_segment_timeline(), self.table, IdlePolicy.MERGE_SUBSEQUENT
        )
        second = plan.segments[1]
        assert (second.start_frame, second.end_frame) == (100, 400)
        assert second.level is RelevanceLevel.HIGHLY_RELEVANT
        assert plan.dropped_frames == 0

    def test_leading_idle_merges_forward_under_merge_preceding(self):
        t = timeline_of((PhaseLabel.IDLE, 0, 50), (PhaseLabel.PHACO, 50, 150))
        plan = plan_segments(t, self.table, IdlePolicy.MERGE_PRECEDING)
        assert len(plan.segments) == 1
        assert (plan.segments[0].start_frame, plan.segments[0].end_frame) == (0, 150)

    def test_trailing_idle_merges_backward_under_merge_subsequent(self):
        t = timeline_of((PhaseLabel.PHACO, 0, 100), (PhaseLabel.IDLE, 100, 150))
        plan = plan_segments(t, self.table, IdlePolicy.MERGE_SUBSEQUENT)
        assert len(plan.segments) == 1
        assert (plan.segments[0].start_frame, plan.segments[0].end_frame) == (0, 150)

    def test_equal_relevance_neighbors_coalesce(self):
        t = timeline_of(
            (PhaseLabel.CAPSULORHEXIS, 0, 100),
            (PhaseLabel.PHACO, 100, 300),
            (PhaseLabel.IDLE, 300, 350),
        )
        plan = plan_segments(t, self.table, IdlePolicy.DROP)
        assert len(plan.segments) == 1
        assert plan.segments[0].level is RelevanceLevel.HIGHLY_RELEVANT
        assert plan.segments[0].source_labels == (
            PhaseLabel.CAPSULORHEXIS,
            PhaseLabel.PHACO,
        )

    def test_all_idle_timeline_rejected(self):
        t = timeline_of((PhaseLabel.IDLE, 0, 100))
        with pytest.raises(PlanningError, match="no relevant content"):
            plan_segments(t, self.table, IdlePolicy.DROP)

    def test_phase_demoted_to_not_relevant_is_dropped(self):
        overrides = "label,teaching,documentation,research\nViscoelasticI,N,N,N\n"
        table = self.table.with_overrides(overrides)
        t = timeline_of(
            (PhaseLabel.PHACO, 0, 100),
            (PhaseLabel.VISCOELASTIC_I, 100, 200),
        )
        plan = plan_segments(t, table, IdlePolicy.DROP)
        assert [s.source_labels for s in plan.segments] == [(PhaseLabel.PHACO,)]
        assert plan.dropped_frames == 100
        merged = plan_segments(t, table, IdlePolicy.MERGE_PRECEDING)
        assert merged.dropped_frames == 0
        assert merged.segments[0].end_frame == 200


def timelines() -> st.SearchStrategy[PhaseTimeline]:
    labels = st.sampled_from(list(PhaseLabel))
    pair = st.tuples(labels, st.integers(min_value=1, max_value=50))
    def build(pairs):
        segments = []
        cursor = 0
        for label, frames in pairs:
            if segments and segments[-1].label is label:
                prev = segments[-1]
                segments[-1] = PhaseSegment(label, prev.start_frame, prev.end_frame + frames)
            else:
                segments.append(PhaseSegment(label, cursor, cursor + frames))
            cursor += frames
        return PhaseTimeline(60.0, 1024, 768, tuple(segments))
    return st.lists(pair, min_size=1, max_size=12).map(build)


class TestProperties:
    @given(t=timelines(), policy=st.sampled_from(list(IdlePolicy)))
    def test_frame_conservation(self, t, policy):
        table = default_relevance_table()
        try:
            plan = plan_segments(t, table, policy)
        except PlanningError:
            assert all(s.label.is_idle for s in t.segments)
            return
        assert plan.planned_frames + plan.dropped_frames == t.total_frames
        if policy is not IdlePolicy.DROP:
            assert plan.dropped_frames == 0
        # ranges disjoint and ordered
        for a, b in zip(plan.segments, plan.segments[1:]):
            assert a.end_frame <= b.start_frame
        assert all(
            s.level is not RelevanceLevel.NOT_RELEVANT for s in plan.segments
        )

    @given(t=timelines())
    def test_drop_plan_never_contains_idle_sources(self, t):
        table = default_relevance_table()
        try:
            plan = plan_segments(t, table, IdlePolicy.DROP)
        except PlanningError:
            return
        for seg in plan.segments:
            assert PhaseLabel.IDLE not in seg.source_labels

    @given(t=timelines())
    def test_idle_fraction_bounds(self, t):
        f = idle_fraction(t)
        assert 0.0 <= f <= 1.0
        if not any(s.label.is_idle for s in t.segments):
            assert f == 0.0


def test_idle_fraction_example():
    # 57 idle of 240 total frames, the corpus-level share
    t = timeline_of(
        (PhaseLabel.PHACO, 0, 100),
        (PhaseLabel.IDLE, 100, 157),
        (PhaseLabel.INCISION, 157, 240),
    )
    assert idle_fraction(t) == pytest.approx(0.2375, abs=1e-12)
