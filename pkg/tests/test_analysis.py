"""Savings arithmetic, distributions, boxplots, correlation, and reports."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import EXAMPLE_SURGERY_BLOCKS

from relcomp.analysis import (
    BoxplotStats,
    CategorySaving,
    SavingsReport,
    SurgerySaving,
    boxplot,
    category_saving,
    emit_report,
    experience_correlation,
    relevance_distribution,
    report_from_json,
    segment_saving,
    surgery_saving,
    timeline_plot_data,
    total_saving,
)
from relcomp.errors import ReportError
from relcomp.profiles import CodecFamily
from relcomp.study import ParticipantProfile
from relcomp.timeline import (
    PhaseLabel,
    PhaseSegment,
    PhaseTimeline,
    Purpose,
    RelevanceLevel,
    default_relevance_table,
)


class TestSavings:
    def test_segment_saving_formula(self):
        assert segment_saving(12278, 653.39) == pytest.approx(1 - 653.39 / 12278)
        assert segment_saving(100, 100) == 0.0
        assert segment_saving(100, 0) == 1.0

    def test_segment_saving_rejects_zero_original(self):
        with pytest.raises(ReportError):
            segment_saving(0, 10)
        with pytest.raises(ReportError):
            segment_saving(100, -1)

    def test_total_saving_reduces_to_segment_saving_without_idle(self):
        assert total_saving(0.0, 12278, 653.39) == segment_saving(12278, 653.39)

    def test_total_saving_formula(self):
        assert total_saving(0.2375, 12278, 653.39) == pytest.approx(
            1 - (1 - 0.2375) * 653.39 / 12278
        )

    def test_total_saving_domain(self):
        with pytest.raises(ReportError):
            total_saving(1.0, 100, 10)
        with pytest.raises(ReportError):
            total_saving(-0.1, 100, 10)

    @given(
        f1=st.floats(0, 0.99),
        f2=st.floats(0, 0.99),
        c=st.floats(0, 1000),
        o=st.floats(1, 20000),
    )
    def test_total_saving_monotone_in_idle_fraction(self, f1, f2, c, o):
        lo, hi = sorted((f1, f2))
        assert total_saving(hi, o, c) >= total_saving(lo, o, c) - 1e-12

    @given(
        f=st.floats(0, 0.99),
        c1=st.floats(0, 1000),
        c2=st.floats(0, 1000),
        o=st.floats(1, 20000),
    )
    def test_total_saving_monotone_in_segment_saving(self, f, c1, c2, o):
        lo_c, hi_c = sorted((c1, c2))
        # lower compressed bitrate = higher segment saving = higher total
        assert total_saving(f, o, lo_c) >= total_saving(f, o, hi_c) - 1e-12


class TestDistribution:
    table = default_relevance_table()

    def test_single_capsulorhexis_is_all_hr_for_teaching(self):
        t = PhaseTimeline(
            60, 1024, 768, (PhaseSegment(PhaseLabel.CAPSULORHEXIS, 0, 100),)
        )
        d = relevance_distribution(t, self.table, Purpose.TEACHING)
        assert d.fractions[RelevanceLevel.HIGHLY_RELEVANT] == 1.0

    def test_all_idle_timeline(self):
        t = PhaseTimeline(60, 1024, 768, (PhaseSegment(PhaseLabel.IDLE, 0, 100),))
        d = relevance_distribution(t, self.table, Purpose.TEACHING)
        assert d.fractions[RelevanceLevel.NOT_RELEVANT] == 1.0

    def test_fractions_sum_to_one(self, fig2_timeline):
        d = relevance_distribution(fig2_timeline, self.table, Purpose.TEACHING)
        assert sum(d.fractions.values()) == pytest.approx(1.0, abs=1e-9)

    def test_purpose_changes_the_distribution(self, fig2_timeline):
        teaching = relevance_distribution(fig2_timeline, self.table, Purpose.TEACHING)
        research = relevance_distribution(fig2_timeline, self.table, Purpose.RESEARCH)
        assert (
            teaching.fractions[RelevanceLevel.HIGHLY_RELEVANT]
            > research.fractions[RelevanceLevel.HIGHLY_RELEVANT]
        )

    def test_matches_direct_block_arithmetic(self, fig2_timeline):
        d = relevance_distribution(fig2_timeline, self.table, Purpose.TEACHING)
        total = sum(round(p * 100) for p, _ in EXAMPLE_SURGERY_BLOCKS)
        for code, level in (
            ("N", RelevanceLevel.NOT_RELEVANT),
            ("SR", RelevanceLevel.SOMEWHAT_RELEVANT),
            ("R", RelevanceLevel.RELEVANT),
            ("HR", RelevanceLevel.HIGHLY_RELEVANT),
        ):
            expected = (
                sum(round(p * 100) for p, c in EXAMPLE_SURGERY_BLOCKS if c == code)
                / total
            )
            assert d.fractions[level] == pytest.approx(expected, abs=1e-12)

    def test_plot_data_lists_every_segment(self, fig2_timeline):
        text = timeline_plot_data(fig2_timeline, self.table, Purpose.TEACHING)
        lines = text.strip().splitlines()
        assert lines[0] == "segment,label,relevance,frames"
        assert len(lines) - 1 == len(fig2_timeline.segments)
        assert lines[1].endswith(",N,45")

    def test_drop_plan_fraction_complements_not_relevant_share(self, fig2_timeline):
        from relcomp.timeline import IdlePolicy, plan_segments

        plan = plan_segments(fig2_timeline, self.table, IdlePolicy.DROP)
        planned_fraction = plan.planned_frames / plan.total_frames
        d = relevance_distribution(fig2_timeline, self.table, Purpose.TEACHING)
        assert planned_fraction == pytest.approx(
            1.0 - d.fractions[RelevanceLevel.NOT_RELEVANT], abs=1e-12
        )


class TestBoxplot:
    def test_single_value(self):
        stats = boxplot([0.9])
        assert stats == BoxplotStats(0.9, 0.9, 0.9, 0.9, 0.9)

    def test_median_of_three(self):
        assert boxplot([0.93, 0.89, 0.91]).median == pytest.approx(0.91)

    def test_eight_values_median_matches_construction(self):
        # built so the middle pair averages to 0.9250
        values = [0.8935, 0.9080, 0.9124, 0.9240, 0.9260, 0.9319, 0.9330, 0.9350]
        stats = boxplot(values)
        assert stats.median == pytest.approx(0.9250)
        assert stats.lower_whisker == 0.8935
        assert stats.upper_whisker == 0.9350

    def test_quartiles_linear_interpolation(self):
        stats = boxplot([1.0, 2.0, 3.0, 4.0])
        assert stats.q1 == pytest.approx(1.75)
        assert stats.q3 == pytest.approx(3.25)

    def test_tukey_whiskers_clamp_outliers(self):
        values = [0.1, 0.90, 0.91, 0.92, 0.93, 2.0]
        minmax = boxplot(values)
        tukey = boxplot(values, whiskers="tukey")
        assert minmax.lower_whisker == 0.1
        assert tukey.lower_whisker == 0.90
        assert tukey.upper_whisker == 0.93

    def test_empty_rejected(self):
        with pytest.raises(ReportError):
            boxplot([])
        with pytest.raises(ReportError):
            boxplot([1.0], whiskers="houdini")


def participants(years: list[float]) -> list[ParticipantProfile]:
    return [ParticipantProfile(id=f"p{i}", experience_years=y) for i, y in enumerate(years)]


class TestCorrelation:
    def test_perfectly_decreasing_is_minus_one(self):
        years = [1.0, 2.0, 3.0, 4.0]
        ssim = [0.95, 0.94, 0.93, 0.92]
        assert experience_correlation(participants(years), ssim) == pytest.approx(-1.0)

    def test_constant_series_rejected(self):
        with pytest.raises(ReportError, match="constant"):
            experience_correlation(participants([5, 5, 5]), [0.9, 0.91, 0.92])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ReportError):
            experience_correlation(participants([1, 2]), [0.9])

    def test_spearman_option(self):
        years = [1.0, 2.0, 3.0, 10.0]
        ssim = [0.99, 0.95, 0.93, 0.90]
        assert experience_correlation(
            participants(years), ssim, method="spearman"
        ) == pytest.approx(-1.0)

    @given(
        slope=st.floats(0.1, 10),
        offset=st.floats(0, 5),
        seed=st.integers(0, 1000),
    )
    def test_affine_invariance(self, slope, offset, seed):
        rng = np.random.default_rng(seed)
        years = rng.uniform(0, 20, size=8)
        ssim = rng.uniform(0.88, 0.95, size=8)
        if np.ptp(years) == 0 or np.ptp(ssim) == 0:
            return
        base = experience_correlation(participants(list(years)), list(ssim))
        scaled = experience_correlation(
            participants(list(years * slope + offset)), list(ssim)
        )
        flipped = experience_correlation(
            participants(list(years)), list(-1.0 * np.asarray(ssim) * slope)
        )
        assert scaled == pytest.approx(base, abs=1e-9)
        assert flipped == pytest.approx(-base, abs=1e-9)


class TestReport:
    def sample(self) -> SavingsReport:
        return SavingsReport(
            categories=(
                category_saving(
                    RelevanceLevel.HIGHLY_RELEVANT, CodecFamily.H264, 12278, 653.39
                ),
                category_saving(
                    RelevanceLevel.RELEVANT, CodecFamily.H264, 12416, 252.11
                ),
            ),
            surgeries=(
                surgery_saving(CodecFamily.H264, 0.2375, 12278, 653.39),
            ),
        )

    def test_json_roundtrip(self):
        report = self.sample()
        assert report_from_json(emit_report(report, "json")) == report

    def test_csv_renders_two_decimal_percentages(self):
        text = emit_report(self.sample(), "csv")
        assert "94.68%" in text
        assert "95.94%" in text

    def test_empty_report_is_valid(self):
        text = emit_report(SavingsReport(categories=(), surgeries=()), "csv")
        assert "relevance,codec" in text

    def test_unknown_format_rejected(self):
        with pytest.raises(ReportError):
            emit_report(self.sample(), "xml")

    def test_out_of_range_saving_rejected(self):
        with pytest.raises(ReportError):
            SavingsReport(
                categories=(
                    CategorySaving(
                        RelevanceLevel.RELEVANT, CodecFamily.H264, 100, 10, 1.5
                    ),
                ),
                surgeries=(),
            )
        with pytest.raises(ReportError):
            SavingsReport(
                categories=(),
                surgeries=(SurgerySaving(CodecFamily.H264, 0.2, -0.2),),
            )
