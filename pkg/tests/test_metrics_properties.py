"""Property-based tests for run metrics collection"""
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings, strategies as st

from app.core.metrics import RunMetrics

stage_names = st.sampled_from(["sample", "bp", "de", "write", "curves"])
durations = st.floats(min_value=0.0, max_value=100.0, allow_nan=False, allow_infinity=False)


class TestStageAccounting:
    """
    **Feature: exitsbm, Property 8: Stage timings add up per stage**
    """

    @settings(max_examples=100)
    @given(records=st.lists(st.tuples(stage_names, durations), min_size=1, max_size=30))
    def test_per_stage_sums(self, records):
        metrics = RunMetrics()
        for stage, duration in records:
            metrics.record_stage(stage, duration)
        summary = metrics.get_metrics()

        assert summary["stage_count"] == len(records)
        for stage in {s for s, _ in records}:
            expected = sum(d for s, d in records if s == stage)
            assert summary["stages"][stage] == pytest.approx(expected)
        pct = summary["duration_percentiles"]
        assert pct["p50"] <= pct["p90"] <= pct["max"]
        assert pct["max"] == max(d for _, d in records)

    @pytest.mark.unit
    def test_failed_stage_is_recorded_and_reraised(self):
        metrics = RunMetrics()
        with pytest.raises(KeyError):
            with metrics.stage("bp"):
                raise KeyError("missing")
        summary = metrics.get_metrics()
        assert summary["failed_stages"] == ["bp"]
        assert summary["stage_count"] == 1

    @pytest.mark.unit
    def test_empty_metrics(self):
        summary = RunMetrics().get_metrics()
        assert summary["stage_count"] == 0
        assert summary["duration_percentiles"] == {}
        assert summary["counters"] == {}


class TestCounters:
    """
    **Feature: exitsbm, Property 9: Counters are exact under concurrent increments**
    """

    @settings(max_examples=20)
    @given(amounts=st.lists(st.integers(min_value=0, max_value=1000), min_size=1, max_size=200),
           threads=st.integers(min_value=1, max_value=8))
    def test_concurrent_increments(self, amounts, threads):
        metrics = RunMetrics()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda a: metrics.increment("bp.clamp_count", a), amounts))
        assert metrics.counter("bp.clamp_count") == sum(amounts)
        assert metrics.get_metrics()["counters"]["bp.clamp_count"] == sum(amounts)

    @pytest.mark.unit
    def test_reset_clears_everything(self):
        metrics = RunMetrics()
        metrics.increment("de.iterations", 5)
        metrics.record_stage("de", 0.1)
        metrics.reset()
        summary = metrics.get_metrics()
        assert summary["counters"] == {}
        assert summary["stage_count"] == 0
        assert metrics.counter("de.iterations") == 0
