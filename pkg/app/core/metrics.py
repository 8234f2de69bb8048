"""Stage timings and counters collected during a run, reported in the run manifest."""

import time
import statistics
from contextlib import contextmanager
from dataclasses import dataclass
from threading import Lock
from typing import Dict, Iterator, List, Optional


@dataclass
class StageTiming:
    """Timing of one completed stage"""
    stage: str
    started_at: float
    duration_s: float
    error: Optional[str] = None


class RunMetrics:
    """
    Collects stage timings and counters for one run.

    Thread-safe: Monte Carlo workers and grid evaluators report into the
    same instance.
    """

    def __init__(self):
        self._lock = Lock()
        self._created = time.perf_counter()
        self._stages: List[StageTiming] = []
        self._counters: Dict[str, float] = {}

    def record_stage(self, stage: str, duration_s: float, error: Optional[str] = None) -> None:
        """
        Record a finished stage.

        Args:
            stage: Stage name (e.g. "sample_graph", "bp")
            duration_s: Wall time in seconds
            error: Optional error message if the stage failed
        """
        with self._lock:
            self._stages.append(
                StageTiming(stage=stage, started_at=time.time(), duration_s=duration_s, error=error)
            )

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time the enclosed block and record it as a stage."""
        start = time.perf_counter()
        try:
            yield
        except Exception as exc:
            self.record_stage(name, time.perf_counter() - start, error=type(exc).__name__)
            raise
        self.record_stage(name, time.perf_counter() - start)

    def increment(self, counter: str, amount: float = 1) -> None:
        with self._lock:
            self._counters[counter] = self._counters.get(counter, 0) + amount

    def counter(self, name: str) -> float:
        with self._lock:
            return self._counters.get(name, 0)

    def get_metrics(self) -> Dict:
        """
        Get the metrics summary.

        Returns:
            Dictionary with per-stage durations, duration percentiles,
            counters and total wall time
        """
        with self._lock:
            durations = [s.duration_s for s in self._stages]
            percentiles = {}
            if durations:
                sorted_durations = sorted(durations)
                percentiles = {
                    "p50": self._percentile(sorted_durations, 50),
                    "p90": self._percentile(sorted_durations, 90),
                    "mean": statistics.mean(durations),
                    "max": sorted_durations[-1],
                }

            per_stage: Dict[str, float] = {}
            for s in self._stages:
                per_stage[s.stage] = per_stage.get(s.stage, 0.0) + s.duration_s

            return {
                "stages": per_stage,
                "stage_count": len(self._stages),
                "failed_stages": [s.stage for s in self._stages if s.error],
                "duration_percentiles": percentiles,
                "counters": dict(self._counters),
                "wall_time_s": time.perf_counter() - self._created,
            }

    @staticmethod
    def _percentile(sorted_data: List[float], percentile: int) -> float:
        """Linear-interpolated percentile of ascending data."""
        if not sorted_data:
            return 0.0
        if len(sorted_data) == 1:
            return sorted_data[0]

        index = (percentile / 100) * (len(sorted_data) - 1)
        if index.is_integer():
            return sorted_data[int(index)]

        lower_index = int(index)
        weight = index - lower_index
        return sorted_data[lower_index] * (1 - weight) + sorted_data[lower_index + 1] * weight

    def reset(self) -> None:
        """Reset all metrics (useful for testing)"""
        with self._lock:
            self._stages.clear()
            self._counters.clear()
            self._created = time.perf_counter()
