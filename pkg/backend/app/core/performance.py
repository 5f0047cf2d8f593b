"""Stage timing for the simulator.

Stages are named ``<family>.<detail>`` (``detect.admm``, ``beamform.admm``,
``sweep.trial``, ``sweep.uplink``). Each sample keeps its wall time, the change
in resident memory across the stage and the caller's context (trial index,
trial count). The CLI logs ``get_performance_report()`` at DEBUG after a run.
"""

import functools
import logging
import threading
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Deque, Dict, Optional

import numpy as np
import psutil

from config import settings

logger = logging.getLogger(__name__)

_MB = 1024 * 1024
_WINDOW = 500  # samples kept per stage for the statistics


@dataclass
class StageSample:
    stage: str
    duration_ms: float
    rss_delta_mb: float
    finished_at: datetime
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def family(self) -> str:
        return self.stage.split(".", 1)[0]


class PerformanceMonitor:
    """Thread-safe store of stage samples with per-stage and per-family summaries."""

    def __init__(self, max_metrics: int = 1000, slow_operation_ms: Optional[float] = None):
        self.metrics: Deque[StageSample] = deque(maxlen=max_metrics)
        self._durations: Dict[str, Deque[float]] = defaultdict(lambda: deque(maxlen=_WINDOW))
        self.slow_operation_ms = slow_operation_ms or settings.slow_operation_ms
        self.enabled = settings.performance_enabled
        self.lock = threading.Lock()
        self._process = psutil.Process()

    def rss_mb(self) -> float:
        return self._process.memory_info().rss / _MB

    def record_metric(
        self,
        operation: str,
        duration_ms: float,
        metadata: Optional[Dict[str, Any]] = None,
        rss_delta_mb: float = 0.0,
    ) -> None:
        """Store one finished stage; stages slower than ``slow_operation_ms`` are logged."""
        if not self.enabled:
            return
        sample = StageSample(
            stage=operation,
            duration_ms=duration_ms,
            rss_delta_mb=rss_delta_mb,
            finished_at=datetime.now(timezone.utc),
            metadata=dict(metadata or {}),
        )
        with self.lock:
            self.metrics.append(sample)
            self._durations[operation].append(duration_ms)

        if duration_ms > self.slow_operation_ms:
            context = f" {sample.metadata}" if sample.metadata else ""
            logger.warning(f"Slow stage {operation}: {duration_ms:.1f}ms{context}")

    def get_operation_stats(self, operation: str) -> Dict[str, float]:
        with self.lock:
            durations = np.fromiter(self._durations.get(operation, ()), dtype=float)
        if durations.size == 0:
            return {}
        return {
            "count": int(durations.size),
            "avg_ms": float(durations.mean()),
            "min_ms": float(durations.min()),
            "max_ms": float(durations.max()),
            "p95_ms": float(np.percentile(durations, 95)),
        }

    def get_all_stats(self) -> Dict[str, Dict[str, float]]:
        with self.lock:
            stages = sorted(self._durations)
        return {stage: self.get_operation_stats(stage) for stage in stages}

    def family_totals(self) -> Dict[str, float]:
        """Total milliseconds per stage family over the retained samples."""
        totals: Dict[str, float] = defaultdict(float)
        with self.lock:
            for sample in self.metrics:
                totals[sample.family] += sample.duration_ms
        return dict(totals)

    def get_system_metrics(self) -> Dict[str, float]:
        return {
            "rss_mb": self.rss_mb(),
            "memory_percent": psutil.virtual_memory().percent,
            "cpu_count": psutil.cpu_count(logical=True) or 1,
        }

    def clear_metrics(self) -> None:
        with self.lock:
            self.metrics.clear()
            self._durations.clear()


performance_monitor = PerformanceMonitor()


class PerformanceTimer:
    """Times a ``with`` block as one stage; a raised exception is noted in the sample."""

    def __init__(self, operation: str, metadata: Optional[Dict[str, Any]] = None):
        self.operation = operation
        self.metadata = metadata or {}
        self.duration_ms = 0.0
        self._start = 0.0
        self._rss_start = 0.0

    def __enter__(self):
        if performance_monitor.enabled:
            self._rss_start = performance_monitor.rss_mb()
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration_ms = (time.perf_counter() - self._start) * 1000
        if not performance_monitor.enabled:
            return
        if exc_type:
            self.metadata.update({"error": True, "exception_type": exc_type.__name__})
        performance_monitor.record_metric(
            self.operation,
            self.duration_ms,
            self.metadata,
            rss_delta_mb=performance_monitor.rss_mb() - self._rss_start,
        )


def time_operation(operation: str, metadata: Optional[Dict[str, Any]] = None):
    """Decorator form of ``PerformanceTimer``."""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with PerformanceTimer(operation, dict(metadata or {})):
                return func(*args, **kwargs)
        return wrapper
    return decorator


def get_performance_report() -> Dict[str, Any]:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "system_metrics": performance_monitor.get_system_metrics(),
        "stage_stats": performance_monitor.get_all_stats(),
        "family_totals_ms": performance_monitor.family_totals(),
        "samples": len(performance_monitor.metrics),
        "slow_operation_ms": performance_monitor.slow_operation_ms,
    }
