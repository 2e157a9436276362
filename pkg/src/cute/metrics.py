"""Performance measures derived from simulation counters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .netsim import RunStats


@dataclass(frozen=True)
class SummaryMetrics:
    throughputs: tuple[float, ...]
    total_throughput: float
    mean_response: Optional[float]
    power: Optional[float]
    fairness: Optional[float]
    loss_probability: float


def fairness_index(throughputs: Sequence[float]) -> float:
    """Fairness index: (sum T)^2 / (n * sum T^2)."""
    if not throughputs:
        raise ValueError("need at least one throughput")
    if any(t < 0 for t in throughputs):
        raise ValueError("throughputs must be nonnegative")
    squares = math.fsum(t * t for t in throughputs)
    if squares == 0:
        raise ValueError("fairness is undefined when every throughput is zero")
    total = math.fsum(throughputs)
    return min(1.0, total * total / (len(throughputs) * squares))


def summarize(stats: RunStats) -> SummaryMetrics:
    if stats.interval <= 0:
        raise ValueError("measured interval must be positive")
    throughputs = tuple(stats.throughputs())
    total = math.fsum(throughputs)
    rtt_count = sum(c.rtt_count for c in stats.connections)
    response = power = None
    if rtt_count and total > 0:
        response = math.fsum(c.rtt_sum for c in stats.connections) / rtt_count
        power = total / response
    fairness = fairness_index(throughputs) if total > 0 else None
    sent = sum(c.sent for c in stats.connections)
    drops = sum(c.dropped for c in stats.connections)
    loss = min(1.0, drops / sent) if sent else 0.0
    return SummaryMetrics(throughputs, total, response, power, fairness, loss)


def max_supportable_connections(buffer_capacity: int, ws_min: int) -> int:
    """Largest n with n * ws_min strictly below the buffer capacity."""
    if buffer_capacity < 1 or ws_min < 1:
        raise ValueError("buffer capacity and minimum window must be >= 1")
    return (buffer_capacity - 1) // ws_min
