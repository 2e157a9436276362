"""Closed queueing model of a window-controlled path.

Exact single-class mean value analysis for a cyclic network of FCFS
exponential servers, each visited once per cycle, plus the pipe-size rules
derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


@dataclass(frozen=True)
class ClosedNetworkModel:
    service_times: tuple[float, ...]

    def __init__(self, service_times: Sequence[float]):
        times = tuple(float(s) for s in service_times)
        if len(times) < 2:
            raise ValueError("a closed network needs at least 2 queues")
        if any(not s > 0 for s in times):
            raise ValueError(f"service times must be positive: {times}")
        object.__setattr__(self, "service_times", times)

    @classmethod
    def identical(cls, queues: int, service_time: float = 1.0):
        return cls([service_time] * queues)

    @property
    def n(self) -> int:
        """Queue count minus one."""
        return len(self.service_times) - 1


@dataclass(frozen=True)
class PowerCurvePoint:
    customers: int
    throughput: float
    response: float
    power: float


class Duplex(str, Enum):
    FULL = "full"
    HALF = "half"


@dataclass(frozen=True)
class QueueCountSpec:
    hops: int
    duplex: Duplex = Duplex.FULL
    cpu_queueing: bool = True
    acks_present: bool = True

    def __post_init__(self) -> None:
        if self.hops < 1:
            raise ValueError(f"hops must be >= 1, got {self.hops}")


def power_curve(model: ClosedNetworkModel, c_max: int) -> list[PowerCurvePoint]:
    """MVA recursion over populations 1..c_max."""
    if c_max < 1:
        raise ValueError(f"customer count must be >= 1, got {c_max}")
    s = model.service_times
    queue_len = [0.0] * len(s)
    points = []
    for c in range(1, c_max + 1):
        residence = [sk * (1.0 + nk) for sk, nk in zip(s, queue_len)]
        response = math.fsum(residence)
        throughput = c / response
        queue_len = [throughput * rk for rk in residence]
        points.append(PowerCurvePoint(c, throughput, response,
                                      throughput / response))
    return points


def mva_closed(model: ClosedNetworkModel, customers: int) -> tuple[float, float]:
    """Return (throughput, response time) with ``customers`` circulating."""
    point = power_curve(model, customers)[-1]
    return point.throughput, point.response


def power(throughput: float, response: float) -> float:
    if throughput <= 0 or response <= 0:
        raise ValueError("throughput and response must be positive")
    return throughput / response


def optimal_population(model: ClosedNetworkModel, c_max: int) -> int:
    """Population maximizing power over 1..c_max; ties go to the smaller."""
    best = None
    for point in power_curve(model, c_max):
        if best is None or point.power > best.power:
            best = point
    return best.customers


def queue_count(spec: QueueCountSpec) -> int:
    h = spec.hops
    count = 3 * h + 1
    if spec.duplex is Duplex.HALF:
        count -= h
    if not spec.cpu_queueing:
        count -= h
    if not spec.acks_present and spec.duplex is Duplex.FULL:
        count -= h
    return max(count, h)


def terrestrial_pipe_size(hops: int) -> int:
    if hops < 1:
        raise ValueError(f"hops must be >= 1, got {hops}")
    return 3 * hops


def satellite_pipe_size(min_path_delay: float,
                        bottleneck_service_time: float) -> int:
    """Path delay over bottleneck service time, rounded half up."""
    if min_path_delay <= 0 or bottleneck_service_time <= 0:
        raise ValueError("delays must be positive")
    if min_path_delay < bottleneck_service_time:
        raise ValueError("minimum path delay cannot be below the "
                         "bottleneck service time")
    return max(1, math.floor(min_path_delay / bottleneck_service_time + 0.5))
