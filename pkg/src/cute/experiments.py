"""Parameter sweeps over the simulator and their CSV output."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .config import Arm, NetworkConfig, SweepConfig, parse_config
from .metrics import SummaryMetrics, summarize
from .netsim import simulate

PRESETS = ("case1", "case2")

FIXED_COLUMNS = [
    "arm_control", "arm_caching", "sweep_var", "sweep_value", "replication",
    "seed", "total_throughput", "mean_response", "power", "fairness",
    "loss_prob",
]


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class Row:
    control: bool
    caching: bool
    sweep_var: str
    sweep_value: Optional[int]
    replication: Union[int, str]     # "mean" for aggregate rows
    seed: Optional[int]
    metrics: SummaryMetrics

    @property
    def arm(self) -> Arm:
        return Arm(control=self.control, caching=self.caching)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("cute").joinpath(f"presets/{name}.yaml").read_text()


def preset(name: str) -> SweepConfig:
    return parse_config(preset_text(name))


def _run_point(config: NetworkConfig) -> SummaryMetrics:
    return summarize(simulate(config))


def _mean(values: Iterable[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return math.fsum(present) / len(present) if present else None


def aggregate(metrics: Sequence[SummaryMetrics]) -> SummaryMetrics:
    """Mean over replications; unavailable values are skipped."""
    width = max(len(m.throughputs) for m in metrics)
    throughputs = tuple(
        _mean(m.throughputs[i] if i < len(m.throughputs) else None
              for m in metrics)
        for i in range(width))
    return SummaryMetrics(
        throughputs=throughputs,
        total_throughput=_mean(m.total_throughput for m in metrics),
        mean_response=_mean(m.mean_response for m in metrics),
        power=_mean(m.power for m in metrics),
        fairness=_mean(m.fairness for m in metrics),
        loss_probability=_mean(m.loss_probability for m in metrics),
    )


def run_sweep(sweep: SweepConfig, jobs: int = 1) -> list[Row]:
    """Run every (arm, value, replication); rows come back in key order.

    Each (arm, value) group is followed by its replication-mean row.
    """
    keys = [(arm, value, rep) for arm in sweep.arms
            for value in sweep.sweep.values
            for rep in range(sweep.replications)]
    configs = [sweep.point_config(*key) for key in keys]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_point, c) for c in configs]
            results = []
            for key, future in zip(keys, futures):
                results.append(_checked(key, future.result))
    else:
        results = [_checked(key, lambda c=c: _run_point(c))
                   for key, c in zip(keys, configs)]

    var = sweep.sweep.variable.value
    rows: list[Row] = []
    for start in range(0, len(keys), sweep.replications):
        group = []
        for (arm, value, rep), config, metrics in zip(
                keys[start:start + sweep.replications],
                configs[start:start + sweep.replications],
                results[start:start + sweep.replications]):
            rows.append(Row(arm.control, arm.caching, var, value, rep,
                            config.seed, metrics))
            group.append(metrics)
        rows.append(Row(arm.control, arm.caching, var, value, "mean", None,
                        aggregate(group)))
    return rows


def _checked(key, call):
    try:
        return call()
    except Exception as exc:
        arm, value, rep = key
        raise SweepError(f"run failed at arm {arm.label}, value {value}, "
                         f"replication {rep}: {exc}") from exc


def single_row(config: NetworkConfig, trace=None) -> Row:
    metrics = summarize(simulate(config, trace=trace))
    return Row(config.window_control_enabled, config.ooc_caching, "", None,
               0, config.seed, metrics)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def csv_lines(rows: Sequence[Row]) -> list[list[str]]:
    if not rows:
        raise ValueError("no rows to write")
    width = max(len(r.metrics.throughputs) for r in rows)
    table = [FIXED_COLUMNS + [f"t{i + 1}" for i in range(width)]]
    for r in rows:
        m = r.metrics
        line = [r.control, r.caching, r.sweep_var, r.sweep_value,
                r.replication, r.seed, m.total_throughput, m.mean_response,
                m.power, m.fairness, m.loss_probability]
        line += list(m.throughputs) + [None] * (width - len(m.throughputs))
        table.append([_fmt(v) for v in line])
    return table


def emit_csv(rows: Sequence[Row], destination) -> Path:
    path = Path(destination)
    table = csv_lines(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(table)
    return path


def mean_rows(rows: Sequence[Row]) -> list[Row]:
    return [r for r in rows if r.replication == "mean"]
