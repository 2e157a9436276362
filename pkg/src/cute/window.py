"""Timeout-driven congestion window controller.

A source keeps its window between a floor and a ceiling. Acknowledgments
grow it (one packet per window's worth of acked packets under the
parabolic rule); a retransmission timeout collapses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Increase(str, Enum):
    PARABOLIC = "parabolic"
    LINEAR = "linear"


class Decrease(str, Enum):
    SUDDEN = "sudden"
    GRADUAL = "gradual"
    BINARY = "binary"


class Init(str, Enum):
    AT_MIN = "at_min"
    AT_MAX = "at_max"
    HALFWAY = "halfway"
    REMEMBERED = "remembered"


class MinRule(str, Enum):
    ONE = "one"
    HOPS = "hops"
    HOPS_TIMES = "hops_times"


class PolicyConfig(BaseModel):
    """Selects one alternative for each of the window rules.

    ``increase_every`` is the N of the linear family (one increment per N
    acked packets) and is only read when ``increase`` is ``linear``.
    ``min_multiplier`` is only read when ``min_rule`` is ``hops_times``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    increase: Increase = Increase.PARABOLIC
    increase_every: int = Field(default=1, ge=1)
    decrease: Decrease = Decrease.SUDDEN
    init: Init = Init.AT_MIN
    min_rule: MinRule = MinRule.ONE
    min_multiplier: int = Field(default=2, ge=2)


@dataclass(frozen=True)
class PathInfo:
    hops: int
    credits: int
    pipe_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.hops < 1:
            raise ValueError(f"hops must be >= 1, got {self.hops}")
        if self.credits < 1:
            raise ValueError(f"credits must be >= 1, got {self.credits}")
        if self.pipe_size is not None and self.pipe_size < 1:
            raise ValueError(f"pipe_size must be >= 1, got {self.pipe_size}")


class WindowConfigError(ValueError):
    """The minimum rule asks for a larger floor than the ceiling allows."""


TraceHook = Callable[[int, str, int], None]


@dataclass
class WindowController:
    """Per-connection window state machine.

    ``trace``, when set, is called as ``trace(event_index, kind, ws_after)``
    after every ``on_ack``/``on_timeout``.
    """

    policy: PolicyConfig
    ws: int
    ws_min: int
    ws_max: int
    acks_since_change: int = 0
    remembered_ws: Optional[int] = None
    trace: Optional[TraceHook] = field(default=None, repr=False, compare=False)
    _events: int = field(default=0, repr=False, compare=False)

    def _threshold(self) -> int:
        if self.policy.increase is Increase.LINEAR:
            return self.policy.increase_every
        return self.ws

    def _emit(self, kind: str) -> None:
        self._events += 1
        if self.trace is not None:
            self.trace(self._events, kind, self.ws)

    def on_ack(self, newly_acked: int) -> int:
        """Count ``newly_acked`` packets; at most one increment per call."""
        if newly_acked < 1:
            raise ValueError(f"newly_acked must be >= 1, got {newly_acked}")
        self.acks_since_change += newly_acked
        if self.acks_since_change >= self._threshold():
            self.ws = min(self.ws + 1, self.ws_max)
            # excess beyond the threshold is discarded
            self.acks_since_change = 0
        self._emit("ack")
        return self.ws

    def on_timeout(self) -> int:
        if self.policy.init is Init.REMEMBERED:
            self.remembered_ws = self.ws
        decrease = self.policy.decrease
        if decrease is Decrease.SUDDEN:
            self.ws = self.ws_min
        elif decrease is Decrease.GRADUAL:
            self.ws = max(self.ws_min, self.ws - 1)
        else:
            self.ws = max(self.ws_min, math.ceil(self.ws / 2))
        self.acks_since_change = 0
        self._emit("timeout")
        return self.ws


def effective_window_max(pipe_size: Optional[int], credits: int) -> int:
    """Window ceiling: the pipe size capped by the destination's credits."""
    if credits < 1:
        raise ValueError(f"credits must be >= 1, got {credits}")
    if pipe_size is None:
        return credits
    if pipe_size < 1:
        raise ValueError(f"pipe_size must be >= 1, got {pipe_size}")
    return min(pipe_size, credits)


def window_min(policy: PolicyConfig, hops: int) -> int:
    if policy.min_rule is MinRule.ONE:
        return 1
    if policy.min_rule is MinRule.HOPS:
        return hops
    return policy.min_multiplier * hops


def new_controller(
    policy: PolicyConfig,
    path: PathInfo,
    remembered: Optional[int] = None,
    trace: Optional[TraceHook] = None,
) -> WindowController:
    ws_min = window_min(policy, path.hops)
    ws_max = effective_window_max(path.pipe_size, path.credits)
    if ws_min > ws_max:
        raise WindowConfigError(
            f"minimum window {ws_min} ({policy.min_rule.value}) exceeds "
            f"maximum window {ws_max} (pipe_size={path.pipe_size}, "
            f"credits={path.credits})"
        )
    if policy.init is Init.AT_MIN:
        ws = ws_min
    elif policy.init is Init.AT_MAX:
        ws = ws_max
    elif policy.init is Init.HALFWAY:
        ws = math.ceil((ws_min + ws_max) / 2)
    elif remembered is None:
        ws = ws_min
    else:
        ws = min(max(remembered, ws_min), ws_max)
    return WindowController(
        policy=policy,
        ws=ws,
        ws_min=ws_min,
        ws_max=ws_max,
        remembered_ws=remembered,
        trace=trace,
    )


class ControllerFactory:
    """Builds controllers and keeps the last window used per destination.

    The memory only feeds ``Init.REMEMBERED``; other init policies ignore it.
    Single writer: callers must not share a factory across threads.
    """

    def __init__(self, policy: PolicyConfig):
        self.policy = policy
        self.memory: dict[object, int] = {}

    def create(self, destination: object, path: PathInfo,
               trace: Optional[TraceHook] = None) -> WindowController:
        return new_controller(self.policy, path,
                              remembered=self.memory.get(destination),
                              trace=trace)

    def close(self, destination: object, ctrl: WindowController) -> None:
        self.memory[destination] = ctrl.ws

    def note_timeout(self, destination: object,
                     ctrl: WindowController) -> None:
        if ctrl.remembered_ws is not None:
            self.memory[destination] = ctrl.remembered_ws
