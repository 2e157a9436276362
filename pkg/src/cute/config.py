"""Experiment configuration: models, YAML parsing, and the JSON schema."""

from __future__ import annotations

import json
from enum import Enum
from importlib import resources
from typing import Annotated, Literal, Optional, Union

import yaml
from pydantic import (BaseModel, ConfigDict, Field, TypeAdapter,
                      ValidationError, field_validator, model_validator)

from .window import PolicyConfig


class Distribution(str, Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL = "exponential"


class PipeSizeRule(str, Enum):
    TERRESTRIAL = "terrestrial"   # 3 * hops
    OPTIMAL = "optimal"           # MVA optimum of the path model, per source
    NONE = "none"                 # credits alone bound the window


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Service(_Strict):
    mean: float = Field(gt=0)
    distribution: Distribution = Distribution.DETERMINISTIC


class ServiceTimes(_Strict):
    lan_link: Service = Service(mean=0.1)
    wan_link: Service = Service(mean=1.0)
    cpu: Service = Service(mean=0.05)


class Fault(_Strict):
    connection: int = Field(ge=0)
    seq: int = Field(ge=1)


class NetworkConfig(_Strict):
    kind: Literal["network"] = "network"
    sources: int = Field(ge=1)
    hops: int = Field(ge=1)
    buffer_capacity: int = Field(ge=1)
    credits: int = Field(ge=1)
    ooc_caching: bool = False
    window_control_enabled: bool = True
    policy: PolicyConfig = PolicyConfig()
    pipe_size_rule: PipeSizeRule = PipeSizeRule.TERRESTRIAL
    service: ServiceTimes = ServiceTimes()
    timeout_factor: float = Field(default=8.0, ge=1)
    duration: float = Field(gt=0)
    warmup: float = Field(default=0.0, ge=0)
    fault_schedule: list[Fault] = []
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.warmup >= self.duration:
            raise ValueError(f"warmup ({self.warmup}) must be below "
                             f"duration ({self.duration})")
        for fault in self.fault_schedule:
            if fault.connection >= self.sources:
                raise ValueError(f"fault names connection {fault.connection} "
                                 f"but only {self.sources} sources exist")
        return self


class SweepVariable(str, Enum):
    CREDITS = "credits"
    SOURCES = "sources"


class Sweep(_Strict):
    variable: SweepVariable
    values: list[int] = Field(min_length=1)

    @field_validator("values")
    @classmethod
    def _increasing(cls, values):
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if values[0] < 1:
            raise ValueError("sweep values must be >= 1")
        return values


class Arm(_Strict):
    control: bool
    caching: bool

    @property
    def label(self) -> str:
        return (f"control={'on' if self.control else 'off'},"
                f"caching={'on' if self.caching else 'off'}")


ALL_ARMS = [Arm(control=c, caching=k) for c in (True, False)
            for k in (True, False)]


class SweepConfig(_Strict):
    kind: Literal["sweep"] = "sweep"
    base: NetworkConfig
    sweep: Sweep
    arms: list[Arm] = Field(default=ALL_ARMS, min_length=1)
    replications: int = Field(default=5, ge=1)
    seed_base: int = 0

    def point_config(self, arm: Arm, value: int,
                     replication: int) -> NetworkConfig:
        update = {
            "window_control_enabled": arm.control,
            "ooc_caching": arm.caching,
            "seed": self.seed_base + replication,
            self.sweep.variable.value: value,
        }
        data = self.base.model_dump()
        data.update(update)
        return NetworkConfig.model_validate(data)


ConfigDocument = TypeAdapter(
    Annotated[Union[NetworkConfig, SweepConfig], Field(discriminator="kind")])


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration documents."""


def _key_lines(node, prefix=()) -> dict[tuple, int]:
    """Map each key path in a composed YAML tree to its 1-based line."""
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = prefix + (key.value,)
            lines[path] = key.start_mark.line + 1
            lines.update(_key_lines(value, path))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = prefix + (i,)
            lines[path] = item.start_mark.line + 1
            lines.update(_key_lines(item, path))
    return lines


def _line_for(loc: tuple, lines: dict[tuple, int]) -> Optional[int]:
    loc = tuple(str(p) if not isinstance(p, int) else p for p in loc)
    for end in range(len(loc), 0, -1):
        if loc[:end] in lines:
            return lines[loc[:end]]
    return None


def parse_config(text: str) -> Union[NetworkConfig, SweepConfig]:
    """Parse a YAML document into a validated network or sweep config."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "?"
        raise ConfigError(f"syntax error at {where}: {exc.problem}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping at top level")
    data.setdefault("kind", "sweep" if "sweep" in data else "network")
    lines = _key_lines(node)
    try:
        return ConfigDocument.validate_python(data)
    except ValidationError as exc:
        messages = []
        for err in exc.errors():
            # drop the union tag pydantic prepends
            loc = tuple(err["loc"][1:])
            field = ".".join(str(p) for p in loc) or "<root>"
            line = _line_for(loc, lines)
            where = f"line {line}: " if line else ""
            if err["type"] == "extra_forbidden":
                messages.append(f"{where}unknown key '{field}'")
            else:
                messages.append(f"{where}{field}: {err['msg']}")
        raise ConfigError("; ".join(messages)) from exc


def load_config(path) -> Union[NetworkConfig, SweepConfig]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def json_schema() -> dict:
    return ConfigDocument.json_schema()


def shipped_schema() -> dict:
    text = resources.files("cute").joinpath("config.schema.json").read_text()
    return json.loads(text)
