"""Transmission network description used by the planning model.

Units: capacities and flows in MW, susceptance in per-unit on ``base_mva``,
costs in currency (investment), currency/MW (capacity) and currency/MWh
(operation, load shedding).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DanglingReference, SchemaError


@dataclass(frozen=True)
class Line:
    name: str
    from_bus: str
    to_bus: str
    susceptance: float
    f_max: float
    f_min: float = 0.0
    cost_fixed: float = 0.0
    cost_variable: float = 0.0
    existing: bool = False
    # capacity already in place for existing lines; only capacity above it is paid for
    base_capacity: float = 0.0

    @property
    def corridor(self) -> str:
        a, b = sorted([self.from_bus, self.to_bus])
        return f"{a}-{b}"


@dataclass(frozen=True)
class Generator:
    name: str
    bus: str
    p_max: float
    cost: float
    ramp_up: float = float("inf")
    ramp_down: float = float("-inf")


@dataclass(frozen=True)
class Renewable:
    """Renewable unit whose hourly availability is ``capacity * channel value``."""

    name: str
    bus: str
    channel: str
    capacity: float = 1.0
    cost: float = 0.0


@dataclass(frozen=True)
class Demand:
    """Nodal demand ``scale * channel value`` (MW)."""

    name: str
    bus: str
    channel: str
    scale: float = 1.0


@dataclass(frozen=True)
class Network:
    buses: tuple
    lines: tuple
    generators: tuple = ()
    renewables: tuple = ()
    demands: tuple = ()
    base_mva: float = 100.0
    shed_cost: float = 10_000.0
    name: str = "network"
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(str(b) for b in self.buses))
        for attr in ("lines", "generators", "renewables", "demands"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        self.validate()

    def validate(self):
        buses = set(self.buses)
        if len(buses) != len(self.buses):
            raise SchemaError("duplicate bus names")
        names = [x.name for x in (*self.lines, *self.generators, *self.renewables, *self.demands)]
        if len(set(names)) != len(names):
            raise SchemaError("element names must be unique")
        for ln in self.lines:
            for b in (ln.from_bus, ln.to_bus):
                if b not in buses:
                    raise DanglingReference(f"line {ln.name} references unknown bus {b!r}")
            if ln.from_bus == ln.to_bus:
                raise SchemaError(f"line {ln.name} is a self-loop")
            if not ln.susceptance > 0:
                raise SchemaError(f"line {ln.name}: susceptance must be positive")
            if not 0 <= ln.f_min <= ln.f_max:
                raise SchemaError(f"line {ln.name}: need 0 <= f_min <= f_max")
            if ln.existing and not ln.base_capacity <= ln.f_max:
                raise SchemaError(f"line {ln.name}: base capacity above f_max")
            if ln.cost_fixed < 0 or ln.cost_variable < 0:
                raise SchemaError(f"line {ln.name}: negative cost")
        for g in self.generators:
            if g.bus not in buses:
                raise DanglingReference(f"generator {g.name} references unknown bus {g.bus!r}")
            if g.p_max < 0:
                raise SchemaError(f"generator {g.name}: negative capacity")
            if not g.ramp_down <= 0 <= g.ramp_up:
                raise SchemaError(f"generator {g.name}: need ramp_down <= 0 <= ramp_up")
        for r in (*self.renewables, *self.demands):
            if r.bus not in buses:
                raise DanglingReference(f"{r.name} references unknown bus {r.bus!r}")
        if self.shed_cost < 0:
            raise SchemaError("shed cost must be nonnegative")

    @property
    def candidates(self) -> list[Line]:
        return [ln for ln in self.lines if not ln.existing]

    @property
    def existing(self) -> list[Line]:
        return [ln for ln in self.lines if ln.existing]

    def bus_index(self, name) -> int:
        return self.buses.index(str(name))

    def line(self, name) -> Line:
        for ln in self.lines:
            if ln.name == name:
                return ln
        raise KeyError(name)

    def channels(self) -> set:
        return {x.channel for x in (*self.renewables, *self.demands)}
