"""Small-signal gm-C netlist representation.

Node 0 is AC ground. A transconductor is a 4-port element: it senses
v_plus - v_minus and pushes the current gm*(v_plus - v_minus) into out_src
while drawing the same current out of out_snk. Supplies are AC ground, so a
transistor whose drain sits at VDD simply has out_snk = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError
from .tf import RationalTF

GROUND = 0

Probe = int | tuple[int, int]


def _check_value(name: str, value: float, allow_zero: bool = False) -> None:
    ok = isinstance(value, (int, float)) and math.isfinite(value)
    ok = ok and (value >= 0 if allow_zero else value > 0)
    if not ok:
        kind = "non-negative" if allow_zero else "positive"
        raise InvalidParameterError(f"{name} must be a {kind} finite number, got {value!r}")


@dataclass(frozen=True)
class Transconductor:
    v_plus: int
    v_minus: int
    out_src: int
    out_snk: int
    gm: float

    def __post_init__(self):
        _check_value("gm", self.gm)

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.v_plus, self.v_minus, self.out_src, self.out_snk)


@dataclass(frozen=True)
class Capacitor:
    a: int
    b: int
    c: float

    def __post_init__(self):
        _check_value("c", self.c)
        if self.a == self.b:
            raise InvalidParameterError("capacitor terminals must differ")

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.a, self.b)


@dataclass(frozen=True)
class Conductance:
    a: int
    b: int
    g: float

    def __post_init__(self):
        _check_value("g", self.g, allow_zero=True)

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.a, self.b)


@dataclass(frozen=True)
class GmCNetlist:
    """Nodes plus elements, a driven input node, and labeled probes.

    ``probes`` maps a label to a node (voltage to ground) or to a
    (plus, minus) pair (differential voltage). ``current_probes`` maps a label
    to an index into ``transconductors``; the probed quantity is that
    element's output current gm*(v_plus - v_minus).
    """

    node_count: int
    transconductors: tuple[Transconductor, ...]
    capacitors: tuple[Capacitor, ...]
    conductances: tuple[Conductance, ...]
    input_node: int
    probes: dict[str, Probe] = field(default_factory=dict)
    current_probes: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "transconductors", tuple(self.transconductors))
        object.__setattr__(self, "capacitors", tuple(self.capacitors))
        object.__setattr__(self, "conductances", tuple(self.conductances))
        self._validate()

    def _validate(self) -> None:
        if self.node_count < 2:
            raise InvalidParameterError("netlist needs ground plus at least one node")
        if not (0 < self.input_node < self.node_count):
            raise InvalidParameterError(f"input node {self.input_node} must be a non-ground node")
        touched = {GROUND, self.input_node}
        for el in (*self.transconductors, *self.capacitors, *self.conductances):
            for n in el.nodes:
                if not (0 <= n < self.node_count):
                    raise InvalidParameterError(f"element references unknown node {n}")
            touched.update(el.nodes)
        missing = set(range(self.node_count)) - touched
        if missing:
            raise InvalidParameterError(f"floating nodes with no incident element: {sorted(missing)}")
        for label, probe in self.probes.items():
            nodes = probe if isinstance(probe, tuple) else (probe,)
            for n in nodes:
                if not (0 <= n < self.node_count):
                    raise InvalidParameterError(f"probe {label!r} references unknown node {n}")
        for label, idx in self.current_probes.items():
            if not (0 <= idx < len(self.transconductors)):
                raise InvalidParameterError(f"current probe {label!r} references unknown element {idx}")

    @property
    def probe_labels(self) -> list[str]:
        return list(self.probes) + list(self.current_probes)


@dataclass(frozen=True)
class TopologyBundle:
    """A topology's netlist, its closed-form transfer functions, and parameters.

    ``closed_forms`` keys are a subset of the netlist's probe labels, so every
    closed form can be checked against the nodal-analysis oracle.
    ``omega0``/``q`` are the constructor's documented formulas (``q`` is None
    for first-order circuits). ``stability_warning`` is set instead of raising
    when element values put poles in the right half-plane.
    """

    name: str
    netlist: GmCNetlist
    closed_forms: dict[str, RationalTF]
    params: dict
    omega0: float
    q: float | None = None
    stability_warning: str | None = None

    def __post_init__(self):
        unknown = set(self.closed_forms) - set(self.netlist.probe_labels)
        if unknown:
            raise InvalidParameterError(f"closed forms without matching probes: {sorted(unknown)}")

    @property
    def f0(self) -> float:
        """Center/cutoff frequency in Hz."""
        return self.omega0 / (2.0 * math.pi)
