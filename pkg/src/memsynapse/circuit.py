"""Circuit topologies, pulse-train stimulus and the fixed-step transient solver.

At every instant the circuit is purely resistive, so the solver splits each
step in two: solve Ohm's law on the current memristance snapshot, then
advance every device's state with that current held fixed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .device import (
    MemristorParams,
    MemristorState,
    Method,
    Model,
    _advance_x,
    initial_state,
    memristance,
)
from .errors import InvalidTerminals, NonFiniteState, ValidationError

__all__ = [
    "Single",
    "SeriesPair",
    "Topology",
    "PulseTrain",
    "SolverConfig",
    "Trajectory",
    "Terminals",
    "source_voltage_at",
    "instantaneous_current",
    "simulate",
    "readout_resistance",
]

# relative slack on pulse edges so that t = k*dt lands on the intended side
_EDGE = 1e-9


@dataclass(frozen=True)
class Single:
    device: MemristorParams

    @property
    def devices(self) -> tuple[MemristorParams, ...]:
        return (self.device,)


@dataclass(frozen=True)
class SeriesPair:
    """Two memristors in series with opposite polarities (compound synapse).

    ``m1`` carries the synaptic weight and is read alone between terminals
    2 and 3; updates are applied across the whole pair (terminals 1 and 2).
    """

    m1: MemristorParams
    m2: MemristorParams

    def __post_init__(self):
        if self.m1.polarity != -self.m2.polarity:
            raise ValidationError("polarity", "series devices need opposite polarities")

    @property
    def devices(self) -> tuple[MemristorParams, ...]:
        return (self.m1, self.m2)


Topology = Union[Single, SeriesPair]


def _check_number(name, value, finite=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, "must be a number")
    if finite and not math.isfinite(value):
        raise ValidationError(name, "must be finite")


@dataclass(frozen=True)
class PulseTrain:
    """``count`` ideal rectangular pulses; pulse k spans [k*period, k*period + width)."""

    amplitude: float
    width: float
    period: float
    count: int
    baseline: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "width", "period", "baseline"):
            _check_number(name, getattr(self, name))
        if not self.width > 0:
            raise ValidationError("width", "must be > 0")
        if not self.period >= self.width:
            raise ValidationError("period", "period ≥ width")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 1:
            raise ValidationError("count", "must be an integer ≥ 1")

    @property
    def duration(self) -> float:
        return self.count * self.period


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    method: Method = Method.RK4
    record_stride: int = 1

    def __post_init__(self):
        _check_number("dt", self.dt)
        if not self.dt > 0:
            raise ValidationError("dt", "must be > 0")
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ValidationError("method", "must be 'euler' or 'rk4'") from None
        stride = self.record_stride
        if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
            raise ValidationError("record_stride", "must be an integer ≥ 1")

    def check_resolution(self, stim: PulseTrain) -> None:
        """Raise unless ``dt`` resolves each pulse with at least ten steps."""
        if self.dt > stim.width / 10 * (1 + 1e-12):
            raise ValidationError("dt", "dt ≤ width/10")


class Terminals(str, enum.Enum):
    T12 = "T12"
    T23 = "T23"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled transient result.

    ``x2`` and ``m2`` are ``None`` for a single device.  ``q`` is the one
    charge column shared by both series devices.
    """

    t: np.ndarray
    v: np.ndarray
    i: np.ndarray
    x1: np.ndarray
    m1: np.ndarray
    x2: np.ndarray | None
    m2: np.ndarray | None
    m_total: np.ndarray
    q: np.ndarray
    topology: Topology
    stimulus: PulseTrain
    solver: SolverConfig
    meta: dict = field(default_factory=dict)

    COLUMNS = ("t", "v", "i", "x1", "m1", "x2", "m2", "m_total", "q")

    def __len__(self):
        return len(self.t)

    @property
    def sample_interval(self) -> float:
        return self.solver.dt * self.solver.record_stride

    def columns(self) -> dict[str, np.ndarray | None]:
        return {name: getattr(self, name) for name in self.COLUMNS}


def source_voltage_at(stim: PulseTrain, t):
    """Source voltage at time(s) ``t``; accepts a scalar or an array."""
    t_arr = np.asarray(t, dtype=float)
    k = np.floor(t_arr / stim.period + _EDGE)
    phase = t_arr - k * stim.period
    on = (k >= 0) & (k < stim.count) & (phase < stim.width - _EDGE * stim.period)
    v = np.where(on, float(stim.amplitude), float(stim.baseline))
    if v.ndim == 0:
        return float(v)
    return v


def _resistances(top: Topology, states: Sequence[MemristorState]) -> list[float]:
    devices = top.devices
    if len(states) != len(devices):
        raise ValueError(f"expected {len(devices)} states, got {len(states)}")
    return [memristance(p, s) for p, s in zip(devices, states)]


def instantaneous_current(top: Topology, states: Sequence[MemristorState], v: float) -> float:
    """Ohm's law on the resistive snapshot; series devices carry the same current."""
    return v / sum(_resistances(top, states))


def readout_resistance(
    top: Topology, states: Sequence[MemristorState], terminals: Terminals | str
) -> float:
    """Resistance seen between a pair of terminals.

    T12 is the update path (the whole series stack); T23 reads ``m1``
    alone, which is the synaptic weight.
    """
    terminals = Terminals(terminals)
    rs = _resistances(top, states)
    if terminals is Terminals.T12:
        return sum(rs)
    if isinstance(top, Single):
        raise InvalidTerminals("terminals 2-3 only exist on a series pair")
    return rs[0]


def simulate(top: Topology, stim: PulseTrain, solver: SolverConfig) -> Trajectory:
    """Run the fixed-step transient over ``stim.count * stim.period`` seconds."""
    solver.check_resolution(stim)
    dt = solver.dt
    stride = solver.record_stride
    n_steps = max(1, int(math.ceil(stim.duration / dt - 1e-9)))
    times = np.arange(n_steps + 1) * dt
    volts = source_voltage_at(stim, times).tolist()
    rk4 = solver.method is Method.RK4

    devices = top.devices
    consts = [
        (p.r_off, p.delta_r, p.polarity, p.q0, p.model is Model.BIOLEK, 2 * p.window_p)
        for p in devices
    ]
    xs = [initial_state(p).x for p in devices]
    q = 0.0

    rec_v, rec_i, rec_q = [], [], []
    rec_x = [[] for _ in devices]
    rec_m = [[] for _ in devices]
    rec_mt = []

    for k in range(n_steps + 1):
        v = volts[k]
        ms = [r_off - dr * x for (r_off, dr, *_), x in zip(consts, xs)]
        m_total = sum(ms)
        i = v / m_total
        if k % stride == 0:
            rec_v.append(v)
            rec_i.append(i)
            rec_q.append(q)
            rec_mt.append(m_total)
            for j, (x, m) in enumerate(zip(xs, ms)):
                rec_x[j].append(x)
                rec_m[j].append(m)
        if k == n_steps:
            break
        if not math.isfinite(i):
            raise NonFiniteState(f"current became {i!r} at t={times[k]!r}")
        xs = [
            _advance_x(x, i, dt, pol, q0, biolek, expo, rk4)
            for x, (_, _, pol, q0, biolek, expo) in zip(xs, consts)
        ]
        q += i * dt
        if not math.isfinite(q):
            raise NonFiniteState(f"q became {q!r} at t={times[k]!r}")

    def arr(values):
        a = np.asarray(values, dtype=float)
        a.flags.writeable = False
        return a

    pair = len(devices) == 2
    return Trajectory(
        t=arr(times[::stride]),
        v=arr(rec_v),
        i=arr(rec_i),
        x1=arr(rec_x[0]),
        m1=arr(rec_m[0]),
        x2=arr(rec_x[1]) if pair else None,
        m2=arr(rec_m[1]) if pair else None,
        m_total=arr(rec_mt),
        q=arr(rec_q),
        topology=top,
        stimulus=stim,
        solver=solver,
        meta={"pulse_shape": "rectangular", "window_p": [p.window_p for p in devices]},
    )
