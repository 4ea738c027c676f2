"""Per-pulse weight-update analysis, regime classification and analytic oracles."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .circuit import PulseTrain, SolverConfig, Trajectory, simulate
from .device import MemristorParams, Method, Model, delta_r
from .errors import (
    OutOfValidity,
    StimulusMismatch,
    TooFewPulses,
    TooFewSamples,
    ValidationError,
)

__all__ = [
    "PulseDeltaSeries",
    "Regime",
    "per_pulse_deltas",
    "classify_regime",
    "alpha",
    "oracle_single_const_v",
    "oracle_series_const_v",
    "linearity_r2",
    "presaturation_window",
    "oracle_deviation",
    "oracle_run",
    "ORACLE_Q0",
    "DEFAULT_TOL_REL",
    "DEFAULT_FLOOR_REL",
    "DEFAULT_SAT_MARGIN",
]

DEFAULT_TOL_REL = 0.05
DEFAULT_FLOOR_REL = 1e-3
# a pulse counts as saturated once a device ends it this close (in x) to
# the boundary it is being driven towards
DEFAULT_SAT_MARGIN = 0.05


class Regime(str, enum.Enum):
    ACCELERATING = "Accelerating"
    LINEAR = "Linear"
    DECELERATING = "Decelerating"
    SATURATED = "Saturated"
    MIXED = "Mixed"


@dataclass(frozen=True)
class PulseDeltaSeries:
    """Change of ``m1`` across each pulse window.

    ``saturated[k]`` is set from pulse k onwards once any device has been
    driven into its boundary layer; deltas of such pulses are still listed.
    """

    pulse_index: tuple[int, ...]
    delta_m1: tuple[float, ...]
    saturated: tuple[bool, ...]

    def __len__(self):
        return len(self.delta_m1)

    def active(self, floor_rel: float = DEFAULT_FLOOR_REL) -> list[float]:
        """Leading run of ``|delta|`` values before saturation sets in."""
        mags = [abs(d) for d in self.delta_m1]
        if not mags:
            return []
        floor = floor_rel * mags[0]
        out = []
        for mag, sat in zip(mags, self.saturated):
            if sat or mag == 0.0 or mag < floor:
                break
            out.append(mag)
        return out


def _nearest(traj: Trajectory, t: float) -> int:
    k = int(round((t - traj.t[0]) / traj.sample_interval))
    return min(max(k, 0), len(traj.t) - 1)


def _entered_boundary(x_start: float, x_end: float, margin: float) -> bool:
    if x_end == x_start:
        return x_end <= 0.0 or x_end >= 1.0
    if x_end > x_start:
        return x_end >= 1.0 - margin
    return x_end <= margin


def per_pulse_deltas(
    traj: Trajectory, stim: PulseTrain, sat_margin: float = DEFAULT_SAT_MARGIN
) -> PulseDeltaSeries:
    """delta_k = m1(end of pulse k) - m1(start of pulse k), nearest samples."""
    if len(traj.t) < 2 or traj.t[-1] < stim.duration - traj.sample_interval * (1 + 1e-9):
        raise StimulusMismatch(
            f"trajectory ends at {traj.t[-1]!r} s, stimulus needs {stim.duration!r} s"
        )
    xs = [traj.x1] + ([traj.x2] if traj.x2 is not None else [])
    deltas, flags = [], []
    saturated = False
    for k in range(stim.count):
        a = _nearest(traj, k * stim.period)
        b = _nearest(traj, k * stim.period + stim.width)
        deltas.append(float(traj.m1[b] - traj.m1[a]))
        if not saturated:
            saturated = any(_entered_boundary(x[a], x[b], sat_margin) for x in xs)
        flags.append(saturated)
    return PulseDeltaSeries(tuple(range(stim.count)), tuple(deltas), tuple(flags))


def classify_regime(
    series: PulseDeltaSeries,
    tol_rel: float = DEFAULT_TOL_REL,
    floor_rel: float = DEFAULT_FLOOR_REL,
) -> Regime:
    """Classify how the per-pulse update magnitude evolves before saturation.

    Linear when every ``|delta|`` lies within ``tol_rel`` of the mean,
    otherwise Accelerating / Decelerating for a strictly monotone sequence
    and Mixed for anything else.  A series with no usable pulse at all is
    Saturated.
    """
    mags = series.active(floor_rel)
    if not mags:
        return Regime.SATURATED
    if len(mags) < 3:
        raise TooFewPulses(f"need ≥ 3 non-saturated pulses, got {len(mags)}")
    mean = sum(mags) / len(mags)
    if all(abs(m - mean) <= tol_rel * mean for m in mags):
        return Regime.LINEAR
    steps = np.diff(mags)
    if np.all(steps > 0):
        return Regime.ACCELERATING
    if np.all(steps < 0):
        return Regime.DECELERATING
    return Regime.MIXED


def alpha(m1: MemristorParams, m2: MemristorParams) -> float:
    return delta_r(m1) / delta_r(m2)


def presaturation_window(traj: Trajectory, stim: PulseTrain, series: PulseDeltaSeries):
    """Time range from t = 0 to the end of the last non-saturated pulse."""
    n = sum(1 for s in series.saturated if not s)
    if n == 0:
        return (0.0, 0.0)
    if n == len(series):
        return (0.0, float(traj.t[-1]))
    return (0.0, (n - 1) * stim.period + stim.width)


def _require_linear(*devices: MemristorParams):
    for p in devices:
        if p.model is not Model.LINEAR:
            raise ValidationError("model", "closed-form oracles need the linear model")


def oracle_single_const_v(params: MemristorParams, v: float, t):
    """Memristance of a lone linear-drift device under a constant voltage.

    M dM = -polarity * delta_r * v / q0 dt integrates to
    M(t) = sqrt(r_init**2 - 2 * polarity * delta_r * v * t / q0).
    Accepts scalar or array ``t``.
    """
    _require_linear(params)
    t_arr = np.asarray(t, dtype=float)
    radicand = params.r_init**2 - 2.0 * params.polarity * delta_r(params) * v * t_arr / params.q0
    if np.any(radicand < params.r_on**2) or np.any(radicand > params.r_off**2):
        raise OutOfValidity("device reaches a memristance bound within the requested time")
    m = np.sqrt(radicand)
    return float(m) if m.ndim == 0 else m


def oracle_series_const_v(m1: MemristorParams, m2: MemristorParams, v: float, t):
    """Total and ``m1`` memristance of a linear-drift series pair at constant voltage.

    With k = polarity * (dR1 - dR2) / q0 the total memristance is
    R0 - k q, charge obeys R0 q - k q**2 / 2 = v t, hence
    m_total = sqrt(R0**2 - 2 k v t) and m1 = r_init1 - polarity * dR1 * q / q0.
    """
    _require_linear(m1, m2)
    if m1.q0 != m2.q0:
        raise ValidationError("q0", "series oracle needs equal q0 on both devices")
    if m1.polarity != -m2.polarity:
        raise ValidationError("polarity", "series devices need opposite polarities")
    eta = m1.polarity
    q0 = m1.q0
    r0 = m1.r_init + m2.r_init
    k = eta * (delta_r(m1) - delta_r(m2)) / q0
    t_arr = np.asarray(t, dtype=float)
    radicand = r0 * r0 - 2.0 * k * v * t_arr
    if np.any(radicand < 0):
        raise OutOfValidity("total memristance would vanish")
    m_total = np.sqrt(radicand)
    # stable root of k q**2 / 2 - r0 q + v t = 0, also valid for k = 0
    q = 2.0 * v * t_arr / (r0 + m_total)
    r1 = m1.r_init - eta * delta_r(m1) * q / q0
    r2 = m2.r_init + eta * delta_r(m2) * q / q0
    if (
        np.any(r1 < m1.r_on) or np.any(r1 > m1.r_off)
        or np.any(r2 < m2.r_on) or np.any(r2 > m2.r_off)
    ):
        raise OutOfValidity("a device reaches a memristance bound within the requested time")
    if m_total.ndim == 0:
        return float(m_total), float(r1)
    return m_total, r1


def linearity_r2(traj: Trajectory, column: str = "m1", window=None) -> float:
    """Coefficient of determination of a least-squares line through ``column(t)``.

    Zero-variance data is perfectly fit by a line and yields 1.0.
    """
    y_all = getattr(traj, column)
    if y_all is None:
        raise ValueError(f"trajectory has no {column!r} column")
    t = traj.t
    if window is not None:
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
        t, y = t[mask], y_all[mask]
    else:
        y = y_all
    if len(t) < 10:
        raise TooFewSamples(f"need ≥ 10 samples, got {len(t)}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0 or math.isclose(float(y.max()), float(y.min()), rel_tol=1e-15):
        return 1.0
    slope, intercept = np.polyfit(t, y, 1)
    ss_res = float(np.sum((y - (slope * t + intercept)) ** 2))
    return max(0.0, 1.0 - ss_res / ss_tot)


# default charge constant for oracle checks: far enough from saturation that
# 0.5 s of 1 V drive stays clear of every memristance bound
ORACLE_Q0 = 1e-2


def _clamp_free_count(traj: Trajectory) -> int:
    """Number of leading samples before any device touches 0 or 1."""
    xs = [traj.x1] + ([traj.x2] if traj.x2 is not None else [])
    hit = np.zeros(len(traj.t), dtype=bool)
    for x in xs:
        hit |= (x <= 0.0) | (x >= 1.0)
    # a device may legitimately start on a bound and move away from it
    hit[0] = False
    idx = np.flatnonzero(hit)
    return int(idx[0]) if idx.size else len(traj.t)


def oracle_deviation(traj: Trajectory, v: float) -> tuple[float, int]:
    """Largest relative gap between ``traj`` and the matching closed form.

    ``traj`` must come from a constant drive ``v`` on linear-drift devices.
    Only samples before the first clamp event and inside the oracle's range
    of validity are compared; returns ``(max_rel_dev, samples_compared)``.
    """
    n = _clamp_free_count(traj)
    devices = traj.topology.devices

    def evaluate(count):
        t = traj.t[:count]
        if len(devices) == 1:
            return (oracle_single_const_v(devices[0], v, t),)
        return oracle_series_const_v(devices[0], devices[1], v, t)

    # validity is monotone in time: bisect for the longest valid prefix
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            evaluate(mid)
            lo = mid
        except OutOfValidity:
            hi = mid - 1
    if lo == 0:
        return 0.0, 0
    expected = evaluate(lo)
    observed = (traj.m1[:lo],) if len(devices) == 1 else (traj.m_total[:lo], traj.m1[:lo])
    worst = max(float(np.max(np.abs(o - e) / np.abs(e))) for o, e in zip(observed, expected))
    return worst, lo


def oracle_run(topology, v: float = 1.0, duration: float = 0.5, dt: float = 1e-6):
    """Simulate ``topology`` under a constant drive of ``v`` volts with Euler steps."""
    stim = PulseTrain(amplitude=v, width=duration, period=duration, count=1)
    return simulate(topology, stim, SolverConfig(dt=dt, method=Method.EULER))
