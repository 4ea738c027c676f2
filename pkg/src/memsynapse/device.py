"""Memristor device models.

The internal state is the normalised dopant boundary position ``x`` in
[0, 1] together with the signed charge ``q`` that has passed through the
device.  ``x = 0`` corresponds to the fully undoped device (``r_off``) and
``x = 1`` to the fully doped one (``r_on``)::

    M(x) = r_off - (r_off - r_on) * x

    dx/dt = polarity * i / q0 * window(x, polarity * i)

``q0`` is the charge needed to sweep the boundary over the full device
length, so dopant mobility and device length never appear separately.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import NonFiniteState, ValidationError

__all__ = [
    "Model",
    "Method",
    "MemristorParams",
    "MemristorState",
    "delta_r",
    "initial_state",
    "memristance",
    "window",
    "state_derivative",
    "step_state",
]


class Model(str, enum.Enum):
    LINEAR = "linear"
    BIOLEK = "biolek"


class Method(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class MemristorParams:
    """Static parameters of one memristor.

    Parameters
    ----------
    r_on, r_off : float
        Minimum and maximum memristance (ohm).
    r_init : float
        Memristance at t = 0 (ohm).
    q0 : float
        Charge (C) that moves the dopant boundary across the whole device.
    polarity : int
        +1 when positive current lowers the memristance, -1 otherwise.
    model : Model
        Linear ion drift, or linear drift shaped by the Biolek window.
    window_p : int
        Biolek window exponent; ignored by the linear model.
    """

    r_on: float
    r_off: float
    r_init: float
    q0: float
    polarity: int = 1
    model: Model = Model.LINEAR
    window_p: int = 2

    def __post_init__(self):
        for name in ("r_on", "r_off", "r_init", "q0"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(name, "must be a number")
            if not math.isfinite(value):
                raise ValidationError(name, "must be finite")
        if not self.r_on > 0:
            raise ValidationError("r_on", "must be > 0")
        if not self.r_on < self.r_off:
            raise ValidationError("r_off", "r_on < r_off")
        if not self.r_on <= self.r_init <= self.r_off:
            raise ValidationError("r_init", "r_on ≤ r_init ≤ r_off")
        if not self.q0 > 0:
            raise ValidationError("q0", "must be > 0")
        if isinstance(self.polarity, bool) or self.polarity not in (1, -1):
            raise ValidationError("polarity", "must be +1 or -1")
        try:
            object.__setattr__(self, "model", Model(self.model))
        except ValueError:
            raise ValidationError("model", "must be 'linear' or 'biolek'") from None
        if (
            isinstance(self.window_p, bool)
            or not isinstance(self.window_p, int)
            or self.window_p < 1
        ):
            raise ValidationError("window_p", "must be an integer ≥ 1")

    @property
    def delta_r(self) -> float:
        return self.r_off - self.r_on


@dataclass
class MemristorState:
    x: float
    q: float = 0.0


def delta_r(params: MemristorParams) -> float:
    """Memristance swing ``r_off - r_on`` (exact, no ``≃ r_off`` shortcut)."""
    return params.r_off - params.r_on


def initial_state(params: MemristorParams) -> MemristorState:
    return MemristorState(x=(params.r_off - params.r_init) / delta_r(params), q=0.0)


def memristance(params: MemristorParams, state: MemristorState) -> float:
    return params.r_off - delta_r(params) * state.x


def _biolek_offset(device_current: float) -> float:
    # step(-i) with step(0) = 1
    return 1.0 if -device_current >= 0 else 0.0


def window(params: MemristorParams, state: MemristorState, current: float) -> float:
    """Window factor multiplying the drift rate.

    ``current`` is the terminal current.  A device with polarity -1 is
    wired backwards, so the Biolek step function is evaluated on the
    current in the device's own orientation, ``polarity * current``.
    This makes the window vanish at the boundary the state is moving
    towards for either polarity.
    """
    if params.model is Model.LINEAR:
        return 1.0
    b = _biolek_offset(params.polarity * current)
    return 1.0 - (state.x - b) ** (2 * params.window_p)


def state_derivative(
    params: MemristorParams, state: MemristorState, current: float
) -> tuple[float, float]:
    """Return ``(dx/dt, dq/dt)`` for the given terminal current."""
    dxdt = params.polarity * current / params.q0 * window(params, state, current)
    return dxdt, current


def _unit(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def _advance_x(
    x: float,
    current: float,
    dt: float,
    polarity: int,
    q0: float,
    biolek: bool,
    exponent: int,
    rk4: bool,
) -> float:
    """One step of the boundary position with the current held fixed.

    Hot path of the transient solver, hence the flat scalar arguments.
    ``exponent`` is the full Biolek power ``2 * window_p``.
    """
    device_current = polarity * current
    if device_current == 0.0:
        return x
    gain = device_current / q0
    if not biolek:
        x_new = x + gain * dt
    else:
        b = 1.0 if device_current < 0 else 0.0
        if rk4:
            # stage states are pulled back into [0, 1] so every window value
            # stays in [0, 1] and the increment lies between 0 and gain*dt
            h = dt * gain
            k1 = 1.0 - (x - b) ** exponent
            k2 = 1.0 - (_unit(x + 0.5 * h * k1) - b) ** exponent
            k3 = 1.0 - (_unit(x + 0.5 * h * k2) - b) ** exponent
            k4 = 1.0 - (_unit(x + h * k3) - b) ** exponent
            x_new = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        else:
            x_new = x + dt * gain * (1.0 - (x - b) ** exponent)
    if not math.isfinite(x_new):
        raise NonFiniteState(f"x became {x_new!r} (current={current!r}, dt={dt!r})")
    if x_new < 0.0:
        return 0.0
    if x_new > 1.0:
        return 1.0
    return x_new


def step_state(
    params: MemristorParams,
    state: MemristorState,
    current: float,
    dt: float,
    method: Method | str = Method.RK4,
) -> MemristorState:
    """Advance ``state`` by ``dt`` with ``current`` held constant over the step.

    ``q`` advances by exactly ``current * dt``; ``x`` is clamped to [0, 1].
    For the linear model both methods coincide, since the rate does not
    depend on ``x`` once the current is frozen.
    """
    if not dt > 0:
        raise ValidationError("dt", "must be > 0")
    method = Method(method)
    if not math.isfinite(current):
        raise NonFiniteState(f"current is {current!r}")
    x = _advance_x(
        state.x,
        current,
        dt,
        params.polarity,
        params.q0,
        params.model is Model.BIOLEK,
        2 * params.window_p,
        method is Method.RK4,
    )
    q = state.q + current * dt
    if not math.isfinite(q):
        raise NonFiniteState(f"q became {q!r}")
    return MemristorState(x=x, q=q)
