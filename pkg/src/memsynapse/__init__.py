"""Transient simulation of memristor synapses.

A lone memristor driven by identical pulses updates faster and faster,
while two series memristors of opposite polarity with a small swing ratio
``alpha = dR1 / dR2`` update quickly at first and then settle.
"""

__version__ = "0.1.0"

from .analysis import (
    PulseDeltaSeries,
    Regime,
    alpha,
    classify_regime,
    linearity_r2,
    oracle_series_const_v,
    oracle_single_const_v,
    per_pulse_deltas,
)
from .circuit import (
    PulseTrain,
    SeriesPair,
    Single,
    SolverConfig,
    Terminals,
    Trajectory,
    instantaneous_current,
    readout_resistance,
    simulate,
    source_voltage_at,
)
from .device import (
    MemristorParams,
    MemristorState,
    Method,
    Model,
    delta_r,
    initial_state,
    memristance,
    state_derivative,
    step_state,
    window,
)
from .expfile import Experiment, parse_experiment, preset, serialize_experiment

__all__ = [
    "PulseDeltaSeries",
    "Regime",
    "alpha",
    "classify_regime",
    "linearity_r2",
    "oracle_series_const_v",
    "oracle_single_const_v",
    "per_pulse_deltas",
    "PulseTrain",
    "SeriesPair",
    "Single",
    "SolverConfig",
    "Terminals",
    "Trajectory",
    "instantaneous_current",
    "readout_resistance",
    "simulate",
    "source_voltage_at",
    "MemristorParams",
    "MemristorState",
    "Method",
    "Model",
    "delta_r",
    "initial_state",
    "memristance",
    "state_derivative",
    "step_state",
    "window",
    "Experiment",
    "parse_experiment",
    "preset",
    "serialize_experiment",
]
