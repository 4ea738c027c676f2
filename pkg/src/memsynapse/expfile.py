"""Experiment description files and the built-in presets.

The format is line oriented::

    # comment
    [circuit]
    topology = series          # single | series
    label = alpha_one

    [device M1]
    model = biolek             # linear | biolek
    window_p = 2               # optional, default 2
    polarity = +1
    r_on = 100
    r_off = 400k
    r_init = 399k
    q0 = 400n

    [device M2]
    ...

    [stimulus]
    amplitude = 1
    width = 1m
    period = 2m
    count = 50
    baseline = 0               # optional, default 0

    [solver]
    dt = 10u
    method = rk4               # optional, default rk4 (or euler)
    record_stride = 1          # optional, default 1

Numbers accept the case-sensitive SI suffixes k, M, m, u and n.  Unknown
sections and keys are errors.  See ``docs/experiment-format.md`` for the
full grammar.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

from .circuit import PulseTrain, SeriesPair, Single, SolverConfig, Topology
from .device import MemristorParams, Method, Model
from .errors import (
    DuplicateKeyError,
    ExperimentSyntaxError,
    MissingSectionError,
    UnknownPreset,
    ValidationError,
)

__all__ = [
    "Experiment",
    "parse_experiment",
    "serialize_experiment",
    "load_experiment",
    "preset",
    "PRESET_NAMES",
    "DEFAULT_Q0",
    "default_stimulus",
    "default_solver",
    "with_overrides",
    "parse_number",
    "format_number",
]

SI_SUFFIXES = {"k": 1e3, "M": 1e6, "m": 1e-3, "u": 1e-6, "n": 1e-9}
_SI_EXPONENTS = {"": 0, "k": 3, "M": 6, "m": -3, "u": -6, "n": -9}

_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([kMmun]?)$")
_SECTION = re.compile(r"^\[\s*([^\]]*?)\s*\]$")
_KEY_VALUE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

_DEVICE_KEYS = ("model", "window_p", "polarity", "r_on", "r_off", "r_init", "q0")
_SECTION_KEYS = {
    "circuit": ("topology", "label"),
    "device M1": _DEVICE_KEYS,
    "device M2": _DEVICE_KEYS,
    "stimulus": ("amplitude", "width", "period", "count", "baseline"),
    "solver": ("dt", "method", "record_stride"),
}

DEFAULT_Q0 = 4e-7


@dataclass(frozen=True)
class Experiment:
    topology: Topology
    stimulus: PulseTrain
    solver: SolverConfig
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.topology, (Single, SeriesPair)):
            raise ValidationError("topology", "must be Single or SeriesPair")
        if "\n" in self.label or "#" in self.label or self.label != self.label.strip():
            raise ValidationError("label", "single line, no '#', no surrounding blanks")
        self.solver.check_resolution(self.stimulus)

    @property
    def devices(self) -> tuple[MemristorParams, ...]:
        return self.topology.devices


# -- numbers ---------------------------------------------------------------


def parse_number(text: str) -> float:
    """Parse a decimal number with an optional SI suffix; raises ValueError."""
    match = _NUMBER.match(text.strip())
    if match is None:
        raise ValueError(f"not a number: {text!r}")
    mantissa, suffix = match.groups()
    # fold the suffix into the decimal exponent: "0.4u" is read as 0.4e-6,
    # rounded once, never as 0.4 * 1e-6
    digits, _, exponent = mantissa.lower().partition("e")
    return float(f"{digits}e{int(exponent or 0) + _SI_EXPONENTS[suffix]}")


def _candidates(value: float, suffix: str, scale: float):
    scaled = value / scale
    for digits in range(1, 18):
        text = f"{scaled:.{digits}g}"
        if "e" in text or "inf" in text or "nan" in text:
            continue
        yield text + suffix


def format_number(value: float) -> str:
    """Shortest text that :func:`parse_number` maps back to exactly ``value``."""
    best = repr(float(value))
    if best.endswith(".0"):
        best = best[:-2]
    for suffix, scale in [("", 1.0), *SI_SUFFIXES.items()]:
        for candidate in _candidates(value, suffix, scale):
            if parse_number(candidate) == value:
                if len(candidate) < len(best):
                    best = candidate
                break
    return best


# -- parsing ---------------------------------------------------------------


class _Section:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.values: dict[str, tuple[str, int]] = {}

    def line_of(self, key: str) -> int:
        return self.values[key][1] if key in self.values else self.line

    def raw(self, key: str, default: str | None = None) -> str:
        if key in self.values:
            return self.values[key][0]
        if default is None:
            raise ValidationError(key, f"required in [{self.name}]", self.line)
        return default

    def number(self, key: str, default: str | None = None) -> float:
        text = self.raw(key, default)
        try:
            return parse_number(text)
        except ValueError:
            raise ValidationError(key, f"not a number: {text!r}", self.line_of(key)) from None

    def integer(self, key: str, default: str | None = None) -> int:
        value = self.number(key, default)
        if value != int(value):
            raise ValidationError(key, "must be an integer", self.line_of(key))
        return int(value)

    def choice(self, key: str, options, default: str | None = None) -> str:
        text = self.raw(key, default)
        if text not in options:
            raise ValidationError(
                key, "must be one of " + ", ".join(options), self.line_of(key)
            )
        return text


def _tokenize(text: str) -> dict[str, _Section]:
    sections: dict[str, _Section] = {}
    current: _Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        header = _SECTION.match(line)
        if header:
            name = " ".join(header.group(1).split())
            if name not in _SECTION_KEYS:
                raise ExperimentSyntaxError(lineno, f"unknown section [{header.group(1)}]")
            if name in sections:
                raise DuplicateKeyError(lineno, f"duplicate section [{name}]")
            current = sections[name] = _Section(name, lineno)
            continue
        pair = _KEY_VALUE.match(line)
        if pair is None:
            raise ExperimentSyntaxError(lineno, f"expected 'key = value' or '[section]': {raw.strip()!r}")
        if current is None:
            raise ExperimentSyntaxError(lineno, "key outside of any section")
        key, value = pair.group(1), pair.group(2).strip()
        if key not in _SECTION_KEYS[current.name]:
            raise ExperimentSyntaxError(lineno, f"unknown key {key!r} in [{current.name}]")
        if key in current.values:
            raise DuplicateKeyError(lineno, f"duplicate key {key!r} in [{current.name}]")
        current.values[key] = (value, lineno)
    return sections


def _build(section: _Section, build):
    """Run a constructor, pinning any ValidationError to the offending line."""
    try:
        return build()
    except ValidationError as exc:
        if exc.line is None:
            raise ValidationError(exc.field, exc.constraint, section.line_of(exc.field)) from None
        raise


def _device(section: _Section) -> MemristorParams:
    polarity = section.integer("polarity")
    return _build(
        section,
        lambda: MemristorParams(
            r_on=section.number("r_on"),
            r_off=section.number("r_off"),
            r_init=section.number("r_init"),
            q0=section.number("q0"),
            polarity=polarity,
            model=Model(section.choice("model", [m.value for m in Model])),
            window_p=section.integer("window_p", "2"),
        ),
    )


def _require(sections: dict[str, _Section], name: str, last_line: int) -> _Section:
    if name not in sections:
        raise MissingSectionError(last_line, f"missing section [{name}]")
    return sections[name]


def parse_experiment(text: str) -> Experiment:
    """Parse and fully validate an experiment description."""
    sections = _tokenize(text)
    last_line = max(1, len(text.splitlines()))

    circuit = _require(sections, "circuit", last_line)
    kind = circuit.choice("topology", ["single", "series"])
    label = circuit.raw("label", "")

    m1 = _device(_require(sections, "device M1", last_line))
    if kind == "single":
        if "device M2" in sections:
            raise ValidationError(
                "topology", "single topology takes one device", sections["device M2"].line
            )
        topology: Topology = Single(m1)
    else:
        m2_section = _require(sections, "device M2", last_line)
        m2 = _device(m2_section)
        topology = _build(m2_section, lambda: SeriesPair(m1, m2))

    stim_section = _require(sections, "stimulus", last_line)
    stimulus = _build(
        stim_section,
        lambda: PulseTrain(
            amplitude=stim_section.number("amplitude"),
            width=stim_section.number("width"),
            period=stim_section.number("period"),
            count=stim_section.integer("count"),
            baseline=stim_section.number("baseline", "0"),
        ),
    )

    solver_section = _require(sections, "solver", last_line)
    solver = _build(
        solver_section,
        lambda: SolverConfig(
            dt=solver_section.number("dt"),
            method=Method(solver_section.choice("method", [m.value for m in Method], "rk4")),
            record_stride=solver_section.integer("record_stride", "1"),
        ),
    )

    try:
        return Experiment(topology=topology, stimulus=stimulus, solver=solver, label=label)
    except ValidationError as exc:
        owner = circuit if exc.field == "label" else solver_section
        raise ValidationError(exc.field, exc.constraint, owner.line_of(exc.field)) from None


def load_experiment(path) -> Experiment:
    with open(path, encoding="utf-8") as fh:
        return parse_experiment(fh.read())


# -- serialisation ---------------------------------------------------------


def _device_lines(name: str, p: MemristorParams) -> list[str]:
    return [
        f"[device {name}]",
        f"model = {p.model.value}",
        f"window_p = {p.window_p}",
        f"polarity = {p.polarity:+d}",
        f"r_on = {format_number(p.r_on)}",
        f"r_off = {format_number(p.r_off)}",
        f"r_init = {format_number(p.r_init)}",
        f"q0 = {format_number(p.q0)}",
    ]


def serialize_experiment(exp: Experiment) -> str:
    """Render ``exp`` with every default written out explicitly."""
    top = exp.topology
    lines = [
        "[circuit]",
        f"topology = {'single' if isinstance(top, Single) else 'series'}",
        f"label = {exp.label}",
        "",
    ]
    for name, device in zip(("M1", "M2"), top.devices):
        lines += _device_lines(name, device) + [""]
    s = exp.stimulus
    lines += [
        "[stimulus]",
        f"amplitude = {format_number(s.amplitude)}",
        f"width = {format_number(s.width)}",
        f"period = {format_number(s.period)}",
        f"count = {s.count}",
        f"baseline = {format_number(s.baseline)}",
        "",
        "[solver]",
        f"dt = {format_number(exp.solver.dt)}",
        f"method = {exp.solver.method.value}",
        f"record_stride = {exp.solver.record_stride}",
    ]
    return "\n".join(lines) + "\n"


# -- presets ---------------------------------------------------------------


def default_stimulus() -> PulseTrain:
    return PulseTrain(amplitude=1.0, width=1e-3, period=2e-3, count=50, baseline=0.0)


def default_solver() -> SolverConfig:
    return SolverConfig(dt=1e-5, method=Method.RK4, record_stride=1)


def _pair(r_init, r_on, r_off) -> SeriesPair:
    devices = [
        MemristorParams(
            r_on=r_on[j],
            r_off=r_off[j],
            r_init=r_init[j],
            q0=DEFAULT_Q0,
            polarity=(1, -1)[j],
            model=Model.BIOLEK,
            window_p=2,
        )
        for j in range(2)
    ]
    return SeriesPair(*devices)


def _topologies() -> dict[str, Topology]:
    return {
        "alpha_small": _pair([9e3, 9e3], [100.0, 100.0], [10e3, 1e6]),
        "alpha_one": _pair([399e3, 1e3], [100.0, 100.0], [400e3, 400e3]),
        "alpha_large": _pair([950e3, 1e3], [100.0, 100.0], [1e6, 10e3]),
        "single_fig1": Single(
            MemristorParams(
                r_on=100.0,
                r_off=100e3,
                r_init=100e3,
                q0=DEFAULT_Q0,
                polarity=1,
                model=Model.BIOLEK,
                window_p=2,
            )
        ),
    }


PRESET_NAMES = ("alpha_small", "alpha_one", "alpha_large", "single_fig1")


def preset(name: str) -> Experiment:
    """Built-in experiment: the three series pairs of the ratio study or the lone device."""
    topologies = _topologies()
    if name not in topologies:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return Experiment(
        topology=topologies[name],
        stimulus=default_stimulus(),
        solver=default_solver(),
        label=name,
    )


def with_overrides(
    exp: Experiment,
    dt: float | None = None,
    pulses: int | None = None,
    amplitude: float | None = None,
    model: Model | str | None = None,
    q0: float | None = None,
) -> Experiment:
    """Copy of ``exp`` with selected settings replaced and re-validated."""
    stimulus, solver, topology = exp.stimulus, exp.solver, exp.topology
    if pulses is not None:
        stimulus = dataclasses.replace(stimulus, count=pulses)
    if amplitude is not None:
        stimulus = dataclasses.replace(stimulus, amplitude=amplitude)
    if dt is not None:
        solver = dataclasses.replace(solver, dt=dt)
    if model is not None or q0 is not None:
        changes = {}
        if model is not None:
            changes["model"] = Model(model)
        if q0 is not None:
            changes["q0"] = q0
        devices = [dataclasses.replace(p, **changes) for p in topology.devices]
        topology = Single(*devices) if isinstance(topology, Single) else SeriesPair(*devices)
    return dataclasses.replace(exp, topology=topology, stimulus=stimulus, solver=solver)
