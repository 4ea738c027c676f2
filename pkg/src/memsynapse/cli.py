"""Command-line interface.

    memsynapse [--dt DT] [--pulses N] [--amplitude V] run EXP [-o CSV]
    memsynapse analyze CSV
    memsynapse verify PRESET
    memsynapse preset [NAME]

Exit codes: 0 success, 1 bad input, 2 simulation failure, 3 oracle mismatch.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .analysis import (
    DEFAULT_TOL_REL,
    ORACLE_Q0,
    Regime,
    alpha,
    classify_regime,
    linearity_r2,
    oracle_deviation,
    oracle_run,
    per_pulse_deltas,
    presaturation_window,
)
from .circuit import SeriesPair, simulate
from .device import Model
from .errors import (
    ExperimentFileError,
    MemsynapseError,
    NonFiniteState,
    TooFewPulses,
    TooFewSamples,
    UnknownPreset,
    ValidationError,
)
from .expfile import (
    PRESET_NAMES,
    Experiment,
    load_experiment,
    parse_number,
    preset,
    serialize_experiment,
    with_overrides,
)
from .trajio import CsvFormatError, format_csv, read_csv

EXIT_OK, EXIT_INPUT, EXIT_SIMULATION, EXIT_TOLERANCE = 0, 1, 2, 3
VERIFY_TOLERANCE = 1e-4


def _number(text):
    try:
        return parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _count(text):
    value = _number(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _err(message):
    print(f"memsynapse: error: {message}", file=sys.stderr)


def _overrides(args) -> dict:
    return {"dt": args.dt, "pulses": args.pulses, "amplitude": args.amplitude}


def cmd_run(args) -> int:
    try:
        if args.preset:
            exp = preset(args.preset)
        else:
            exp = load_experiment(args.experiment)
        exp = with_overrides(exp, **_overrides(args))
    except (ExperimentFileError, ValidationError, UnknownPreset) as exc:
        where = args.preset or args.experiment
        _err(f"{where}: {exc}")
        return EXIT_INPUT
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT

    try:
        traj = simulate(exp.topology, exp.stimulus, exp.solver)
    except (NonFiniteState, MemsynapseError) as exc:
        _err(f"simulation failed: {exc}")
        return EXIT_SIMULATION

    text = format_csv(traj, exp)
    summary = (
        f"final m1 = {traj.m1[-1]:.9g} ohm, total q = {traj.q[-1]:.9g} C, "
        f"samples = {len(traj)}"
    )
    if args.output in (None, "-"):
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            _err(str(exc))
            return EXIT_INPUT
        print(summary)
    return EXIT_OK


def _analysis_report(traj, exp: Experiment, tol_rel: float) -> list[str]:
    stim = exp.stimulus
    series = per_pulse_deltas(traj, stim)
    lines = ["pulse  delta_m1_ohm         saturated"]
    for k, d, sat in zip(series.pulse_index, series.delta_m1, series.saturated):
        lines.append(f"{k:5d}  {d:+.9e}  {'yes' if sat else 'no'}")
    try:
        regime = classify_regime(series, tol_rel=tol_rel).value
    except TooFewPulses as exc:
        regime = f"undetermined ({exc})"
    lines.append(f"regime: {regime}")
    if isinstance(exp.topology, SeriesPair):
        lines.append(f"alpha: {alpha(exp.topology.m1, exp.topology.m2):.9g}")
    window = presaturation_window(traj, stim, series)
    try:
        r2 = f"{linearity_r2(traj, 'm1', window):.9f}"
    except TooFewSamples:
        r2 = "n/a (too few samples)"
    lines.append(f"r2 (m1, {window[0]:.6g}..{window[1]:.6g} s): {r2}")
    return lines


def cmd_analyze(args) -> int:
    try:
        traj, exp = read_csv(args.csv)
        lines = _analysis_report(traj, exp, args.tol_rel)
    except (CsvFormatError, MemsynapseError) as exc:
        _err(f"{args.csv}: {exc}")
        return EXIT_INPUT
    print("\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        exp = preset(args.preset)
    except UnknownPreset as exc:
        _err(str(exc))
        return EXIT_INPUT
    v = 1.0 if args.amplitude is None else args.amplitude
    dt = 1e-6 if args.dt is None else args.dt
    try:
        exp = with_overrides(exp, model=Model.LINEAR, q0=args.q0)
        traj = oracle_run(exp.topology, v=v, duration=args.duration, dt=dt)
    except ValidationError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except NonFiniteState as exc:
        _err(f"simulation failed: {exc}")
        return EXIT_SIMULATION
    worst, n = oracle_deviation(traj, v)
    ok = n > 0 and worst < VERIFY_TOLERANCE
    print(
        f"{args.preset}: max relative deviation {worst:.3e} over {n} samples "
        f"(tolerance {VERIFY_TOLERANCE:.0e}): {'PASS' if ok else 'FAIL'}"
    )
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_preset(args) -> int:
    if args.name is None:
        print("\n".join(PRESET_NAMES))
        return EXIT_OK
    try:
        exp = preset(args.name)
    except UnknownPreset as exc:
        _err(str(exc))
        return EXIT_INPUT
    sys.stdout.write(serialize_experiment(exp))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("--dt", type=_number, help="override solver time step (s)")
    overrides.add_argument("--pulses", type=_count, help="override pulse count")
    overrides.add_argument("--amplitude", type=_number, help="override pulse amplitude (V)")

    parser = argparse.ArgumentParser(
        prog="memsynapse",
        description="Transient simulator for single and series-pair memristor synapses.",
        parents=[overrides],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    # overrides may follow the subcommand as well; SUPPRESS keeps the global value
    sub_overrides = argparse.ArgumentParser(add_help=False)
    for action in overrides._actions:
        sub_overrides.add_argument(
            *action.option_strings, type=action.type, help=action.help,
            default=argparse.SUPPRESS,
        )

    run = sub.add_parser("run", parents=[sub_overrides], help="simulate an experiment file")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("experiment", nargs="?", help="experiment file")
    src.add_argument("--preset", choices=PRESET_NAMES, help="run a built-in preset")
    run.add_argument("-o", "--output", help="CSV output path (default: stdout)")
    run.set_defaults(func=cmd_run)

    analyze = sub.add_parser("analyze", help="per-pulse deltas and regime of a CSV trajectory")
    analyze.add_argument("csv")
    analyze.add_argument("--tol-rel", type=float, default=DEFAULT_TOL_REL)
    analyze.set_defaults(func=cmd_analyze)

    verify = sub.add_parser(
        "verify", parents=[sub_overrides], help="compare a preset against the closed-form oracles"
    )
    verify.add_argument("preset")
    verify.add_argument("--q0", type=_number, default=ORACLE_Q0,
                        help="charge constant used for the check (default %(default)g C)")
    verify.add_argument("--duration", type=_number, default=0.5,
                        help="constant-drive duration (default %(default)g s)")
    verify.set_defaults(func=cmd_verify)

    pre = sub.add_parser("preset", help="print a built-in experiment file, or list presets")
    pre.add_argument("name", nargs="?")
    pre.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
