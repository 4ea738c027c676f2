"""CSV trajectory files.

Layout: a block of ``#`` comment lines holding the serialised experiment,
then the header ``t,v,i,x1,m1,x2,m2,m_total,q`` and one row per sample.
Columns that do not apply to a single device are left empty.  Output is
byte-for-byte deterministic for identical inputs.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .circuit import Trajectory
from .expfile import Experiment, parse_experiment, serialize_experiment

__all__ = ["write_csv", "read_csv", "format_csv", "CsvFormatError", "MARKER"]

MARKER = "# memsynapse trajectory"
HEADER = ",".join(Trajectory.COLUMNS)


class CsvFormatError(ValueError):
    pass


def _fmt(value: float) -> str:
    return f"{value:.15e}"


def format_csv(traj: Trajectory, exp: Experiment) -> str:
    out = io.StringIO()
    out.write(f"# {MARKER}\n")
    out.write("# # pulse_shape = rectangular\n")
    for line in serialize_experiment(exp).splitlines():
        out.write(f"# {line}\n" if line else "#\n")
    out.write(HEADER + "\n")
    cols = [traj.columns()[name] for name in Trajectory.COLUMNS]
    for k in range(len(traj)):
        out.write(",".join("" if c is None else _fmt(c[k]) for c in cols))
        out.write("\n")
    return out.getvalue()


def write_csv(path, traj: Trajectory, exp: Experiment) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(traj, exp))


def read_csv(path) -> tuple[Trajectory, Experiment]:
    """Load a trajectory written by :func:`write_csv` together with its experiment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from None

    meta, body_start = [], None
    for n, line in enumerate(lines):
        if line.startswith("#"):
            meta.append(line[2:] if line.startswith("# ") else line[1:])
            continue
        body_start = n
        break
    if not meta or meta[0] != MARKER or body_start is None:
        raise CsvFormatError(f"{path} is not a memsynapse trajectory")
    if lines[body_start] != HEADER:
        raise CsvFormatError(f"unexpected header: {lines[body_start]!r}")
    try:
        exp = parse_experiment("\n".join(meta))
    except Exception as exc:
        raise CsvFormatError(f"bad experiment metadata: {exc}") from None

    rows = list(csv.reader(lines[body_start + 1:]))
    if not rows:
        raise CsvFormatError("no samples")
    width = len(Trajectory.COLUMNS)
    data: dict[str, np.ndarray | None] = {}
    for j, name in enumerate(Trajectory.COLUMNS):
        try:
            cells = [row[j] for row in rows if len(row) == width]
        except IndexError:
            cells = []
        if len(cells) != len(rows):
            raise CsvFormatError("ragged rows")
        if all(c == "" for c in cells):
            data[name] = None
            continue
        try:
            data[name] = np.array([float(c) for c in cells])
        except ValueError:
            raise CsvFormatError(f"non-numeric value in column {name}") from None
    if any(data[name] is None for name in ("t", "v", "i", "x1", "m1", "m_total", "q")):
        raise CsvFormatError("required column is empty")

    traj = Trajectory(
        **data,
        topology=exp.topology,
        stimulus=exp.stimulus,
        solver=exp.solver,
        meta={"source": str(path)},
    )
    return traj, exp
