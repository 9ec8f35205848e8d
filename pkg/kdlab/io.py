"""Config loading, CSV series, reports and generated plot scripts."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .diagnostics import DiagnosticsSeries
from .exceptions import (
    ConfigParseError,
    DimensionMismatch,
    KdlIoError,
    NegativeValue,
    NonSquareMatrix,
)
from .integrator import Trajectory
from .types import RunConfig, RunReport

logger = logging.getLogger(__name__)

_NEGATIVE_TYPES = {"negative_value", "greater_than", "greater_than_equal"}


def _field(loc: tuple[int | str, ...]) -> str | None:
    return ".".join(str(part) for part in loc) or None


def _translate(exc: ValidationError) -> Exception:
    """Map a validation error onto the kdlab exception it stands for.

    Union fields report one error per member; a typed error wins over the
    generic type mismatches of the other members.
    """
    errors = exc.errors()
    for err in errors:
        kind, message, field = err["type"], err["msg"], _field(err["loc"])
        if kind == "dimension_mismatch":
            return DimensionMismatch(message)
        if kind == "non_square":
            return NonSquareMatrix(message)
        if kind in _NEGATIVE_TYPES:
            return NegativeValue(f"{field}: {message}" if field else message)
    first = errors[0]
    return ConfigParseError(first["msg"], field=_field(first["loc"]))


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run configuration held in memory.

    Raises:
        ConfigParseError: On malformed JSON (with its line) or schema errors (with the field)
        DimensionMismatch: If omega, history and matrices disagree on N
        NonSquareMatrix: If an explicit matrix is not square
        NegativeValue: If kappa, a delay or a horizon is out of range
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, line=e.lineno) from e
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise _translate(e) from e


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a run configuration file.

    Defaults not given in the file come from KDL_* settings.

    Raises:
        KdlIoError: If the file cannot be read
        ConfigParseError, DimensionMismatch, NonSquareMatrix, NegativeValue: As parse_config
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise KdlIoError(f"Cannot read config {path}: {e}") from e
    config = parse_config(text)
    logger.info("loaded config '%s' (N=%d) from %s", config.label, config.n, path)
    return config


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_header(n: int) -> list[str]:
    return [
        "t",
        *(f"theta_{k}" for k in range(1, n + 1)),
        *(f"omega_{k}" for k in range(1, n + 1)),
        "d_theta",
        "d_omega",
        "q_theta",
        "order_param",
    ]


def write_csv(series: DiagnosticsSeries, traj: Trajectory, path: str | Path) -> Path:
    """Write one row per output sample with 17 significant digits.

    ``q_theta`` is an empty field when the series has none.

    Raises:
        KdlIoError: If the file cannot be written
        DimensionMismatch: If series and trajectory disagree on N
    """
    n = traj.params.n
    if series.phases.shape[1] != n:
        raise DimensionMismatch(f"Series has {series.phases.shape[1]} oscillators, run has {n}")
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(csv_header(n))
            for m in range(len(series)):
                q = "" if series.q_theta is None else _fmt(series.q_theta[m])
                writer.writerow(
                    [
                        _fmt(series.times[m]),
                        *map(_fmt, series.phases[m]),
                        *map(_fmt, series.freqs[m]),
                        _fmt(series.d_theta[m]),
                        _fmt(series.d_omega[m]),
                        q,
                        _fmt(series.order_param[m]),
                    ]
                )
    except OSError as e:
        raise KdlIoError(f"Cannot write {path}: {e}") from e
    logger.info("wrote %d rows to %s", len(series), path)
    return path


def read_csv(path: str | Path) -> DiagnosticsSeries:
    """Parse a file written by write_csv.

    Raises:
        KdlIoError: If the file cannot be read or is not in the expected layout
    """
    try:
        with Path(path).open(encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise KdlIoError(f"Cannot read {path}: {e}") from e
    if not rows:
        raise KdlIoError(f"{path} is empty")

    header, body = rows[0], rows[1:]
    n = (len(header) - 5) // 2
    if n < 1 or header != csv_header(n):
        raise KdlIoError(f"{path} does not have the trajectory CSV header")
    if not body:
        raise KdlIoError(f"{path} has no data rows")

    q_column = [row[2 * n + 3] for row in body]
    has_q = all(q_column)
    try:
        values = np.array(
            [[float(x) for i, x in enumerate(row) if i != 2 * n + 3] for row in body]
        )
        q_theta = np.array([float(x) for x in q_column]) if has_q else None
    except ValueError as e:
        raise KdlIoError(f"{path} has a malformed number: {e}") from e
    if values.shape[1] != 2 * n + 4:
        raise KdlIoError(f"{path} has rows of inconsistent width")

    return DiagnosticsSeries(
        times=values[:, 0],
        phases=values[:, 1 : n + 1],
        freqs=values[:, n + 1 : 2 * n + 1],
        d_theta=values[:, 2 * n + 1],
        d_omega=values[:, 2 * n + 2],
        q_theta=q_theta,
        order_param=values[:, 2 * n + 3],
    )


def write_report(report: RunReport, path: str | Path) -> Path:
    """Write ``key: value`` lines, or JSON when ``path`` ends in ``.json``.

    Raises:
        KdlIoError: If the file cannot be written
    """
    path = Path(path)
    text = report.model_dump_json(indent=2) + "\n" if path.suffix == ".json" else report.as_text()
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise KdlIoError(f"Cannot write {path}: {e}") from e
    return path


_PLOT_TEMPLATE = '''\
"""Plot a kdlab trajectory CSV: phases and frequencies, then diameters."""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = Path({csv_path!r})
STEM = CSV_PATH.with_suffix("")

with CSV_PATH.open(newline="") as fh:
    reader = csv.reader(fh)
    header = next(reader)
    rows = [[float(x) if x else float("nan") for x in row] for row in reader]

columns = {{name: [row[k] for row in rows] for k, name in enumerate(header)}}
t = columns["t"]
thetas = [name for name in header if name.startswith("theta_")]
omegas = [name for name in header if name.startswith("omega_")]

fig, (ax_theta, ax_omega) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
for name in thetas:
    ax_theta.plot(t, columns[name], linewidth=0.8)
for name in omegas:
    ax_omega.plot(t, columns[name], linewidth=0.8)
ax_theta.set_ylabel("theta_i(t)")
ax_omega.set_ylabel("omega_i(t)")
ax_omega.set_xlabel("t")
fig.tight_layout()
fig.savefig(f"{{STEM}}_trajectories.png", dpi=150)

fig, (ax_lin, ax_log) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
ax_lin.plot(t, columns["d_theta"], label="d_theta")
ax_lin.plot(t, columns["d_omega"], label="d_omega")
if any(x == x for x in columns["q_theta"]):
    ax_lin.plot(t, columns["q_theta"], label="q_theta", linestyle="--")
ax_lin.legend()
positive = [(ti, d) for ti, d in zip(t, columns["d_omega"]) if d > 0]
if positive:
    ax_log.semilogy(*zip(*positive), label="d_omega")
ax_log.set_xlabel("t")
ax_log.set_ylabel("d_omega (log)")
fig.tight_layout()
fig.savefig(f"{{STEM}}_diameters.png", dpi=150)
'''


def plot_script(csv_path: str | Path) -> str:
    """Source of a standalone matplotlib script for ``csv_path``."""
    return _PLOT_TEMPLATE.format(csv_path=str(csv_path))


def emit_plot_script(csv_path: str | Path, out_path: str | Path) -> Path:
    """Write a plotting script rendering <stem>_trajectories.png and <stem>_diameters.png.

    Raises:
        KdlIoError: If the CSV does not exist or the script cannot be written
    """
    csv_path, out_path = Path(csv_path), Path(out_path)
    if not csv_path.is_file():
        raise KdlIoError(f"CSV file {csv_path} does not exist")
    try:
        out_path.write_text(plot_script(csv_path), encoding="utf-8")
    except OSError as e:
        raise KdlIoError(f"Cannot write {out_path}: {e}") from e
    return out_path
