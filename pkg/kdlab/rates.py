"""Empirical synchronization verdicts and decay-rate fits on diagnostic series."""

from __future__ import annotations

import logging

import numpy as np

from .config import settings
from .diagnostics import DiagnosticsSeries
from .exceptions import InsufficientSamples
from .types import DecayFit, SyncReport

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 10
FIT_FLOOR = 1e-12


def default_window(series: DiagnosticsSeries) -> float:
    """Trailing window used when none is given: the last tenth of the run."""
    span = float(series.times[-1] - series.times[0])
    return max(0.1 * span, 0.0)


def sync_detect(
    series: DiagnosticsSeries,
    tol: float | None = None,
    window: float | None = None,
) -> SyncReport:
    """Decide frequency synchronization from the trailing window of a run.

    Args:
        series: Diagnostic series of a run
        tol: Frequency-diameter tolerance (falls back to KDL_SYNC_TOL)
        window: Length of the trailing window that must stay below ``tol``
            (defaults to the last tenth of the run)

    Returns:
        SyncReport; ``t_sync`` is the first time after which d_omega stays below
        ``tol`` and is only set when the run is synchronized
    """
    tol = tol if tol is not None else settings.sync_tol
    window = window if window is not None else default_window(series)
    times, d_omega = series.times, series.d_omega
    below = d_omega < tol
    tail = times >= times[-1] - window
    synced = bool(below[tail].all())

    t_sync = None
    if synced:
        above = np.flatnonzero(~below)
        t_sync = float(times[0] if above.size == 0 else times[above[-1] + 1])
    logger.info("sync: synced=%s t_sync=%s (tol %g, window %g)", synced, t_sync, tol, window)
    return SyncReport(
        synced=synced,
        t_sync=t_sync,
        tol=tol,
        window=window,
        final_d_omega=float(d_omega[-1]),
    )


def fit_decay_rate(
    series: DiagnosticsSeries,
    t_from: float | None = None,
    t_to: float | None = None,
) -> DecayFit:
    """Least-squares fit of ln d_omega against t on [t_from, t_to].

    ``t_to`` defaults to the end of the run. Samples with d_omega <= 1e-12 are
    dropped. A series that is constant on the fit range reports rate 0 and R^2 = 0.

    Raises:
        InsufficientSamples: If fewer than 10 samples remain
    """
    t_from = float(series.times[0]) if t_from is None else t_from
    mask = (series.times >= t_from) & (series.d_omega > FIT_FLOOR)
    if t_to is not None:
        mask &= series.times <= t_to
    usable = int(mask.sum())
    if usable < MIN_FIT_SAMPLES:
        raise InsufficientSamples(usable, MIN_FIT_SAMPLES)

    t = series.times[mask]
    y = np.log(series.d_omega[mask])
    if np.ptp(y) == 0.0:
        return DecayFit(
            rate=0.0, r_squared=0.0, intercept=float(y[0]), t_from=t_from, samples=usable
        )
    slope, intercept = np.polyfit(t, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - (slope * t + intercept)) ** 2))
    fit = DecayFit(
        rate=float(-slope),
        r_squared=1.0 - ss_res / ss_tot,
        intercept=float(intercept),
        t_from=t_from,
        samples=usable,
    )
    logger.info("decay fit: rate %.6g, R^2 %.6f over %d samples", fit.rate, fit.r_squared, usable)
    return fit
