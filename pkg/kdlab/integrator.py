"""Fixed-step integration of the delayed system with a continuous extension.

Classical RK4 on a uniform grid. Every completed step carries a cubic Hermite
segment built from the stored phases and velocities at its two ends, and all
delayed lookups are served from those segments (or from the history for times
at or before zero).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import settings
from .exceptions import (
    AccessorOutOfRange,
    DimensionMismatch,
    NonFiniteState,
    OutOfRange,
    StepTooLarge,
)
from .model import (
    FloatArray,
    HistorySpec,
    IndexArray,
    SystemParams,
    hermite_slope,
    hermite_value,
    rhs,
)
from .types import IntegrationConfig, OrderEstimate

logger = logging.getLogger(__name__)


class _DenseOutput:
    """Lookup of phases and frequencies on the grid built so far.

    ``known`` is the last grid index whose phase and velocity are both stored.
    Times beyond ``times[known]`` are served by extrapolating the last segment.
    """

    def __init__(
        self,
        history: HistorySpec,
        times: FloatArray,
        phases: FloatArray,
        derivs: FloatArray,
        step: float,
        known: int = 0,
    ):
        self.history = history
        self.times = times
        self.phases = phases
        self.derivs = derivs
        self.step = step
        self.known = known

    def _segments(self, t: FloatArray) -> tuple[IndexArray, FloatArray]:
        idx = np.minimum((t / self.step).astype(np.intp), self.known - 1)
        return idx, (t - self.times[idx]) / self.step

    def phases_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        out = np.empty(t.shape)
        past = t <= 0.0
        if past.any():
            out[past] = self.history.phases_at(t[past], vertices[past])
        live = ~past
        if live.any():
            tl, vl = t[live], vertices[live]
            if self.known == 0:
                out[live] = self.phases[0, vl] + tl * self.derivs[0, vl]
            else:
                idx, s = self._segments(tl)
                out[live] = hermite_value(
                    self.phases[idx, vl],
                    self.phases[idx + 1, vl],
                    self.derivs[idx, vl],
                    self.derivs[idx + 1, vl],
                    self.step,
                    s,
                )
        return out

    def freqs_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        out = np.empty(t.shape)
        past = t <= 0.0
        if past.any():
            out[past] = self.history.freqs_at(t[past], vertices[past])
        live = ~past
        if live.any():
            tl, vl = t[live], vertices[live]
            if self.known == 0:
                out[live] = self.derivs[0, vl]
            else:
                idx, s = self._segments(tl)
                out[live] = hermite_slope(
                    self.phases[idx, vl],
                    self.phases[idx + 1, vl],
                    self.derivs[idx, vl],
                    self.derivs[idx + 1, vl],
                    self.step,
                    s,
                )
        return out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Solution on a uniform grid over [0, t_end] plus its history on [-tau, 0].

    ``phases[m]`` and ``derivs[m]`` are the state and velocity at ``times[m]``;
    ``derivs[m]`` is the vector field evaluated at that state. Output samples are
    every ``sample_stride``-th grid point, always including the last one.
    """

    params: SystemParams
    history: HistorySpec
    config: IntegrationConfig
    step: float
    times: FloatArray
    phases: FloatArray
    derivs: FloatArray
    sample_stride: int

    @property
    def n_steps(self) -> int:
        return int(self.times.size - 1)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def t_start(self) -> float:
        return -self.params.tau_max

    @property
    def sample_spacing(self) -> float:
        return self.sample_stride * self.step

    @cached_property
    def sample_indices(self) -> IndexArray:
        idx = np.arange(0, self.times.size, self.sample_stride)
        if idx[-1] != self.n_steps:
            idx = np.append(idx, self.n_steps)
        return idx

    @property
    def sample_times(self) -> FloatArray:
        return self.times[self.sample_indices]

    @property
    def sample_phases(self) -> FloatArray:
        return self.phases[self.sample_indices]

    @property
    def sample_freqs(self) -> FloatArray:
        return self.derivs[self.sample_indices]

    @cached_property
    def _dense(self) -> _DenseOutput:
        return _DenseOutput(
            self.history, self.times, self.phases, self.derivs, self.step, self.n_steps
        )

    def _check(self, t: FloatArray) -> None:
        slack = 1e-12 * max(1.0, self.t_end)
        if t.size and (t.min() < self.t_start - slack or t.max() > self.t_end + slack):
            bad = t.min() if t.min() < self.t_start - slack else t.max()
            raise OutOfRange(float(bad), self.t_start, self.t_end)

    def phases_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        """Phases of ``vertices[k]`` at ``t[k]``."""
        t = np.asarray(t, dtype=np.float64)
        self._check(t)
        return self._dense.phases_at(t, np.asarray(vertices, dtype=np.intp))

    def freqs_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64)
        self._check(t)
        return self._dense.freqs_at(t, np.asarray(vertices, dtype=np.intp))

    def grid_index(self, t: float) -> int | None:
        """Index of the grid point at ``t``, if ``t`` is one."""
        if t < 0.0 or t > self.t_end * (1.0 + 1e-12):
            return None
        k = min(int(round(t / self.step)), self.n_steps)
        return k if abs(t - self.times[k]) <= 1e-12 * max(1.0, abs(t)) else None


def step_size(params: SystemParams, config: IntegrationConfig) -> float:
    """h = min(dt, smallest positive active delay / 4, t_end).

    Raises:
        StepTooLarge: If the constrained step is not a positive finite number
    """
    h = min(config.dt, config.t_end)
    if params.min_active_delay is not None:
        h = min(h, params.min_active_delay / 4.0)
    if not (h > 0.0 and math.isfinite(h)):
        raise StepTooLarge(f"Step size {h} is not positive after constraints")
    return h


def integrate(
    params: SystemParams,
    history: HistorySpec,
    config: IntegrationConfig | None = None,
) -> Trajectory:
    """Integrate the delayed system from its history up to ``config.t_end``.

    The requested step is capped by a quarter of the smallest positive delay and
    then shrunk so that a whole number of steps lands on ``t_end``.

    Args:
        params: System parameters
        history: Initial data covering [-tau, 0]
        config: Horizon, step and output thinning (defaults from KDL_* settings)

    Returns:
        Completed Trajectory

    Raises:
        DimensionMismatch: If history and params disagree on N
        AccessorOutOfRange: If the history does not reach back to -tau
        StepTooLarge: If no positive step satisfies the constraints
        NonFiniteState: If the state stops being finite
    """
    config = config or IntegrationConfig()
    if history.n != params.n:
        raise DimensionMismatch(f"History has {history.n} oscillators, params have {params.n}")
    if not history.covers(params.tau_max):
        raise AccessorOutOfRange(
            f"History starts at {history.t_start}, delays need -{params.tau_max}"
        )

    h = step_size(params, config)
    n_steps = max(1, math.ceil(config.t_end / h - 1e-9))
    h = config.t_end / n_steps
    stride = config.sample_stride or max(1, math.ceil((n_steps + 1) / settings.max_samples))
    logger.info(
        "integrating N=%d to t=%g with h=%g (%d steps, stride %d)",
        params.n,
        config.t_end,
        h,
        n_steps,
        stride,
    )

    times = np.arange(n_steps + 1, dtype=np.float64) * h
    phases = np.empty((n_steps + 1, params.n))
    derivs = np.empty((n_steps + 1, params.n))
    dense = _DenseOutput(history, times, phases, derivs, h)
    lookup = dense.phases_at

    phases[0] = history.state_at(0.0)
    derivs[0] = rhs(0.0, phases[0], lookup, params)

    half = 0.5 * h
    report_every = max(1, n_steps // 10)
    for m in range(n_steps):
        t = times[m]
        y = phases[m]
        k1 = derivs[m]
        k2 = rhs(t + half, y + half * k1, lookup, params)
        k3 = rhs(t + half, y + half * k2, lookup, params)
        k4 = rhs(t + h, y + h * k3, lookup, params)
        y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y_next).all():
            raise NonFiniteState(float(times[m + 1]))

        phases[m + 1] = y_next
        derivs[m + 1] = rhs(times[m + 1], y_next, lookup, params)
        dense.known = m + 1
        if (m + 1) % report_every == 0:
            logger.debug("t = %.6g (%d/%d steps)", times[m + 1], m + 1, n_steps)

    for arr in (times, phases, derivs):
        arr.flags.writeable = False
    return Trajectory(
        params=params,
        history=history,
        config=config,
        step=h,
        times=times,
        phases=phases,
        derivs=derivs,
        sample_stride=stride,
    )


def eval_dense(traj: Trajectory, t: float) -> FloatArray:
    """Phases of all oscillators at time ``t`` in [-tau, t_end].

    Raises:
        OutOfRange: If ``t`` lies outside the covered range
    """
    t = float(t)
    k = traj.grid_index(t)
    if k is not None:
        return traj.phases[k].copy()
    n = traj.params.n
    return traj.phases_at(np.full(n, t), np.arange(n))


def eval_frequency(traj: Trajectory, t: float) -> FloatArray:
    """Frequencies of all oscillators at ``t``; at ``t = 0`` the left limit from the history.

    Raises:
        OutOfRange: If ``t`` lies outside the covered range
    """
    t = float(t)
    n = traj.params.n
    if t > 0.0:
        k = traj.grid_index(t)
        if k is not None:
            return traj.derivs[k].copy()
    return traj.freqs_at(np.full(n, t), np.arange(n))


def convergence_order(
    params: SystemParams,
    history: HistorySpec,
    t_check: float,
    dt: float = 0.1,
) -> OrderEstimate:
    """Richardson estimate of the observed order from runs with steps h, h/2 and h/4.

    ``h`` is the step the integrator picks for ``dt``. When the differences are at
    roundoff level the order is reported as exact.
    """
    base = step_size(params, IntegrationConfig(t_end=t_check, dt=dt))
    finals = []
    for k in range(3):
        config = IntegrationConfig(t_end=t_check, dt=base / 2**k, sample_stride=1)
        finals.append(integrate(params, history, config).phases[-1])

    coarse = float(np.max(np.abs(finals[0] - finals[1])))
    fine = float(np.max(np.abs(finals[1] - finals[2])))
    floor = 1e-12 * max(1.0, float(np.max(np.abs(finals[2]))))
    if coarse <= floor or fine <= floor:
        logger.info("convergence order: differences at roundoff (%g, %g)", coarse, fine)
        return OrderEstimate(order=None, exact=True, step=base, differences=[coarse, fine])

    order = math.log2(coarse / fine)
    logger.info("convergence order %.3f at t=%g (h=%g)", order, t_check, base)
    return OrderEstimate(order=order, exact=False, step=base, differences=[coarse, fine])
