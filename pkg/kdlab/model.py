"""Delayed Kuramoto vector field on a digraph.

    dtheta_i/dt = Omega_i + kappa/(N-1) * sum_{j in N_i} sin(theta_j(t - tau_ij) - theta_i(t))

Delayed phases are supplied through an accessor ``(times, vertices) -> phases`` that
is evaluated only on arcs with a positive delay; zero-delay arcs read the current
state. Phases are never wrapped.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import AccessorOutOfRange, DimensionMismatch, NegativeValue, NonSquareMatrix
from .graph import DigraphTopology

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
IndexArray = NDArray[np.intp]
DelayedAccessor = Callable[[FloatArray, IndexArray], FloatArray]


def _frozen(values: ArrayLike) -> FloatArray:
    out = np.array(values, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Natural frequencies, coupling, delays and topology of one instance."""

    omega: FloatArray
    kappa: float
    delays: FloatArray
    topology: DigraphTopology

    @property
    def n(self) -> int:
        return int(self.omega.shape[0])

    @cached_property
    def tau_max(self) -> float:
        """Largest off-diagonal delay entry (the length of the history interval)."""
        return float(self.delays.max()) if self.n > 1 else 0.0

    @cached_property
    def r_omega(self) -> float:
        return float(np.max(np.abs(self.omega))) + self.kappa

    @cached_property
    def arc_receivers(self) -> IndexArray:
        return self.topology.arcs[0]

    @cached_property
    def arc_senders(self) -> IndexArray:
        return self.topology.arcs[1]

    @cached_property
    def arc_delays(self) -> FloatArray:
        return self.delays[self.arc_receivers, self.arc_senders]

    @cached_property
    def lagged(self) -> NDArray[np.bool_]:
        """Mask of arcs with a positive delay."""
        return self.arc_delays > 0.0

    @cached_property
    def lag_index(self) -> IndexArray:
        return np.flatnonzero(self.lagged)

    @cached_property
    def lag_senders(self) -> IndexArray:
        return self.arc_senders[self.lag_index]

    @cached_property
    def lag_delays(self) -> FloatArray:
        return self.arc_delays[self.lag_index]

    @cached_property
    def min_active_delay(self) -> float | None:
        """Smallest positive delay on an arc, or None when every arc is instantaneous."""
        positive = self.arc_delays[self.lagged]
        return float(positive.min()) if positive.size else None

    @cached_property
    def tau_i(self) -> FloatArray:
        """Largest delay with which each vertex is heard by its receivers."""
        out = np.zeros(self.n)
        np.maximum.at(out, self.arc_senders, self.arc_delays)
        return out

    @property
    def tau_0(self) -> float:
        return float(self.tau_i.min())

    @property
    def coupling(self) -> float:
        """kappa / (N - 1), zero for a single oscillator."""
        return self.kappa / (self.n - 1) if self.n > 1 else 0.0

    def with_omega(self, omega: ArrayLike) -> SystemParams:
        return make_params(omega, self.kappa, self.delays, self.topology)


def make_params(
    omega: ArrayLike,
    kappa: float,
    delays: ArrayLike | None,
    topology: DigraphTopology,
) -> SystemParams:
    """Validate and assemble system parameters.

    Args:
        omega: Natural frequencies, one per vertex
        kappa: Coupling strength (non-negative)
        delays: N x N delay matrix, rows indexed by the receiver; None for no delays.
            The diagonal is ignored and stored as zero.
        topology: Coupling digraph

    Returns:
        SystemParams with read-only arrays

    Raises:
        DimensionMismatch: If omega, delays and topology disagree on N
        NonSquareMatrix: If the delay matrix is not square
        NegativeValue: If kappa or a delay entry is negative
    """
    omega_arr = np.asarray(omega, dtype=np.float64)
    n = topology.n_vertices
    if omega_arr.ndim != 1 or omega_arr.shape[0] != n:
        raise DimensionMismatch(f"omega has shape {omega_arr.shape}, topology has {n} vertices")
    if kappa < 0:
        raise NegativeValue(f"kappa must be non-negative (got {kappa})")

    tau = np.zeros((n, n)) if delays is None else np.array(delays, dtype=np.float64)
    if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
        raise NonSquareMatrix(f"Delay matrix must be N x N, got {tau.shape}")
    if tau.shape[0] != n:
        raise DimensionMismatch(f"Delay matrix is {tau.shape[0]}x{tau.shape[0]}, expected {n}x{n}")
    np.fill_diagonal(tau, 0.0)
    if (tau < 0).any():
        raise NegativeValue("Delays must be non-negative")

    return SystemParams(
        omega=_frozen(omega_arr), kappa=float(kappa), delays=_frozen(tau), topology=topology
    )


def hermite_value(
    y0: FloatArray, y1: FloatArray, d0: FloatArray, d1: FloatArray, h: ArrayLike, s: ArrayLike
) -> FloatArray:
    """Cubic Hermite interpolant at fraction ``s`` of a segment of length ``h``."""
    s2 = s * s
    s3 = s2 * s
    return (
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
    )


def hermite_slope(
    y0: FloatArray, y1: FloatArray, d0: FloatArray, d1: FloatArray, h: ArrayLike, s: ArrayLike
) -> FloatArray:
    """Time derivative of :func:`hermite_value`."""
    s2 = s * s
    return (
        (6.0 * s2 - 6.0 * s) * (y0 - y1) / h
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (3.0 * s2 - 2.0 * s) * d1
    )


@dataclass(frozen=True, eq=False)
class HistorySpec:
    """Initial data on [-tau, 0].

    ``constant`` histories hold one phase per oscillator and have zero frequency.
    ``sampled`` histories hold phases and derivatives on a grid ending at t = 0 and
    are interpolated with cubic Hermite segments.
    """

    kind: Literal["constant", "sampled"]
    phases: FloatArray
    times: FloatArray | None = None
    derivs: FloatArray | None = None

    @classmethod
    def constant(cls, values: ArrayLike) -> HistorySpec:
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise DimensionMismatch("constant history must be a vector of phases")
        return cls(kind="constant", phases=_frozen(arr))

    @classmethod
    def sampled(cls, times: ArrayLike, phases: ArrayLike, derivs: ArrayLike) -> HistorySpec:
        t = np.asarray(times, dtype=np.float64)
        p = np.asarray(phases, dtype=np.float64)
        d = np.asarray(derivs, dtype=np.float64)
        if t.ndim != 1 or t.size < 2 or p.shape != (t.size, p.shape[-1]) or d.shape != p.shape:
            raise DimensionMismatch("sampled history needs K times and K x N phases and derivs")
        if np.any(np.diff(t) <= 0) or t[-1] != 0.0:
            raise DimensionMismatch("sampled history times must increase strictly to 0")
        return cls(kind="sampled", phases=_frozen(p), times=_frozen(t), derivs=_frozen(d))

    @classmethod
    def from_callable(
        cls,
        phase_fn: Callable[[FloatArray], FloatArray],
        deriv_fn: Callable[[FloatArray], FloatArray],
        tau: float,
        samples: int = 1024,
    ) -> HistorySpec:
        """Sample vectorized ``phase_fn(t) -> (K, N)`` and ``deriv_fn`` on [-tau, 0]."""
        t = np.linspace(-tau, 0.0, samples)
        return cls.sampled(t, phase_fn(t), deriv_fn(t))

    @property
    def n(self) -> int:
        return int(self.phases.shape[-1])

    @property
    def t_start(self) -> float:
        return float(self.times[0]) if self.kind == "sampled" else -np.inf

    def covers(self, tau: float) -> bool:
        return self.t_start <= -tau + 1e-12 * max(1.0, tau)

    def _locate(self, t: FloatArray) -> tuple[IndexArray, FloatArray, FloatArray]:
        idx = np.searchsorted(self.times, t, side="right") - 1
        idx = np.clip(idx, 0, self.times.size - 2)
        h = self.times[idx + 1] - self.times[idx]
        return idx, h, (t - self.times[idx]) / h

    def _check(self, t: FloatArray) -> None:
        slack = 1e-12 * max(1.0, abs(self.t_start)) if self.kind == "sampled" else 0.0
        if t.size and (t.max() > 0.0 or t.min() < self.t_start - slack):
            raise AccessorOutOfRange(
                f"History covers [{self.t_start}, 0], asked for [{t.min()}, {t.max()}]"
            )

    def phases_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        """Phases of ``vertices[k]`` at ``t[k]``, all times in the history interval."""
        t = np.asarray(t, dtype=np.float64)
        self._check(t)
        if self.kind == "constant":
            return self.phases[vertices]
        idx, h, s = self._locate(t)
        return hermite_value(
            self.phases[idx, vertices],
            self.phases[idx + 1, vertices],
            self.derivs[idx, vertices],
            self.derivs[idx + 1, vertices],
            h,
            s,
        )

    def freqs_at(self, t: FloatArray, vertices: IndexArray) -> FloatArray:
        t = np.asarray(t, dtype=np.float64)
        self._check(t)
        if self.kind == "constant":
            return np.zeros(t.shape)
        idx, h, s = self._locate(t)
        return hermite_slope(
            self.phases[idx, vertices],
            self.phases[idx + 1, vertices],
            self.derivs[idx, vertices],
            self.derivs[idx + 1, vertices],
            h,
            s,
        )

    def state_at(self, t: float) -> FloatArray:
        """All phases at one history time."""
        vertices = np.arange(self.n)
        return self.phases_at(np.full(self.n, t), vertices)

    def freq_state_at(self, t: float) -> FloatArray:
        vertices = np.arange(self.n)
        return self.freqs_at(np.full(self.n, t), vertices)

    def accessor(self) -> DelayedAccessor:
        return self.phases_at

    def freq_accessor(self) -> DelayedAccessor:
        return self.freqs_at


def _gather(
    t: float,
    current: FloatArray,
    delayed: DelayedAccessor,
    params: SystemParams,
) -> FloatArray:
    """Sender values on every arc: delayed where the arc has a delay, current otherwise."""
    values = current[params.arc_senders]
    lag = params.lag_index
    if lag.size:
        values[lag] = delayed(t - params.lag_delays, params.lag_senders)
    return values


def rhs(
    t: float,
    phases: FloatArray,
    delayed: DelayedAccessor,
    params: SystemParams,
) -> FloatArray:
    """Phase velocities of the delayed system at time ``t``.

    Raises:
        AccessorOutOfRange: If the accessor cannot serve a delayed time
    """
    receivers = params.arc_receivers
    sent = _gather(t, phases, delayed, params)
    pull = np.bincount(receivers, weights=np.sin(sent - phases[receivers]), minlength=params.n)
    return params.omega + params.coupling * pull


def frequency_rhs(
    t: float,
    phases: FloatArray,
    freqs: FloatArray,
    phases_delayed: DelayedAccessor,
    freqs_delayed: DelayedAccessor,
    params: SystemParams,
) -> FloatArray:
    """Frequency accelerations obtained by differentiating the system once."""
    receivers = params.arc_receivers
    sent_phase = _gather(t, phases, phases_delayed, params)
    sent_freq = _gather(t, freqs, freqs_delayed, params)
    weights = np.cos(sent_phase - phases[receivers]) * (sent_freq - freqs[receivers])
    return params.coupling * np.bincount(receivers, weights=weights, minlength=params.n)


def velocity_bound(params: SystemParams) -> float:
    """R_omega = max |Omega_i| + kappa."""
    return params.r_omega
