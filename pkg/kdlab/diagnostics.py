"""Diameters, initial-interval sups, convex-combination envelopes and series assembly."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import (
    CoefficientOverflow,
    EtaTooSmall,
    KExceedsM,
    NegativeValue,
    PreconditionViolated,
)
from .graph import DigraphTopology
from .integrator import Trajectory
from .model import FloatArray, HistorySpec, IndexArray
from .types import MinIndexReport

logger = logging.getLogger(__name__)

MAX_COMBINATION_SIZE = 120


def perm_count(m: int, k: int) -> int:
    """Number of k-permutations of m, m! / (m - k)!.

    Raises:
        NegativeValue: If m or k is negative
        KExceedsM: If k > m
    """
    if m < 0 or k < 0:
        raise NegativeValue(f"P(m, k) needs non-negative arguments (got m={m}, k={k})")
    if k > m:
        raise KExceedsM(m, k)
    return math.perm(m, k)


def phase_diameter(phases: ArrayLike) -> float:
    return float(np.ptp(np.asarray(phases, dtype=np.float64)))


def freq_diameter(freqs: ArrayLike) -> float:
    return float(np.ptp(np.asarray(freqs, dtype=np.float64)))


def natural_freq_diameter(omega: ArrayLike) -> float:
    """D(Omega) = max_ij |Omega_i - Omega_j|."""
    return float(np.ptp(np.asarray(omega, dtype=np.float64)))


def order_parameter(phases: ArrayLike) -> FloatArray | float:
    """r = |mean of exp(i theta)| along the last axis."""
    arr = np.asarray(phases, dtype=np.float64)
    r = np.abs(np.exp(1j * arr).mean(axis=-1))
    return float(r) if r.ndim == 0 else r


def initial_diameters(
    history: HistorySpec,
    grid_resolution: int = 1024,
    tau: float | None = None,
) -> tuple[float, float]:
    """Sup phase and frequency diameters over the history interval [-tau, 0].

    Both maxima run over pairs of oscillators and pairs of times, so a history that
    drifts in unison still has a positive phase diameter.

    Exact for constant histories. Sampled histories are evaluated on a uniform grid
    of ``grid_resolution`` points together with their own sample times.
    """
    if history.kind == "constant":
        return phase_diameter(history.phases), 0.0

    lo = history.t_start if tau is None else max(-tau, history.t_start)
    grid = np.union1d(np.linspace(lo, 0.0, grid_resolution), history.times[history.times >= lo])
    n = history.n
    t = np.repeat(grid, n)
    vertices = np.tile(np.arange(n), grid.size)
    theta = history.phases_at(t, vertices).reshape(grid.size, n)
    omega = history.freqs_at(t, vertices).reshape(grid.size, n)
    return float(theta.max() - theta.min()), float(omega.max() - omega.min())


def _recurrence_coefficients(n: int, eta: float) -> tuple[FloatArray, FloatArray]:
    # a_bar[k - 1] holds the upper coefficient of index k (1-based), likewise a_under
    a_bar = np.zeros(n)
    for k in range(n, 1, -1):
        a_bar[k - 2] = eta * (2 * n - k + 2) * (a_bar[k - 1] + 1.0)
    a_under = np.zeros(n)
    for k in range(1, n):
        a_under[k] = eta * (k + 1 + n) * (a_under[k - 1] + 1.0)
    return a_bar, a_under


def _check_size(n: int, eta: float) -> None:
    if eta <= 2.0:
        raise EtaTooSmall(eta)
    if n > MAX_COMBINATION_SIZE:
        raise CoefficientOverflow(n, eta)


def coefficients(n: int, eta: float) -> tuple[FloatArray, FloatArray]:
    """Upper and lower convex-combination coefficients from their recurrences.

    Raises:
        EtaTooSmall: If eta <= 2
        CoefficientOverflow: If the coefficients do not fit in 64-bit floats
    """
    _check_size(n, eta)
    with np.errstate(over="ignore"):
        a_bar, a_under = _recurrence_coefficients(n, eta)
    if not (np.isfinite(a_bar).all() and np.isfinite(a_under).all()):
        raise CoefficientOverflow(n, eta)
    return a_bar, a_under


def coefficients_by_sum(n: int, eta: float) -> tuple[FloatArray, FloatArray]:
    """The same coefficients from their closed forms as sums of eta^j P(m, j)."""
    _check_size(n, eta)
    a_bar = np.zeros(n)
    a_under = np.zeros(n)
    try:
        for k in range(2, n + 1):
            a_bar[k - 2] = sum(
                eta**j * float(perm_count(2 * n - k + 2, j)) for j in range(1, n - k + 2)
            )
        for k in range(1, n):
            a_under[k] = sum(eta**j * float(perm_count(k + 1 + n, j)) for j in range(1, k + 1))
    except OverflowError as exc:
        raise CoefficientOverflow(n, eta) from exc
    if not (np.isfinite(a_bar).all() and np.isfinite(a_under).all()):
        raise CoefficientOverflow(n, eta)
    return a_bar, a_under


@dataclass(frozen=True, eq=False)
class ConvexCombinationState:
    """Envelopes of the ordered phases.

    ``theta_bar[k]`` is a convex combination of the sorted phases k..N-1 and
    ``theta_under[k]`` of 0..k; ``q`` is their outer gap.
    """

    eta: float
    permutation: IndexArray
    a_bar: FloatArray
    a_under: FloatArray
    theta_bar: FloatArray
    theta_under: FloatArray
    q: float
    beta: float


def convex_combination(phases: ArrayLike, eta: float) -> ConvexCombinationState:
    """Sort the phases and build both envelope sequences.

    Raises:
        EtaTooSmall: If eta <= 2
        CoefficientOverflow: If the coefficients overflow
    """
    theta = np.asarray(phases, dtype=np.float64)
    n = theta.size
    a_bar, a_under = coefficients(n, eta)
    permutation = np.argsort(theta, kind="stable")
    ordered = theta[permutation]

    theta_bar = np.empty(n)
    theta_bar[-1] = ordered[-1]
    for k in range(n - 2, -1, -1):
        theta_bar[k] = (a_bar[k] * theta_bar[k + 1] + ordered[k]) / (a_bar[k] + 1.0)

    theta_under = np.empty(n)
    theta_under[0] = ordered[0]
    for k in range(1, n):
        theta_under[k] = (a_under[k] * theta_under[k - 1] + ordered[k]) / (a_under[k] + 1.0)

    return ConvexCombinationState(
        eta=eta,
        permutation=permutation,
        a_bar=a_bar,
        a_under=a_under,
        theta_bar=theta_bar,
        theta_under=theta_under,
        q=float(theta_bar[0] - theta_under[-1]),
        beta=1.0 - 2.0 / eta,
    )


def q_weights(n: int, eta: float) -> FloatArray:
    """Weights w with q = sort(phases) @ w, from the envelope recurrences."""
    a_bar, a_under = coefficients(n, eta)
    eye = np.eye(n)
    upper = eye[-1].copy()
    for k in range(n - 2, -1, -1):
        upper = (a_bar[k] * upper + eye[k]) / (a_bar[k] + 1.0)
    lower = eye[0].copy()
    for k in range(1, n):
        lower = (a_under[k] * lower + eye[k]) / (a_under[k] + 1.0)
    return upper - lower


def eta_lower_bounds(zeta: float, xi: float, r_omega: float, tau: float) -> dict[str, float]:
    """The three lower bounds eta must exceed; infinite where a bound is undefined."""
    rt = r_omega * tau
    return {
        "1/sin(xi)": 1.0 / math.sin(xi) if 0.0 < xi < math.pi else math.inf,
        "1/cos(R_omega*tau)": 1.0 / math.cos(rt) if rt < math.pi / 2 else math.inf,
        "2/(1-zeta/xi)": 2.0 / (1.0 - zeta / xi) if 0.0 < zeta < xi else math.inf,
    }


def check_min_index(
    phases: ArrayLike,
    eta: float,
    topology: DigraphTopology,
    zeta: float,
    xi: float,
    r_omega: float,
    tau: float,
) -> MinIndexReport:
    """Evaluate both weighted phase-ordering inequalities for every n.

    Phases are given per vertex and relabeled in increasing order (ties by index).
    A min or max over an empty neighbor subset contributes 0.

    Raises:
        PreconditionViolated: Listing each failed hypothesis on (zeta, xi, eta)
    """
    theta = np.asarray(phases, dtype=np.float64)
    n = theta.size
    failed = []
    if not np.ptp(theta) < zeta:
        failed.append("d_theta < zeta")
    if not zeta < xi:
        failed.append("zeta < xi")
    if not xi < math.pi:
        failed.append("xi < pi")
    if not r_omega * tau < math.pi / 2:
        failed.append("R_omega*tau < pi/2")
    for name, bound in eta_lower_bounds(zeta, xi, r_omega, tau).items():
        if not eta > bound:
            failed.append(f"eta > {name}")
    if failed:
        raise PreconditionViolated(failed)

    permutation = np.argsort(theta, kind="stable")
    rank = np.empty(n, dtype=np.intp)
    rank[permutation] = np.arange(n)
    s = theta[permutation]
    neighbors = [sorted(int(rank[j]) for j in topology.neighbor_sets[v]) for v in permutation]

    below = []
    above = []
    for i in range(n):
        lower_nbrs = [j for j in neighbors[i] if j <= i]
        upper_nbrs = [j for j in neighbors[i] if j >= i]
        below.append(min((math.sin(s[j] - s[i]) for j in lower_nbrs), default=0.0))
        above.append(max((math.sin(s[j] - s[i]) for j in upper_nbrs), default=0.0))

    k_bar, k_under = [], []
    upper_lhs, upper_rhs, lower_lhs, lower_rhs = [], [], [], []
    for m in range(n):
        union = set().union(*neighbors[m:])
        kb = min(union, default=n - 1)
        k_bar.append(int(permutation[kb]))
        upper_lhs.append(sum(eta ** (i - m) * below[i] for i in range(m, n)))
        upper_rhs.append(math.sin(s[kb] - s[-1]))

        union = set().union(*neighbors[: m + 1])
        ku = max(union, default=0)
        k_under.append(int(permutation[ku]))
        lower_lhs.append(sum(eta ** (m - i) * above[i] for i in range(m + 1)))
        lower_rhs.append(math.sin(s[ku] - s[0]))

    def _tol(a: float, b: float) -> float:
        return 1e-12 * max(1.0, abs(a), abs(b))

    return MinIndexReport(
        permutation=permutation.tolist(),
        k_bar=k_bar,
        k_under=k_under,
        upper_lhs=upper_lhs,
        upper_rhs=upper_rhs,
        lower_lhs=lower_lhs,
        lower_rhs=lower_rhs,
        upper_ok=[a <= b + _tol(a, b) for a, b in zip(upper_lhs, upper_rhs)],
        lower_ok=[a >= b - _tol(a, b) for a, b in zip(lower_lhs, lower_rhs)],
    )


@dataclass(frozen=True, eq=False)
class DiagnosticsSeries:
    """Diagnostic series at the output samples of a run.

    Scalars are None when the series was read back from a CSV file.
    """

    times: FloatArray
    phases: FloatArray
    freqs: FloatArray
    d_theta: FloatArray
    d_omega: FloatArray
    q_theta: FloatArray | None
    order_param: FloatArray
    d_omega_nat: float | None = None
    d_theta_init: float | None = None
    d_omega_init: float | None = None
    eta: float | None = None

    def __len__(self) -> int:
        return int(self.times.size)


def diagnostics_over(traj: Trajectory, eta: float | None = None) -> DiagnosticsSeries:
    """Assemble every series at the trajectory's sample times.

    Frequencies are the stored velocities, so ``t = 0`` uses the right-hand value.
    ``q_theta`` is present iff ``eta`` is given.
    """
    phases = traj.sample_phases
    freqs = traj.sample_freqs
    q_theta = None
    if eta is not None:
        q_theta = np.sort(phases, axis=1) @ q_weights(traj.params.n, eta)
    d_theta_init, d_omega_init = initial_diameters(traj.history, tau=traj.params.tau_max)
    return DiagnosticsSeries(
        times=traj.sample_times,
        phases=phases,
        freqs=freqs,
        d_theta=np.ptp(phases, axis=1),
        d_omega=np.ptp(freqs, axis=1),
        q_theta=q_theta,
        order_param=order_parameter(phases),
        d_omega_nat=natural_freq_diameter(traj.params.omega),
        d_theta_init=d_theta_init,
        d_omega_init=d_omega_init,
        eta=eta,
    )
