"""Frequency-spread contraction after the entry time t_*.

Two arguments are measured against simulated runs. On a strongly connected
digraph of depth gamma, the frequency extrema over windows of length 2 gamma tau
contract by a factor Gamma_n per window. On the complete digraph, sup diameters
over consecutive windows of length tau decay geometrically every three windows.

Window sups are taken over the stored samples plus the dense output at both
window ends, so the sample spacing must be fine compared to tau.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .exceptions import (
    CertificateInvalid,
    HorizonTooShort,
    NotAllToAll,
    PreconditionViolated,
    StepTooLarge,
    ZeroDelay,
)
from .graph import analyze_connectivity
from .integrator import Trajectory, integrate
from .model import FloatArray, SystemParams
from .types import (
    AllToAllRate,
    ContractionLadder,
    LadderFrame,
    StrongCertificate,
    WindowedDiameters,
    WindowLemmaReport,
)

logger = logging.getLogger(__name__)

FRAME_EPSILON = 0.1
FRAME_SHIFT_ROUNDS = 8
HISTORY_POINTS = 65
SAMPLES_PER_DELAY = 8
TOL = 1e-6


def _one_minus_exp(x: float) -> float:
    return -math.expm1(-x)


def gamma_factor(
    xi_star: float, n: int, kappa: float, tau: float, gamma_depth: int, sigma: float
) -> float:
    """Per-window contraction factor Gamma for a window of depth ``gamma_depth``."""
    links = n - 1
    return (
        (xi_star / links) ** gamma_depth
        * math.exp(-2.0 * kappa * gamma_depth * tau)
        * _one_minus_exp(kappa * tau / links) ** (gamma_depth - 1)
        * _one_minus_exp(kappa * sigma / links)
    )


def rate_constants(xi_star: float, n: int, kappa: float, tau: float) -> tuple[float, float, float]:
    """(C, C_tilde, gamma_rate) of the all-to-all decay argument."""
    c = max(
        _one_minus_exp(2.0 * kappa * tau),
        1.0 - xi_star / (n - 1) * _one_minus_exp(kappa * tau),
    )
    c_tilde = 1.0 - math.exp(-kappa * tau) * (1.0 - c)
    return c, c_tilde, math.log(1.0 / c_tilde) / (3.0 * tau)


def _require_delay(params: SystemParams) -> float:
    tau = params.tau_max
    if tau <= 0.0:
        raise ZeroDelay()
    return tau


def _require_spacing(traj: Trajectory, tau: float) -> None:
    needed = tau / SAMPLES_PER_DELAY
    if traj.sample_spacing > needed * (1.0 + 1e-12):
        raise StepTooLarge(
            f"Window sups need sample spacing <= tau/{SAMPLES_PER_DELAY} = {needed:g}, "
            f"run has {traj.sample_spacing:g} (stride {traj.sample_stride}, h {traj.step:g})"
        )


def _window(traj: Trajectory, lo: float, hi: float, freqs: bool) -> FloatArray:
    """All values on [lo, hi]: stored samples, dense output at the ends, history for t <= 0."""
    n = traj.params.n
    vertices = np.arange(n)
    lookup = traj.freqs_at if freqs else traj.phases_at
    parts = []

    if lo < 0.0:
        t = np.linspace(lo, min(hi, 0.0), HISTORY_POINTS)
        parts.append(lookup(np.repeat(t, n), np.tile(vertices, t.size)))
    if hi > 0.0:
        times = traj.sample_times
        a = np.searchsorted(times, max(lo, 0.0), side="left")
        b = np.searchsorted(times, hi, side="right")
        stored = traj.sample_freqs if freqs else traj.sample_phases
        parts.append(stored[a:b].ravel())
        ends = [t for t in (lo, hi) if t > 0.0]
        if ends:
            t = np.asarray(ends)
            parts.append(lookup(np.repeat(t, n), np.tile(vertices, t.size)))
    return np.concatenate(parts)


def _vertex_window(traj: Trajectory, vertex: int, lo: float, hi: float) -> FloatArray:
    """Frequencies of one vertex on [lo, hi], same sampling as :func:`_window`."""
    times = traj.sample_times
    a = np.searchsorted(times, max(lo, 0.0), side="left")
    b = np.searchsorted(times, hi, side="right")
    t = np.array([lo, hi])
    if lo < 0.0:
        t = np.concatenate([t, np.linspace(lo, min(hi, 0.0), HISTORY_POINTS)])
    return np.concatenate(
        [traj.sample_freqs[a:b, vertex], traj.freqs_at(t, np.full(t.size, vertex))]
    )


def _frame_extrema(
    traj: Trajectory, t_star: float, depth: int, tau: float, windows: int
) -> tuple[list[float], list[float]]:
    tau_i = traj.params.tau_i
    upper, lower = [], []
    for k in range(windows):
        hi = t_star + 2.0 * depth * k * tau
        values = np.concatenate(
            [_vertex_window(traj, i, hi - tau_i[i], hi) for i in range(traj.params.n)]
        )
        upper.append(float(values.max()))
        lower.append(float(values.min()))
    return upper, lower


def contraction_ladder(
    cert: StrongCertificate,
    traj: Trajectory,
    topology_depth: int | None = None,
    n_max: int | None = None,
    frame_epsilon: float = FRAME_EPSILON,
) -> ContractionLadder:
    """Measure window extrema M_n, m_n and compare D_{n+1} with (1 - Gamma_n) D_n.

    When the smallest initial window frequency m_0 is below ``frame_epsilon`` the run
    is repeated with every natural frequency raised by c_shift. Delays make the
    measured m_0 move by less than the shift, so c_shift is refined by secant steps
    until m_0 >= frame_epsilon or the rounds run out. Both frames are reported.

    Args:
        cert: Valid certificate of the run's instance
        traj: Completed run
        topology_depth: Digraph depth; computed from the topology when omitted
        n_max: Number of contraction steps; as many as the horizon allows when omitted
        frame_epsilon: Lower bound imposed on m_0 by the frame shift

    Raises:
        CertificateInvalid: If the certificate is not valid or has no entry time
        ZeroDelay: If the run has no delay
        StepTooLarge: If the samples are too coarse for window sups
        HorizonTooShort: If the run ends before the last window needed
        PreconditionViolated: If the topology is not strongly connected or the shifted
            frame still has m_0 <= 0
    """
    if not cert.valid or cert.t_star is None:
        raise CertificateInvalid("Ladder needs a valid certificate with an entry time")
    params = traj.params
    tau = _require_delay(params)
    _require_spacing(traj, tau)
    depth = topology_depth
    if depth is None:
        depth = analyze_connectivity(params.topology).depth
        if depth is None:
            raise PreconditionViolated(["strongly connected topology"])

    t_star = cert.t_star
    period = 2.0 * depth * tau
    available = math.floor((traj.t_end - t_star) / period + 1e-9)
    if n_max is None:
        n_max = available
    if n_max < 1 or n_max > available:
        raise HorizonTooShort(t_star + max(n_max, 1) * period, traj.t_end)
    windows = n_max + 1

    M_orig, m_orig = _frame_extrema(traj, t_star, depth, tau, windows)
    frames = {"original": LadderFrame(c_shift=0.0, M_n=M_orig, m_n=m_orig)}
    c_shift, slope = 0.0, 1.0
    work, M_n, m_n = traj, M_orig, m_orig
    for _ in range(FRAME_SHIFT_ROUNDS):
        if m_n[0] >= frame_epsilon - 1e-12:
            break
        last_c, last_m = c_shift, m_n[0]
        c_shift += (frame_epsilon - last_m) / slope
        work = integrate(params.with_omega(params.omega + c_shift), traj.history, traj.config)
        M_n, m_n = _frame_extrema(work, t_star, depth, tau, windows)
        # secant on m_0(c_shift)
        slope = (m_n[0] - last_m) / (c_shift - last_c)
        if slope <= 0.0:
            break
    if c_shift > 0.0:
        logger.info("ladder: shifted frequencies by %g, m_0 = %g", c_shift, m_n[0])
        if m_n[0] <= 0.0:
            raise PreconditionViolated([f"frame shift keeps m_0 > 0 (m_0 = {m_n[0]:g})"])
        frames["shifted"] = LadderFrame(c_shift=c_shift, M_n=M_n, m_n=m_n)

    n, kappa, r_omega, tau_0 = params.n, params.kappa, work.params.r_omega, params.tau_0

    def sigma_of(spread: float) -> float:
        return min(tau_0, spread / (4.0 * kappa * r_omega))

    D_n = [hi - lo for hi, lo in zip(M_n, m_n)]
    sigma_n = [sigma_of(d) for d in D_n]
    Gamma_n = [gamma_factor(cert.xi_star, n, kappa, tau, depth, s) for s in sigma_n]

    predicted = [D_n[0]]
    for _ in range(n_max):
        d = predicted[-1]
        factor = gamma_factor(cert.xi_star, n, kappa, tau, depth, sigma_of(d))
        predicted.append((1.0 - factor) * d)

    contraction_ok = [D_n[k + 1] <= (1.0 - Gamma_n[k]) * D_n[k] + TOL for k in range(n_max)]
    band_ok = []
    for k in range(n_max):
        hi = t_star + 2.0 * depth * (k + 1) * tau
        values = _window(work, hi - tau, hi, freqs=True)
        half = 0.5 * Gamma_n[k] * D_n[k]
        band_ok.append(
            bool(
                values.min() >= m_n[k] + half - 1e-9 and values.max() <= M_n[k] - half + 1e-9
            )
        )

    ladder = ContractionLadder(
        gamma_depth=depth,
        tau=tau,
        tau_0=tau_0,
        t_star=t_star,
        xi_star=cert.xi_star,
        r_omega=r_omega,
        c_shift=c_shift,
        sigma_n=sigma_n,
        Gamma_n=Gamma_n,
        D_n=D_n,
        M_n=M_n,
        m_n=m_n,
        predicted=predicted,
        contraction_ok=contraction_ok,
        band_ok=band_ok,
        frames=frames,
    )
    logger.info("ladder: %d windows, holds=%s", windows, ladder.holds)
    return ladder


def all_to_all_rate(
    cert: StrongCertificate, params: SystemParams, d_omega_star_0: float
) -> AllToAllRate:
    """Decay constants and envelope of the frequency diameter on the complete digraph.

    Raises:
        NotAllToAll: If the topology is not complete
        ZeroDelay: If tau = 0
        CertificateInvalid: If the certificate is not valid or has no entry time
    """
    if not params.topology.is_all_to_all:
        raise NotAllToAll()
    tau = _require_delay(params)
    if not cert.valid or cert.t_star is None:
        raise CertificateInvalid("Rate needs a valid certificate with an entry time")

    c, c_tilde, gamma_rate = rate_constants(cert.xi_star, params.n, params.kappa, tau)
    return AllToAllRate(
        C=c,
        C_tilde=c_tilde,
        gamma_rate=gamma_rate,
        envelope_scale=math.exp(gamma_rate * (cert.t_star + 2.0 * tau)) * d_omega_star_0,
        t_star=cert.t_star,
        tau=tau,
        d_omega_star_0=d_omega_star_0,
    )


def windowed_diameters(
    traj: Trajectory, t_star: float, tau: float, n_max: int
) -> WindowedDiameters:
    """Sup phase and frequency diameters over [t_* + (n-1) tau, t_* + n tau], n = 0..n_max.

    Raises:
        ZeroDelay: If tau = 0
        StepTooLarge: If the samples are too coarse for window sups
        HorizonTooShort: If the run ends before t_* + n_max tau
    """
    if tau <= 0.0:
        raise ZeroDelay()
    _require_spacing(traj, tau)
    end = t_star + n_max * tau
    if end > traj.t_end * (1.0 + 1e-12) or t_star - tau < traj.t_start:
        raise HorizonTooShort(end, traj.t_end)

    d_theta, d_omega = [], []
    for k in range(n_max + 1):
        lo, hi = t_star + (k - 1) * tau, t_star + k * tau
        d_theta.append(float(np.ptp(_window(traj, lo, hi, freqs=False))))
        d_omega.append(float(np.ptp(_window(traj, lo, hi, freqs=True))))
    return WindowedDiameters(
        t_star=t_star, tau=tau, d_theta_star_n=d_theta, d_omega_star_n=d_omega
    )


def check_window_lemmas(
    traj: Trajectory, t_star: float, rate: AllToAllRate, n_max: int
) -> WindowLemmaReport:
    """Check the four window estimates of the all-to-all decay argument on a run.

    Raises:
        HorizonTooShort: If the run ends before t_* + n_max tau
    """
    tau = rate.tau
    kappa = traj.params.kappa
    wd = windowed_diameters(traj, t_star, tau, n_max)
    d_star = wd.d_omega_star_n
    times = traj.sample_times
    freqs = traj.sample_freqs
    keep = math.exp(-kappa * tau)

    def d_omega_at(t: float) -> float:
        n = traj.params.n
        return float(np.ptp(traj.freqs_at(np.full(n, t), np.arange(n))))

    confinement, recursion, three_window, monotone = [], [], [], []
    for k in range(n_max + 1):
        end = t_star + k * tau
        window = _window(traj, end - tau, end, freqs=True)
        later = freqs[times >= end]
        confinement.append(
            bool(
                later.size == 0
                or (later.min() >= window.min() - 1e-9 and later.max() <= window.max() + 1e-9)
            )
        )
        if k < n_max:
            bound = keep * d_omega_at(end) + (1.0 - keep) * d_star[k]
            recursion.append(d_star[k + 1] <= bound + TOL)
            monotone.append(d_star[k + 1] <= d_star[k] + TOL)
        if k >= 2:
            three_window.append(d_omega_at(end) <= rate.C * d_star[k - 2] + TOL)
    return WindowLemmaReport(
        confinement_ok=confinement,
        recursion_ok=recursion,
        three_window_ok=three_window,
        monotone_ok=monotone,
    )
