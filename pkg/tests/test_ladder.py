"""Tests for contraction factors, decay-rate constants and certified-run behavior."""

import math

import numpy as np
import pytest

from kdlab.certificates import gronwall_envelope
from kdlab.diagnostics import diagnostics_over
from kdlab.exceptions import (
    CertificateInvalid,
    HorizonTooShort,
    NotAllToAll,
    StepTooLarge,
    ZeroDelay,
)
from kdlab.graph import all_to_all, ring
from kdlab.integrator import integrate
from kdlab.ladder import (
    all_to_all_rate,
    check_window_lemmas,
    contraction_ladder,
    gamma_factor,
    rate_constants,
    windowed_diameters,
)
from kdlab.model import HistorySpec, make_params
from kdlab.types import IntegrationConfig


def _two_oscillators(tau: float, dt: float, t_end: float = 2.0, kappa: float = 1.0):
    params = make_params([0.2, -0.2], kappa, [[0.0, tau], [tau, 0.0]], all_to_all(2))
    config = IntegrationConfig(t_end=t_end, dt=dt, sample_stride=1)
    return integrate(params, HistorySpec.constant([0.0, 0.5]), config)


class TestGammaFactor:
    """Tests for the per-window contraction factor."""

    def test_all_to_all_value(self):
        """Depth 1, xi_* = 0.9, kappa = 2, tau = 0.1, sigma = 0.05, N = 10."""
        expected = (0.9 / 9) * math.exp(-0.4) * (1.0 - math.exp(-2 * 0.05 / 9))
        assert gamma_factor(0.9, 10, 2.0, 0.1, 1, 0.05) == pytest.approx(expected, rel=1e-12)

    def test_matches_independent_evaluation(self, rng):
        """Gamma agrees with a hand-coded product on 100 points."""
        for _ in range(100):
            xi_star = float(rng.uniform(0.1, 1.0))
            n = int(rng.integers(2, 12))
            kappa = float(rng.uniform(0.5, 10.0))
            tau = float(rng.uniform(0.05, 2.0))
            depth = int(rng.integers(1, 6))
            sigma = float(rng.uniform(0.05, 1.0))
            expected = (xi_star / (n - 1)) ** depth
            expected *= math.exp(-2.0 * kappa * depth * tau)
            expected *= (1.0 - math.exp(-kappa * tau / (n - 1))) ** (depth - 1)
            expected *= 1.0 - math.exp(-kappa * sigma / (n - 1))
            value = gamma_factor(xi_star, n, kappa, tau, depth, sigma)
            assert value == pytest.approx(expected, rel=1e-12)

    def test_in_unit_interval(self, rng):
        """0 < Gamma < 1 for positive tau, sigma and xi_*."""
        for _ in range(100):
            value = gamma_factor(
                float(rng.uniform(0.01, 1.0)),
                int(rng.integers(2, 12)),
                float(rng.uniform(0.1, 10.0)),
                float(rng.uniform(0.01, 2.0)),
                int(rng.integers(1, 6)),
                float(rng.uniform(1e-4, 1.0)),
            )
            assert 0.0 < value < 1.0


class TestRateConstants:
    """Tests for C, C_tilde and gamma_rate."""

    def test_golden_values(self):
        """xi_* = 0.5, N = 10, kappa = 2, tau = 0.1."""
        c, c_tilde, gamma_rate = rate_constants(0.5, 10, 2.0, 0.1)
        assert c == pytest.approx(1.0 - (0.5 / 9) * (1.0 - math.exp(-0.2)), rel=1e-12)
        assert c == pytest.approx(0.98993, abs=1e-5)
        assert c_tilde == pytest.approx(0.99176, abs=1e-5)
        assert gamma_rate == pytest.approx(0.027597, abs=1e-6)

    def test_matches_independent_evaluation(self, rng):
        """C, C_tilde and gamma_rate agree with a hand-coded evaluation on 100 points."""
        for _ in range(100):
            xi_star = float(rng.uniform(0.5, 1.0))
            n = int(rng.integers(2, 6))
            kappa = float(rng.uniform(0.5, 4.0))
            tau = float(rng.uniform(0.1, 0.25))
            keep = math.exp(-kappa * tau)
            c = max(1.0 - keep * keep, 1.0 - xi_star / (n - 1) * (1.0 - keep))
            c_tilde = 1.0 - keep + keep * c
            gamma_rate = -math.log(c_tilde) / (3.0 * tau)
            got = rate_constants(xi_star, n, kappa, tau)
            assert got == pytest.approx((c, c_tilde, gamma_rate), rel=1e-12)

    def test_ranges(self, rng):
        """C and C_tilde lie in (0, 1) and gamma_rate > 0."""
        for _ in range(100):
            c, c_tilde, gamma_rate = rate_constants(
                float(rng.uniform(0.05, 1.0)),
                int(rng.integers(2, 12)),
                float(rng.uniform(0.1, 5.0)),
                float(rng.uniform(0.01, 1.0)),
            )
            assert 0.0 < c < 1.0
            assert 0.0 < c_tilde < 1.0
            assert gamma_rate > 0.0

    def test_rate_vanishes_as_coupling_weakens(self):
        """C_tilde tends to 1 and gamma_rate to 0 as xi_* shrinks."""
        rates = [rate_constants(xi, 10, 2.0, 0.1)[2] for xi in (0.5, 0.1, 0.01, 1e-4)]
        assert all(b < a for a, b in zip(rates, rates[1:]))
        assert rates[-1] < 1e-4


class TestAllToAllRate:
    """Tests for the preconditions of the all-to-all rate."""

    def test_ring_rejected(self, certified):
        """A ring raises NotAllToAll."""
        params = make_params([0.0, 0.0, 0.0], 1.0, np.full((3, 3), 0.1), ring(3))
        with pytest.raises(NotAllToAll):
            all_to_all_rate(certified, params, 1.0)

    def test_zero_delay_rejected(self, certified):
        """tau = 0 raises ZeroDelay."""
        params = make_params([0.001, -0.001], 5.0, None, all_to_all(2))
        with pytest.raises(ZeroDelay):
            all_to_all_rate(certified, params, 1.0)

    def test_invalid_certificate_rejected(self, certified, certified_params):
        """An invalid certificate raises CertificateInvalid."""
        broken = certified.model_copy(
            update={"conditions": certified.conditions.model_copy(update={"tan_ok": False})}
        )
        with pytest.raises(CertificateInvalid):
            all_to_all_rate(broken, certified_params, 1.0)

    def test_envelope_scale(self, certified, certified_params):
        """The envelope equals D*_omega(0) at t_* + 2 tau."""
        rate = all_to_all_rate(certified, certified_params, 0.01)
        assert rate.envelope(certified.t_star + 2e-4) == pytest.approx(0.01, rel=1e-12)
        assert rate.envelope_scale == pytest.approx(
            math.exp(rate.gamma_rate * (certified.t_star + 2e-4)) * 0.01, rel=1e-12
        )


class TestWindowedDiameters:
    """Tests for per-window sup diameters."""

    def test_coarse_samples_rejected(self):
        """Sample spacing above tau/8 raises StepTooLarge."""
        traj = _two_oscillators(tau=0.4, dt=0.1)
        with pytest.raises(StepTooLarge):
            windowed_diameters(traj, 1.0, 0.4, 1)

    def test_horizon_too_short(self):
        """Windows past the end of the run raise HorizonTooShort."""
        traj = _two_oscillators(tau=0.4, dt=0.05)
        with pytest.raises(HorizonTooShort):
            windowed_diameters(traj, 1.0, 0.4, 100)

    def test_uncoupled_run(self):
        """kappa = 0: every window has frequency diameter D(Omega)."""
        traj = _two_oscillators(tau=0.4, dt=0.05, kappa=0.0)
        wd = windowed_diameters(traj, 0.8, 0.4, 3)
        assert wd.d_omega_star_n == pytest.approx([0.4] * 4, abs=1e-12)

    def test_synchronized_run(self):
        """Equal phases at rest: every window has zero diameters."""
        params = make_params([0.0, 0.0], 2.0, np.full((2, 2), 0.4), all_to_all(2))
        traj = integrate(
            params,
            HistorySpec.constant([0.7, 0.7]),
            IntegrationConfig(t_end=2.0, dt=0.05, sample_stride=1),
        )
        wd = windowed_diameters(traj, 1.0, 0.4, 2)
        assert wd.d_omega_star_n == [0.0, 0.0, 0.0]
        assert wd.d_theta_star_n == [0.0, 0.0, 0.0]

    def test_diameters_span_times(self):
        """Identical drifting oscillators: window sups range over time, not only pairs."""
        params = make_params([0.3, 0.3], 2.0, np.full((2, 2), 0.4), all_to_all(2))
        traj = integrate(
            params,
            HistorySpec.constant([0.7, 0.7]),
            IntegrationConfig(t_end=2.0, dt=0.05, sample_stride=1),
        )
        assert np.ptp(traj.sample_freqs, axis=1).max() == pytest.approx(0.0, abs=1e-15)
        wd = windowed_diameters(traj, 1.0, 0.4, 2)
        for k, (d_theta, d_omega) in enumerate(zip(wd.d_theta_star_n, wd.d_omega_star_n)):
            lo, hi = 1.0 + (k - 1) * 0.4, 1.0 + k * 0.4
            inside = (traj.sample_times >= lo - 1e-12) & (traj.sample_times <= hi + 1e-12)
            assert d_omega >= np.ptp(traj.sample_freqs[inside]) - 1e-15
            assert d_theta >= np.ptp(traj.sample_phases[inside]) - 1e-15
            assert d_theta > 0.0


class TestContractionLadder:
    """Tests for window extrema of the ladder."""

    def test_history_interior_extrema(self, certified):
        """A first window reaching into the history sees its interior frequency peak."""
        params = make_params([0.0, 0.0], 1.0, np.full((2, 2), 0.4), all_to_all(2))
        history = HistorySpec.from_callable(
            lambda t: np.stack(
                [t - 12.5 / 3.0 * ((t + 0.2) ** 3 - 0.008), 0.5 * t], axis=1
            ),
            lambda t: np.stack([1.0 - 12.5 * (t + 0.2) ** 2, np.full(np.size(t), 0.5)], axis=1),
            tau=0.4,
            samples=1025,
        )
        traj = integrate(params, history, IntegrationConfig(t_end=1.0, dt=0.01, sample_stride=1))
        at_start = certified.model_copy(update={"t_star": 0.0})
        ladder = contraction_ladder(at_start, traj, n_max=1)
        assert ladder.frames["original"].M_n[0] == pytest.approx(1.0, abs=1e-6)

    def test_shift_reaches_epsilon(self, certified):
        """The shifted frame's m_0 reaches the requested floor despite the delays."""
        params = make_params([0.0, 0.0], 1.0, np.full((2, 2), 0.4), all_to_all(2))
        history = HistorySpec.constant([0.0, 0.3])
        traj = integrate(params, history, IntegrationConfig(t_end=2.0, dt=0.01, sample_stride=1))
        ladder = contraction_ladder(certified.model_copy(update={"t_star": 0.8}), traj, n_max=1)
        original = ladder.frames["original"].m_n[0]
        assert original < 0.1
        assert ladder.m_n[0] >= 0.1 - 1e-9
        assert ladder.c_shift > 0.1 - original


@pytest.mark.slow
class TestCertifiedRun:
    """Simulated behavior of the certified two-oscillator instance."""

    def test_diameter_stays_below_xi(self, certified_run):
        """d_theta < xi at every sample."""
        cert, traj = certified_run
        assert np.ptp(traj.sample_phases, axis=1).max() < cert.xi

    def test_diameter_after_entry_time(self, certified_run):
        """d_theta <= d_inf after t_*."""
        cert, traj = certified_run
        late = traj.sample_times >= cert.t_star
        assert np.ptp(traj.sample_phases[late], axis=1).max() <= cert.d_inf + 1e-6

    def test_q_below_envelope(self, certified_run, certified_params):
        """q_theta(t) <= f(t) at every sample."""
        cert, traj = certified_run
        series = diagnostics_over(traj, eta=cert.eta)
        envelope = gronwall_envelope(cert, cert.q0, certified_params)
        assert np.all(series.q_theta <= envelope(series.times) + 1e-6)

    def test_coupling_cosines(self, certified_run):
        """cos(theta_k(t - tau) - theta_i(t)) >= xi_* after t_* on both arcs."""
        cert, traj = certified_run
        late = traj.sample_times >= cert.t_star
        times = traj.sample_times[late]
        phases = traj.sample_phases[late]
        for i, k in ((0, 1), (1, 0)):
            delayed = traj.phases_at(times - traj.params.delays[i, k], np.full(times.size, k))
            assert np.cos(delayed - phases[:, i]).min() >= cert.xi_star - 1e-9

    def test_frequency_box(self, certified_run):
        """Frequencies after t_* stay inside the first window's extrema."""
        cert, traj = certified_run
        ladder = contraction_ladder(cert, traj, n_max=10)
        m_0, M_0 = ladder.frames["original"].m_n[0], ladder.frames["original"].M_n[0]
        late = traj.sample_times >= cert.t_star
        freqs = traj.sample_freqs[late]
        assert freqs.min() >= m_0 - 1e-9
        assert freqs.max() <= M_0 + 1e-9

    def test_contraction_ladder_holds(self, certified_run):
        """Measured D_{n+1} <= (1 - Gamma_n) D_n with frequencies confined to the band."""
        cert, traj = certified_run
        ladder = contraction_ladder(cert, traj)
        assert ladder.gamma_depth == 1
        assert ladder.holds
        assert "shifted" in ladder.frames
        assert ladder.m_n[0] >= 0.1 - 1e-9
        assert ladder.c_shift > 0.1 - ladder.frames["original"].m_n[0]
        assert all(b <= a for a, b in zip(ladder.predicted, ladder.predicted[1:]))

    def test_rate_envelope(self, certified_run, certified_params):
        """d_omega(t) <= envelope(t) after t_*, and D*(3n) <= C_tilde^n D*(0)."""
        cert, traj = certified_run
        wd = windowed_diameters(traj, cert.t_star, cert.tau, 300)
        rate = all_to_all_rate(cert, certified_params, wd.d_omega_star_n[0])
        series = diagnostics_over(traj)
        late = series.times >= cert.t_star
        bound = rate.envelope(series.times[late]) * (1.0 + 1e-6)
        assert np.all(series.d_omega[late] <= bound)
        d_star = wd.d_omega_star_n
        for n in range(101):
            assert d_star[3 * n] <= rate.C_tilde**n * d_star[0] + 1e-6

    def test_window_estimates(self, certified_run, certified_params):
        """The four window estimates hold on the first 30 windows."""
        cert, traj = certified_run
        d_star_0 = windowed_diameters(traj, cert.t_star, cert.tau, 0).d_omega_star_n[0]
        rate = all_to_all_rate(cert, certified_params, d_star_0)
        assert check_window_lemmas(traj, cert.t_star, rate, 30).holds

    def test_horizon_check(self, certified_run):
        """Asking for more ladder steps than the run covers raises HorizonTooShort."""
        cert, traj = certified_run
        with pytest.raises(HorizonTooShort):
            contraction_ladder(cert, traj, n_max=10_000)
