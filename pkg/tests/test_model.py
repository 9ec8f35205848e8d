"""Tests for the delayed vector field, parameters and histories."""

import numpy as np
import pytest

from kdlab.exceptions import AccessorOutOfRange, DimensionMismatch, NegativeValue
from kdlab.graph import all_to_all, build_topology, ring
from kdlab.integrator import integrate
from kdlab.model import HistorySpec, frequency_rhs, make_params, rhs, velocity_bound
from kdlab.scenarios import OMEGA, STANDARDIZED_DELAYS, THETA0
from kdlab.types import IntegrationConfig


class TestSystemParams:
    """Tests for make_params and derived quantities."""

    def test_diagonal_is_zeroed(self):
        """Diagonal delay entries are ignored and stored as zero."""
        params = make_params([0.0, 0.0], 1.0, [[5.0, 1.0], [2.0, 7.0]], all_to_all(2))
        assert params.delays[0, 0] == 0.0 and params.delays[1, 1] == 0.0
        assert params.tau_max == 2.0

    def test_negative_delay_rejected(self):
        """A negative delay raises NegativeValue."""
        with pytest.raises(NegativeValue):
            make_params([0.0, 0.0], 1.0, [[0.0, -1.0], [0.0, 0.0]], all_to_all(2))

    def test_negative_kappa_rejected(self):
        """A negative coupling raises NegativeValue."""
        with pytest.raises(NegativeValue):
            make_params([0.0, 0.0], -1.0, None, all_to_all(2))

    def test_dimension_mismatch(self):
        """Omega of the wrong length raises DimensionMismatch."""
        with pytest.raises(DimensionMismatch):
            make_params([0.0, 0.0, 0.0], 1.0, None, all_to_all(2))

    def test_scaled_standardized_delays(self):
        """Standardized delays times 5 give tau = 4.91."""
        params = make_params(OMEGA, 2.0, 5.0 * np.asarray(STANDARDIZED_DELAYS), all_to_all(10))
        assert params.tau_max == pytest.approx(4.91, abs=1e-12)

    def test_tau_i_and_tau_0(self):
        """tau_i is the largest delay with which vertex i is heard."""
        # vertex 0 hears 1 (delay 0.4) and 2 (delay 0.1); vertex 1 hears 2 (delay 0.3)
        adjacency = np.array([[0, 1, 1], [0, 0, 1], [1, 0, 0]])
        delays = [[0.0, 0.4, 0.1], [9.0, 0.0, 0.3], [0.2, 9.0, 0.0]]
        params = make_params([0.0, 0.0, 0.0], 1.0, delays, build_topology(adjacency))
        assert params.tau_i.tolist() == pytest.approx([0.2, 0.4, 0.3])
        assert params.tau_0 == pytest.approx(0.2)
        assert params.min_active_delay == pytest.approx(0.1)
        assert params.tau_max == pytest.approx(9.0)


class TestRhs:
    """Tests for the phase vector field."""

    def test_two_oscillator_closed_form(self):
        """Omega = 0, kappa = 1, theta = (0, pi/2) gives (1, -1)."""
        params = make_params([0.0, 0.0], 1.0, None, all_to_all(2))
        history = HistorySpec.constant([0.0, np.pi / 2])
        out = rhs(0.0, np.array([0.0, np.pi / 2]), history.accessor(), params)
        assert out == pytest.approx([1.0, -1.0], abs=1e-15)

    def test_identical_phases_give_omega(self):
        """Synchronized phases with matching history reduce rhs to Omega."""
        omega = [0.2, -0.4, 0.7]
        params = make_params(omega, 3.0, np.full((3, 3), 0.6), all_to_all(3))
        history = HistorySpec.constant([1.3, 1.3, 1.3])
        out = rhs(0.0, np.full(3, 1.3), history.accessor(), params)
        assert out == pytest.approx(omega, abs=1e-15)

    def test_ring_at_start(self):
        """Ten-ring at t = 0: Omega_i + kappa/9 sin(theta_{i+1} - theta_i)."""
        params = make_params(OMEGA, 2.0, 5.0 * np.asarray(STANDARDIZED_DELAYS), ring(10))
        history = HistorySpec.constant(THETA0)
        theta = np.asarray(THETA0)
        out = rhs(0.0, theta, history.accessor(), params)
        expected = np.asarray(OMEGA) + (2.0 / 9.0) * np.sin(np.roll(theta, -1) - theta)
        assert out == pytest.approx(expected, abs=1e-14)

    def test_delayed_lookup_before_history_raises(self):
        """A sampled history that stops short of -tau raises AccessorOutOfRange."""
        params = make_params([0.0, 0.0], 1.0, [[0.0, 1.0], [1.0, 0.0]], all_to_all(2))
        history = HistorySpec.sampled([-0.5, 0.0], [[0.0, 0.0], [0.0, 0.0]], [[0, 0], [0, 0]])
        with pytest.raises(AccessorOutOfRange):
            rhs(0.0, np.zeros(2), history.accessor(), params)

    def test_rotation_invariance(self, rng):
        """Adding c to all phases and history values leaves rhs unchanged."""
        params = make_params(rng.uniform(-1, 1, 5), 2.0, rng.uniform(0, 1, (5, 5)), ring(5))
        theta = rng.uniform(0, np.pi, 5)
        base = rhs(0.0, theta, HistorySpec.constant(theta).accessor(), params)
        shifted = rhs(0.0, theta + 0.8, HistorySpec.constant(theta + 0.8).accessor(), params)
        assert shifted == pytest.approx(base, abs=1e-13)

    def test_omega_shift(self, rng):
        """Shifting every Omega_i by c shifts every component by c."""
        params = make_params(rng.uniform(-1, 1, 4), 1.5, rng.uniform(0, 1, (4, 4)), all_to_all(4))
        theta = rng.uniform(0, np.pi, 4)
        accessor = HistorySpec.constant(theta).accessor()
        base = rhs(0.0, theta, accessor, params)
        moved = rhs(0.0, theta, accessor, params.with_omega(params.omega + 0.25))
        assert moved - base == pytest.approx(np.full(4, 0.25), abs=1e-14)


class TestFrequencyRhs:
    """Tests for the differentiated system."""

    def test_equal_frequencies_give_zero(self):
        """All omega equal gives a zero vector."""
        params = make_params([0.0, 0.0, 0.0], 2.0, None, all_to_all(3))
        history = HistorySpec.constant([0.0, 0.4, 1.0])
        out = frequency_rhs(
            0.0,
            np.array([0.0, 0.4, 1.0]),
            np.full(3, 0.7),
            history.accessor(),
            history.freq_accessor(),
            params,
        )
        assert out == pytest.approx(np.zeros(3), abs=1e-15)

    def test_two_oscillator_antisymmetry(self):
        """N = 2, tau = 0, omega = (1, 0): (-kappa c0, kappa c0)."""
        kappa, theta = 3.0, np.array([0.0, 0.5])
        params = make_params([0.0, 0.0], kappa, None, all_to_all(2))
        history = HistorySpec.constant(theta)
        out = frequency_rhs(
            0.0, theta, np.array([1.0, 0.0]), history.accessor(), history.freq_accessor(), params
        )
        c0 = np.cos(0.5)
        assert out == pytest.approx([-kappa * c0, kappa * c0], abs=1e-14)

    def test_matches_finite_difference(self, rng):
        """Matches the centered difference of stored frequencies to O(h^2)."""
        params = make_params(rng.uniform(-1, 1, 4), 2.0, rng.uniform(0.2, 0.5, (4, 4)), ring(4))
        history = HistorySpec.constant(rng.uniform(0, 2, 4))
        traj = integrate(params, history, IntegrationConfig(t_end=4.0, dt=1e-3, sample_stride=1))
        m = traj.grid_index(3.0)
        h = traj.step
        numeric = (traj.derivs[m + 1] - traj.derivs[m - 1]) / (2.0 * h)
        exact = frequency_rhs(
            traj.times[m], traj.phases[m], traj.derivs[m], traj.phases_at, traj.freqs_at, params
        )
        assert numeric == pytest.approx(exact, abs=1e-5)


class TestVelocityBound:
    """Tests for R_omega."""

    @pytest.mark.parametrize("kappa,expected", [(2.0, 2.979), (8.0, 8.979)])
    def test_reference_frequencies(self, kappa: float, expected: float):
        """max |Omega_i| = 0.979 plus kappa."""
        params = make_params(OMEGA, kappa, None, all_to_all(10))
        assert velocity_bound(params) == pytest.approx(expected, abs=1e-12)

    def test_zero_frequencies(self):
        """Omega = 0, kappa = 1 gives 1."""
        params = make_params([0.0, 0.0, 0.0], 1.0, None, ring(3))
        assert velocity_bound(params) == 1.0

    def test_bound_holds_along_run(self, rng):
        """|rhs_i| <= R_omega along an integrated trajectory."""
        params = make_params(rng.uniform(-1, 1, 6), 4.0, rng.uniform(0, 1, (6, 6)), all_to_all(6))
        history = HistorySpec.constant(rng.uniform(0, 3, 6))
        traj = integrate(params, history, IntegrationConfig(t_end=10.0, dt=0.01))
        assert np.abs(traj.derivs).max() <= velocity_bound(params) + 1e-12


class TestHistorySpec:
    """Tests for constant and sampled histories."""

    def test_constant_history_has_zero_frequency(self):
        """Constant history: phases fixed, frequencies zero."""
        history = HistorySpec.constant([0.1, 0.2])
        t = np.array([-3.0, -1.0])
        assert history.phases_at(t, np.array([0, 1])).tolist() == [0.1, 0.2]
        assert history.freqs_at(t, np.array([0, 1])).tolist() == [0.0, 0.0]
        assert history.covers(1e6)

    def test_sampled_history_reproduces_cubics(self):
        """Hermite segments are exact for cubic polynomials."""
        history = HistorySpec.from_callable(
            lambda t: np.stack([t**3, 2.0 * t], axis=1),
            lambda t: np.stack([3.0 * t**2, np.full_like(t, 2.0)], axis=1),
            tau=1.0,
            samples=5,
        )
        t = np.array([-0.9, -0.33, -0.01])
        assert history.phases_at(t, np.zeros(3, dtype=int)) == pytest.approx(t**3, abs=1e-14)
        assert history.freqs_at(t, np.zeros(3, dtype=int)) == pytest.approx(3 * t**2, abs=1e-13)
        assert history.phases_at(t, np.ones(3, dtype=int)) == pytest.approx(2 * t, abs=1e-14)

    def test_sampled_history_range(self):
        """Times before the first sample raise AccessorOutOfRange."""
        history = HistorySpec.sampled([-1.0, 0.0], [[0.0], [1.0]], [[1.0], [1.0]])
        assert history.covers(1.0)
        assert not history.covers(2.0)
        with pytest.raises(AccessorOutOfRange):
            history.phases_at(np.array([-1.5]), np.array([0]))
