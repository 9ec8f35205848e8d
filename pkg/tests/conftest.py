"""Shared test fixtures: small instances, the certified two-oscillator run, seeded RNGs."""

import numpy as np
import pytest

from kdlab.certificates import evaluate_certificate
from kdlab.graph import all_to_all, ring
from kdlab.integrator import integrate
from kdlab.model import HistorySpec, make_params
from kdlab.types import IntegrationConfig

# Certified two-oscillator instance and its tuple (zeta, xi, d_inf, eta)
CERTIFIED_OMEGA = (0.001, -0.001)
CERTIFIED_KAPPA = 5.0
CERTIFIED_TAU = 1e-4
CERTIFIED_HISTORY = (0.0, 0.3)
CERTIFIED_TUPLE = (0.6, 1.2, 0.29, 4.6)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for property suites."""
    return np.random.default_rng(20240617)


@pytest.fixture
def three_ring():
    """Three-oscillator ring with uniform delay 0.5."""
    return make_params([0.3, -0.2, 0.1], 1.0, np.full((3, 3), 0.5), ring(3))


@pytest.fixture
def certified_params():
    """Parameters of the certified two-oscillator instance."""
    delays = [[0.0, CERTIFIED_TAU], [CERTIFIED_TAU, 0.0]]
    return make_params(CERTIFIED_OMEGA, CERTIFIED_KAPPA, delays, all_to_all(2))


@pytest.fixture
def certified_history() -> HistorySpec:
    """Constant history (0, 0.3)."""
    return HistorySpec.constant(CERTIFIED_HISTORY)


@pytest.fixture
def certified(certified_params, certified_history):
    """Strong certificate of the certified instance."""
    return evaluate_certificate(certified_params, certified_history, *CERTIFIED_TUPLE)


@pytest.fixture(scope="session")
def certified_run():
    """Run of the certified instance past t_* at tau/8 resolution (slow)."""
    delays = [[0.0, CERTIFIED_TAU], [CERTIFIED_TAU, 0.0]]
    params = make_params(CERTIFIED_OMEGA, CERTIFIED_KAPPA, delays, all_to_all(2))
    history = HistorySpec.constant(CERTIFIED_HISTORY)
    config = IntegrationConfig(t_end=1.5, dt=CERTIFIED_TAU / 8, sample_stride=1)
    cert = evaluate_certificate(params, history, *CERTIFIED_TUPLE)
    return cert, integrate(params, history, config)
