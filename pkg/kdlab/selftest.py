"""Built-in numerical checks run by ``kdlab selftest``."""

from __future__ import annotations

import logging

import numpy as np

from .diagnostics import convex_combination, phase_diameter
from .graph import all_to_all, ring
from .integrator import convergence_order, integrate
from .model import HistorySpec, make_params, velocity_bound
from .types import IntegrationConfig, SelfTestCheck

logger = logging.getLogger(__name__)

SMOOTH_ORDER = (3.7, 4.3)
DELAYED_ORDER = 2.7
SANDWICH_STATES = 200


def check_smooth_order() -> SelfTestCheck:
    params = make_params([0.3, -0.2, 0.1], 1.0, None, all_to_all(3))
    history = HistorySpec.constant([0.0, 1.0, 2.0])
    est = convergence_order(params, history, t_check=2.0, dt=0.1)
    lo, hi = SMOOTH_ORDER
    passed = est.order is not None and lo <= est.order <= hi
    return SelfTestCheck(
        name="order_smooth", passed=passed, detail=f"order={est.order} (want [{lo}, {hi}])"
    )


def check_delayed_order() -> SelfTestCheck:
    delays = np.full((3, 3), 0.5)
    params = make_params([0.3, -0.2, 0.1], 1.0, delays, ring(3))
    history = HistorySpec.constant([0.0, 1.0, 2.0])
    est = convergence_order(params, history, t_check=2.5, dt=0.1)
    passed = est.exact or (est.order is not None and est.order >= DELAYED_ORDER)
    return SelfTestCheck(
        name="order_delayed", passed=passed, detail=f"order={est.order} (want >= {DELAYED_ORDER})"
    )


def check_free_drift() -> SelfTestCheck:
    omega = np.array([0.5, -0.25, 1.0, 0.0])
    theta0 = np.array([0.1, 0.2, 0.3, 0.4])
    params = make_params(omega, 0.0, np.full((4, 4), 0.3), all_to_all(4))
    traj = integrate(params, HistorySpec.constant(theta0), IntegrationConfig(t_end=10.0, dt=0.01))
    error = float(np.max(np.abs(traj.phases[-1] - (theta0 + 10.0 * omega))))
    return SelfTestCheck(name="free_drift", passed=error <= 1e-10, detail=f"max error {error:.3g}")


def check_sandwich(seed: int = 0) -> SelfTestCheck:
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(SANDWICH_STATES):
        n = int(rng.integers(2, 9))
        eta = float(rng.uniform(2.05, 10.0))
        phases = rng.uniform(-np.pi, np.pi, n)
        state = convex_combination(phases, eta)
        d = phase_diameter(phases)
        if not (state.beta * d - 1e-9 <= state.q <= d + 1e-9):
            violations += 1
    return SelfTestCheck(
        name="q_sandwich",
        passed=violations == 0,
        detail=f"{violations} violations in {SANDWICH_STATES} states",
    )


def check_velocity_bound() -> SelfTestCheck:
    rng = np.random.default_rng(1)
    n = 6
    delays = rng.uniform(0.1, 1.0, (n, n))
    params = make_params(rng.uniform(-1.0, 1.0, n), 3.0, delays, ring(n))
    history = HistorySpec.constant(rng.uniform(0.0, np.pi, n))
    traj = integrate(params, history, IntegrationConfig(t_end=20.0, dt=0.01))
    worst = float(np.max(np.abs(traj.derivs)))
    bound = velocity_bound(params)
    return SelfTestCheck(
        name="velocity_bound",
        passed=worst <= bound + 1e-12,
        detail=f"max |omega| {worst:.6g} <= {bound:.6g}",
    )


CHECKS = (
    check_smooth_order,
    check_delayed_order,
    check_free_drift,
    check_sandwich,
    check_velocity_bound,
)


def run_selftest() -> list[SelfTestCheck]:
    results = []
    for check in CHECKS:
        result = check()
        logger.info("selftest %s: %s (%s)", result.name, result.passed, result.detail)
        results.append(result)
    return results
