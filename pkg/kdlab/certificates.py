"""Strong synchronization certificate.

A certificate is a tuple (zeta, xi, d_inf, eta) checked against six closed-form
hypotheses. When all hold, the convex-combination gap q_theta obeys a Gronwall
envelope and drops to beta * d_inf by a finite time t_*,
after which every coupling cosine stays above xi_* = cos(R_omega * tau + d_inf).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .diagnostics import (
    convex_combination,
    eta_lower_bounds,
    initial_diameters,
    natural_freq_diameter,
    perm_count,
    phase_diameter,
)
from .exceptions import CertificateInvalid, CoefficientOverflow, EtaTooSmall
from .model import FloatArray, HistorySpec, SystemParams
from .types import (
    CertificateConditions,
    CertificateSearchResult,
    GridSpec,
    StrongCertificate,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class _Instance:
    """Instance-level quantities the hypotheses depend on."""

    n: int
    kappa: float
    tau: float
    r_omega: float
    d_theta_sup: float
    d_theta_init: float
    d_omega_nat: float
    theta0: tuple[float, ...]


def _instance(params: SystemParams, history: HistorySpec) -> _Instance:
    theta0 = history.state_at(0.0)
    d_theta_sup, _ = initial_diameters(history, tau=params.tau_max)
    return _Instance(
        n=params.n,
        kappa=params.kappa,
        tau=params.tau_max,
        r_omega=params.r_omega,
        d_theta_sup=d_theta_sup,
        d_theta_init=phase_diameter(theta0),
        d_omega_nat=natural_freq_diameter(params.omega),
        theta0=tuple(theta0.tolist()),
    )


def certificate_constant(n: int, eta: float, xi: float) -> float:
    """c = (sum_{j=1}^{N-1} eta^j P(2N, j) + 1) * xi / sin(xi).

    Infinite outside 0 < xi < pi and when the sum exceeds the float range.
    """
    if not 0.0 < xi < math.pi:
        return math.inf
    try:
        total = sum(eta**j * float(perm_count(2 * n, j)) for j in range(1, n))
    except OverflowError:
        return math.inf
    return (total + 1.0) * xi / math.sin(xi)


def _relative(slack: float, scale: float) -> float:
    """Signed margin in [-1, 1]; positive when the condition holds."""
    if math.isnan(slack):
        return -1.0
    if math.isinf(slack):
        return math.copysign(1.0, slack)
    if scale <= 0:
        return 0.0
    return slack / scale


def _initial_gap(theta0: tuple[float, ...], eta: float) -> float | None:
    try:
        return convex_combination(theta0, eta).q
    except CoefficientOverflow:
        return None


def _certify(
    inst: _Instance, zeta: float, xi: float, d_inf: float, eta: float
) -> StrongCertificate:
    if eta <= 2.0:
        raise EtaTooSmall(eta)
    n = inst.n
    beta = 1.0 - 2.0 / eta
    c = certificate_constant(n, eta, xi)
    rt = inst.r_omega * inst.tau
    trig_ok = rt < HALF_PI
    factor = 1.0 + zeta / (zeta - inst.d_theta_sup) if zeta > inst.d_theta_sup else math.inf
    links = n - 1

    order = inst.d_theta_sup < zeta < xi < math.pi
    d_inf_cap = min(HALF_PI, inst.d_theta_init)
    d_inf_ok = 0.0 < d_inf < d_inf_cap

    eta_bound = max(eta_lower_bounds(zeta, xi, inst.r_omega, inst.tau).values())
    eta_ok = eta > eta_bound

    if links == 0:
        tan_rhs = math.inf
        kappa_rhs = 0.0
    elif trig_ok and d_inf > 0.0 and math.isfinite(factor) and math.isfinite(c):
        tan_rhs = beta * d_inf / (factor * 2.0 * links * c)
        kappa_rhs = (
            factor
            * (inst.d_omega_nat + 2.0 * inst.kappa * math.sin(rt))
            * links
            * c
            / (2.0 * math.cos(rt) * beta * d_inf)
        )
    else:
        tan_rhs = -math.inf
        kappa_rhs = math.inf
    tan_lhs = math.tan(rt) if trig_ok else math.inf
    tan_ok = trig_ok and tan_lhs < tan_rhs
    quarter_ok = d_inf + rt < HALF_PI
    kappa_ok = trig_ok and inst.kappa > kappa_rhs

    margins = {
        "order": min(zeta - inst.d_theta_sup, xi - zeta, math.pi - xi) / math.pi,
        "d_inf_ok": min(d_inf, d_inf_cap - d_inf) / HALF_PI,
        "eta_ok": _relative(eta - eta_bound, eta + eta_bound),
        "tan_ok": _relative(tan_rhs - tan_lhs, abs(tan_rhs) + abs(tan_lhs)),
        "quarter_ok": (HALF_PI - d_inf - rt) / HALF_PI,
        "kappa_ok": _relative(inst.kappa - kappa_rhs, abs(inst.kappa) + abs(kappa_rhs)),
    }
    return StrongCertificate(
        zeta=zeta,
        xi=xi,
        d_inf=d_inf,
        eta=eta,
        beta=beta,
        c=c,
        r_omega=inst.r_omega,
        xi_star=math.cos(rt + d_inf),
        tau=inst.tau,
        kappa=inst.kappa,
        n=n,
        d_theta_sup=inst.d_theta_sup,
        d_theta_init=inst.d_theta_init,
        d_omega_nat=inst.d_omega_nat,
        q0=_initial_gap(inst.theta0, eta),
        conditions=CertificateConditions(
            order=order,
            d_inf_ok=d_inf_ok,
            eta_ok=eta_ok,
            tan_ok=tan_ok,
            quarter_ok=quarter_ok,
            kappa_ok=kappa_ok,
        ),
        margins=margins,
    )


def _with_entry_time(cert: StrongCertificate, params: SystemParams) -> StrongCertificate:
    if not cert.valid:
        return cert
    if cert.q0 is None:
        logger.warning("q_theta(0) is out of float range for N=%d; t_star left absent", cert.n)
        return cert
    t_star = predict_t_star(cert, cert.q0, cert.d_omega_nat, params)
    if math.isinf(t_star):
        logger.warning("all conditions pass but beta*d_inf <= A; envelope inconclusive")
        return cert.model_copy(update={"envelope_inconclusive": True})
    return cert.model_copy(update={"t_star": t_star})


def evaluate_certificate(
    params: SystemParams,
    history: HistorySpec,
    zeta: float,
    xi: float,
    d_inf: float,
    eta: float,
) -> StrongCertificate:
    """Evaluate every hypothesis for one tuple; failures are reported, not raised.

    Raises:
        EtaTooSmall: If eta <= 2
    """
    cert = _with_entry_time(_certify(_instance(params, history), zeta, xi, d_inf, eta), params)
    logger.info(
        "certificate (zeta=%g, xi=%g, d_inf=%g, eta=%g): valid=%s failed=%s",
        zeta,
        xi,
        d_inf,
        eta,
        cert.valid,
        cert.conditions.failed(),
    )
    return cert


def envelope_constants(
    cert: StrongCertificate, d_omega_nat: float, params: SystemParams
) -> tuple[float, float]:
    """(lambda, A) of the envelope q0 exp(-lambda t) + A (1 - exp(-lambda t))."""
    rt = params.r_omega * params.tau_max
    links = params.n - 1
    lam = 2.0 * params.kappa * math.cos(rt) / (links * cert.c)
    limit = (
        (d_omega_nat + 2.0 * params.kappa * math.sin(rt))
        * links
        * cert.c
        / (2.0 * params.kappa * math.cos(rt))
    )
    return lam, limit


def predict_t_star(
    cert: StrongCertificate, q0: float, d_omega_nat: float, params: SystemParams
) -> float:
    """Smallest t with f(t) <= beta * d_inf; infinite when the envelope never gets there.

    Raises:
        CertificateInvalid: If the certificate fails any condition
    """
    if not cert.valid:
        raise CertificateInvalid(f"Certificate fails {', '.join(cert.conditions.failed())}")
    target = cert.beta * cert.d_inf
    if q0 <= target:
        return 0.0
    lam, limit = envelope_constants(cert, d_omega_nat, params)
    if target <= limit:
        return math.inf
    return math.log((q0 - limit) / (target - limit)) / lam


@dataclass(frozen=True)
class GronwallEnvelope:
    """f(t) = q0 exp(-lambda t) + A (1 - exp(-lambda t)) with bound max(d_theta(0), A)."""

    q0: float
    lam: float
    limit: float
    uniform_bound: float

    def __call__(self, t: ArrayLike) -> FloatArray | float:
        decay = np.exp(-self.lam * np.asarray(t, dtype=np.float64))
        out = self.q0 * decay + self.limit * (1.0 - decay)
        return float(out) if out.ndim == 0 else out


def gronwall_envelope(cert: StrongCertificate, q0: float, params: SystemParams) -> GronwallEnvelope:
    """Envelope of q_theta along a certified run.

    Raises:
        CertificateInvalid: If the certificate fails any condition
    """
    if not cert.valid:
        raise CertificateInvalid(f"Certificate fails {', '.join(cert.conditions.failed())}")
    lam, limit = envelope_constants(cert, cert.d_omega_nat, params)
    return GronwallEnvelope(
        q0=q0, lam=lam, limit=limit, uniform_bound=max(cert.d_theta_init, limit)
    )


def _interior(lo: float, hi: float, points: int) -> list[float]:
    return [lo + (hi - lo) * k / (points + 1) for k in range(1, points + 1)]


def search_certificate(
    params: SystemParams,
    history: HistorySpec,
    grid: GridSpec | None = None,
) -> CertificateSearchResult:
    """Enumerate (zeta, xi, eta, d_inf) and keep the tuple whose tightest margin is largest.

    Ties keep the earlier tuple in enumeration order, so the result is deterministic.
    """
    grid = grid or GridSpec()
    inst = _instance(params, history)
    d_inf_values = _interior(0.0, min(HALF_PI, inst.d_theta_init), grid.d_inf_points)

    best: StrongCertificate | None = None
    best_score = -math.inf
    evaluated = 0
    for zeta in _interior(inst.d_theta_sup, math.pi, grid.zeta_points):
        for xi in _interior(zeta, math.pi, grid.xi_points):
            bounds = eta_lower_bounds(zeta, xi, inst.r_omega, inst.tau)
            floor = max([2.0, *(b for b in bounds.values() if math.isfinite(b))])
            for factor in grid.eta_factors:
                for d_inf in d_inf_values:
                    cert = _certify(inst, zeta, xi, d_inf, floor * factor)
                    evaluated += 1
                    score = min(cert.margins.values())
                    if score > best_score:
                        best, best_score = cert, score

    best = _with_entry_time(best, params)
    found = best.valid and not best.envelope_inconclusive
    logger.info(
        "certificate search: %s after %d tuples, binding constraint %s (margin %.3g)",
        "found" if found else "NotFound",
        evaluated,
        best.binding,
        best_score,
    )
    return CertificateSearchResult(
        found=found,
        certificate=best,
        binding=best.binding,
        violations=best.conditions.failed(),
        evaluated=evaluated,
    )

