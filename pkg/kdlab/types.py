"""Pydantic models for run configuration files and analysis reports."""

from __future__ import annotations

import math
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator
from pydantic_core import PydanticCustomError

from .config import settings

CONDITION_NAMES = ("order", "d_inf_ok", "eta_ok", "tan_ok", "quarter_ok", "kappa_ok")


# --- run configuration ------------------------------------------------------


class OmegaSeed(BaseModel):
    """Natural frequencies drawn uniformly from [low, high] and rounded."""

    seed: int
    n: int = Field(ge=1)
    low: float = -1.0
    high: float = 1.0
    decimals: int | None = 3

    @model_validator(mode="after")
    def check_bounds(self) -> OmegaSeed:
        if self.high < self.low:
            raise PydanticCustomError("value_error", "omega seed needs low <= high")
        return self

    def draw(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        values = rng.uniform(self.low, self.high, self.n)
        if self.decimals is not None:
            values = np.round(values, self.decimals)
        return values


class DelaySpec(BaseModel):
    """Delay matrix given as a multiple of the embedded standardized matrix."""

    standardized: bool = False
    scale: float = Field(default=0.0, ge=0.0)


class SampledHistory(BaseModel):
    """Initial data sampled on a grid of [-tau, 0] with derivatives."""

    times: list[float]
    phases: list[list[float]]
    derivs: list[list[float]]

    @field_validator("times")
    @classmethod
    def validate_times(cls, v: list[float]) -> list[float]:
        if len(v) < 2:
            raise ValueError("sampled history needs at least two samples")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("history times must be strictly increasing")
        if v[-1] != 0.0:
            raise ValueError("history times must end at t = 0")
        return v


class IntegrationConfig(BaseModel):
    """Horizon, requested step and output thinning of one integration.

    ``dt`` and ``t_end`` fall back to KDL_DT and KDL_T_END. ``sample_stride`` left unset is
    chosen by the integrator so that at most KDL_MAX_SAMPLES samples are kept.
    """

    t_end: float = Field(default_factory=lambda: settings.t_end, gt=0.0)
    dt: float = Field(default_factory=lambda: settings.dt, gt=0.0)
    sample_stride: int | None = Field(default=None, ge=1)


class DiagnosticsConfig(BaseModel):
    """Series and verdict options for a run."""

    eta: float | None = Field(default=None, gt=2.0)
    sync_tol: float = Field(default_factory=lambda: settings.sync_tol, gt=0.0)
    sync_window: float | None = Field(default=None, gt=0.0)
    fit_from: float | None = Field(default=None, ge=0.0)


class CertificateSpec(BaseModel):
    """A candidate tuple (zeta, xi, d_inf, eta) for the strong certificate."""

    zeta: float
    xi: float
    d_inf: float
    eta: float = Field(gt=2.0)


class GridSpec(BaseModel):
    """Enumeration grid for the certificate search.

    zeta ranges over the open interval (D_theta(0), pi), xi over (zeta, pi) and d_inf over
    (0, min(pi/2, d_theta(0))), each with the given number of interior points. eta is the
    smallest admissible value for (zeta, xi) times each factor.
    """

    zeta_points: int = Field(default=8, ge=1)
    xi_points: int = Field(default=8, ge=1)
    d_inf_points: int = Field(default=8, ge=1)
    eta_factors: list[float] = Field(default_factory=lambda: [1.01, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0])

    @field_validator("eta_factors")
    @classmethod
    def validate_factors(cls, v: list[float]) -> list[float]:
        if not v or any(f <= 1.0 or not math.isfinite(f) for f in v):
            raise ValueError("eta factors must be finite and greater than 1")
        return v


def _shape(rows: list[list[Any]]) -> tuple[int, set[int]]:
    return len(rows), {len(r) for r in rows}


class RunConfig(BaseModel):
    """Validated contents of a run configuration file."""

    label: str = "run"
    topology: Literal["all_to_all", "ring"] | list[list[int]]
    omega: list[float] | OmegaSeed
    kappa: float = Field(ge=0.0)
    delays: list[list[float]] | DelaySpec = Field(default_factory=DelaySpec)
    history: list[float] | SampledHistory
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    certificate: CertificateSpec | Literal["search"] | None = None
    grid: GridSpec = Field(default_factory=GridSpec)

    @property
    def n(self) -> int:
        if isinstance(self.omega, OmegaSeed):
            return self.omega.n
        return len(self.omega)

    @model_validator(mode="after")
    def check_dimensions(self) -> RunConfig:
        n = self.n
        if n < 1:
            raise PydanticCustomError("dimension_mismatch", "omega must not be empty")

        if isinstance(self.topology, list):
            rows, widths = _shape(self.topology)
            if widths != {rows}:
                raise PydanticCustomError("non_square", "adjacency matrix is not square")
            if rows != n:
                raise PydanticCustomError(
                    "dimension_mismatch",
                    "adjacency is {rows}x{rows} but omega has {n} entries",
                    {"rows": rows, "n": n},
                )

        if isinstance(self.delays, DelaySpec):
            if self.delays.standardized and n != 10:
                raise PydanticCustomError(
                    "dimension_mismatch",
                    "standardized delays are 10x10 but omega has {n} entries",
                    {"n": n},
                )
        else:
            rows, widths = _shape(self.delays)
            if widths != {rows}:
                raise PydanticCustomError("non_square", "delay matrix is not square")
            if rows != n:
                raise PydanticCustomError(
                    "dimension_mismatch",
                    "delay matrix is {rows}x{rows} but omega has {n} entries",
                    {"rows": rows, "n": n},
                )
            if any(x < 0 for row in self.delays for x in row):
                raise PydanticCustomError("negative_value", "delays must be non-negative")

        if isinstance(self.history, SampledHistory):
            k = len(self.history.times)
            for name in ("phases", "derivs"):
                rows, widths = _shape(getattr(self.history, name))
                if rows != k or widths != {n}:
                    raise PydanticCustomError(
                        "dimension_mismatch",
                        "history {name} must be {k}x{n}",
                        {"name": name, "k": k, "n": n},
                    )
        elif len(self.history) != n:
            raise PydanticCustomError(
                "dimension_mismatch",
                "history has {m} entries but omega has {n}",
                {"m": len(self.history), "n": n},
            )
        return self


# --- analysis records ---------------------------------------------------------


class CertificateConditions(BaseModel):
    """Pass/fail state of each hypothesis of the strong certificate."""

    order: bool
    d_inf_ok: bool
    eta_ok: bool
    tan_ok: bool
    quarter_ok: bool
    kappa_ok: bool

    def failed(self) -> list[str]:
        return [name for name in CONDITION_NAMES if not getattr(self, name)]


class StrongCertificate(BaseModel):
    """A candidate (zeta, xi, d_inf, eta) together with every derived constant."""

    zeta: float
    xi: float
    d_inf: float
    eta: float
    beta: float
    c: float
    r_omega: float
    xi_star: float
    tau: float
    kappa: float
    n: int
    d_theta_sup: float
    d_theta_init: float
    d_omega_nat: float
    q0: float | None = None
    conditions: CertificateConditions
    margins: dict[str, float] = Field(default_factory=dict)
    t_star: float | None = None
    envelope_inconclusive: bool = False

    @computed_field
    @property
    def valid(self) -> bool:
        return not self.conditions.failed()

    @property
    def binding(self) -> str:
        """Name of the condition with the smallest margin."""
        return min(CONDITION_NAMES, key=lambda name: self.margins.get(name, math.inf))


class CertificateSearchResult(BaseModel):
    """Outcome of a grid search; ``certificate`` is the best tuple found."""

    found: bool
    certificate: StrongCertificate
    binding: str
    violations: list[str] = Field(default_factory=list)
    evaluated: int = 0


class LadderFrame(BaseModel):
    """Window frequency extrema measured in one rotating frame."""

    c_shift: float
    M_n: list[float]
    m_n: list[float]


class ContractionLadder(BaseModel):
    """Measured and predicted frequency-spread ladder of a certified run."""

    gamma_depth: int
    tau: float
    tau_0: float
    t_star: float
    xi_star: float
    r_omega: float
    c_shift: float
    sigma_n: list[float]
    Gamma_n: list[float]
    D_n: list[float]
    M_n: list[float]
    m_n: list[float]
    predicted: list[float]
    contraction_ok: list[bool]
    band_ok: list[bool]
    frames: dict[str, LadderFrame]

    @property
    def holds(self) -> bool:
        return all(self.contraction_ok) and all(self.band_ok)


class AllToAllRate(BaseModel):
    """Decay constants of the all-to-all argument and the resulting envelope."""

    C: float
    C_tilde: float
    gamma_rate: float
    envelope_scale: float
    t_star: float
    tau: float
    d_omega_star_0: float

    def envelope(self, t: Any) -> Any:
        """Return the bound on the frequency diameter at time(s) ``t``."""
        return self.d_omega_star_0 * np.exp(
            -self.gamma_rate * (np.asarray(t, dtype=float) - self.t_star - 2.0 * self.tau)
        )


class WindowedDiameters(BaseModel):
    """Sup diameters over the windows [t_* + (n-1) tau, t_* + n tau]."""

    t_star: float
    tau: float
    d_theta_star_n: list[float]
    d_omega_star_n: list[float]


class WindowLemmaReport(BaseModel):
    """Per-window checks of the all-to-all decay argument."""

    confinement_ok: list[bool]
    recursion_ok: list[bool]
    three_window_ok: list[bool]
    monotone_ok: list[bool]

    @property
    def holds(self) -> bool:
        return all(
            all(flags)
            for flags in (
                self.confinement_ok,
                self.recursion_ok,
                self.three_window_ok,
                self.monotone_ok,
            )
        )


class MinIndexReport(BaseModel):
    """Both phase-ordering inequalities evaluated for every n."""

    permutation: list[int]
    k_bar: list[int]
    k_under: list[int]
    upper_lhs: list[float]
    upper_rhs: list[float]
    lower_lhs: list[float]
    lower_rhs: list[float]
    upper_ok: list[bool]
    lower_ok: list[bool]

    @property
    def holds(self) -> bool:
        return all(self.upper_ok) and all(self.lower_ok)


class SyncReport(BaseModel):
    """Frequency-synchronization verdict over a trailing window."""

    synced: bool
    t_sync: float | None = None
    tol: float
    window: float
    final_d_omega: float


class DecayFit(BaseModel):
    """Least-squares fit of ln d_omega(t) = intercept - rate * t."""

    rate: float
    r_squared: float
    intercept: float
    t_from: float
    samples: int


class OrderEstimate(BaseModel):
    """Richardson estimate of the observed convergence order."""

    order: float | None
    exact: bool
    step: float
    differences: list[float]


class SelfTestCheck(BaseModel):
    """One line of the self-test output."""

    name: str
    passed: bool
    detail: str = ""


class RunReport(BaseModel):
    """Summary of one simulated configuration."""

    label: str
    n: int
    kappa: float
    tau_max: float
    r_omega: float
    step: float
    n_steps: int
    t_end: float
    strongly_connected: bool
    depth: int | None
    d_omega_nat: float
    d_theta_init: float
    d_omega_init: float
    sync: SyncReport
    fit: DecayFit | None = None
    certificate: StrongCertificate | None = None
    search: CertificateSearchResult | None = None
    rate: AllToAllRate | None = None

    def as_text(self) -> str:
        """Return the report as ``key: value`` lines."""
        lines = [
            f"label: {self.label}",
            f"n: {self.n}",
            f"kappa: {self.kappa:.17g}",
            f"tau_max: {self.tau_max:.17g}",
            f"r_omega: {self.r_omega:.17g}",
            f"step: {self.step:.17g}",
            f"n_steps: {self.n_steps}",
            f"t_end: {self.t_end:.17g}",
            f"strongly_connected: {str(self.strongly_connected).lower()}",
            f"depth: {self.depth if self.depth is not None else 'absent'}",
            f"d_omega_nat: {self.d_omega_nat:.17g}",
            f"d_theta_init: {self.d_theta_init:.17g}",
            f"d_omega_init: {self.d_omega_init:.17g}",
            f"synced: {str(self.sync.synced).lower()}",
            f"t_sync: {_fmt_optional(self.sync.t_sync)}",
            f"sync_tol: {self.sync.tol:.17g}",
            f"final_d_omega: {self.sync.final_d_omega:.17g}",
        ]
        if self.fit is not None:
            lines.append(f"decay_rate: {self.fit.rate:.17g}")
            lines.append(f"decay_r_squared: {self.fit.r_squared:.17g}")
        if self.search is not None:
            lines.append(f"search: {'found' if self.search.found else 'NotFound'}")
            lines.append(f"search_binding: {self.search.binding}")
        if self.certificate is not None:
            lines.extend(certificate_lines(self.certificate))
        if self.rate is not None:
            lines.append(f"C: {self.rate.C:.17g}")
            lines.append(f"C_tilde: {self.rate.C_tilde:.17g}")
            lines.append(f"gamma_rate: {self.rate.gamma_rate:.17g}")
            lines.append(f"envelope_scale: {self.rate.envelope_scale:.17g}")
        return "\n".join(lines) + "\n"


def _fmt_optional(value: float | None) -> str:
    return "absent" if value is None else f"{value:.17g}"


def certificate_lines(cert: StrongCertificate) -> list[str]:
    """Render a certificate as ``key: value`` lines, one per condition."""
    lines = [
        f"zeta: {cert.zeta:.17g}",
        f"xi: {cert.xi:.17g}",
        f"d_inf: {cert.d_inf:.17g}",
        f"eta: {cert.eta:.17g}",
        f"beta: {cert.beta:.17g}",
        f"c: {cert.c:.17g}",
        f"xi_star: {cert.xi_star:.17g}",
    ]
    for name in CONDITION_NAMES:
        flag = "pass" if getattr(cert.conditions, name) else "fail"
        lines.append(f"{name}: {flag} (margin {cert.margins.get(name, math.nan):.6g})")
    lines.append(f"valid: {str(cert.valid).lower()}")
    lines.append(f"t_star: {_fmt_optional(cert.t_star)}")
    if cert.envelope_inconclusive:
        lines.append("envelope_inconclusive: true")
    return lines
