"""kdlab - time-delayed Kuramoto oscillators on directed graphs.

Simulate delayed phase oscillators, measure their phase and frequency
spreads, and check closed-form sufficient conditions for frequency
synchronization against simulated runs.

Quick Start:
    >>> from kdlab import reference_scenario, run
    >>>
    >>> result = run(reference_scenario("a2a_k2_t0").config)
    >>> result.report.sync.synced
    True

Building an instance by hand:
    >>> from kdlab import HistorySpec, IntegrationConfig, all_to_all, integrate, make_params
    >>> params = make_params([0.001, -0.001], 5.0, [[0, 1e-4], [1e-4, 0]], all_to_all(2))
    >>> traj = integrate(params, HistorySpec.constant([0.0, 0.3]), IntegrationConfig(t_end=2))
"""

__version__ = "0.1.0"

from .certificates import (
    evaluate_certificate,
    gronwall_envelope,
    predict_t_star,
    search_certificate,
)
from .diagnostics import (
    DiagnosticsSeries,
    check_min_index,
    coefficients,
    convex_combination,
    diagnostics_over,
    freq_diameter,
    natural_freq_diameter,
    order_parameter,
    phase_diameter,
)
from .exceptions import (
    CertificateInvalid,
    ConfigParseError,
    DimensionMismatch,
    KdlError,
    KdlIoError,
    NegativeValue,
    NonSquareMatrix,
    PreconditionViolated,
    UnknownScenario,
)
from .graph import (
    DigraphTopology,
    all_to_all,
    analyze_connectivity,
    build_topology,
    ring,
)
from .integrator import Trajectory, convergence_order, eval_dense, eval_frequency, integrate
from .io import emit_plot_script, load_config, read_csv, write_csv
from .ladder import all_to_all_rate, contraction_ladder, windowed_diameters
from .model import HistorySpec, SystemParams, make_params, rhs
from .rates import fit_decay_rate, sync_detect
from .runner import RunResult, reproduce, run
from .scenarios import ReferenceScenario, reference_scenario, scenario_ids
from .types import IntegrationConfig, RunConfig, RunReport, StrongCertificate

__all__ = [
    # Version
    "__version__",
    # Graph
    "DigraphTopology",
    "build_topology",
    "all_to_all",
    "ring",
    "analyze_connectivity",
    # Model and integration
    "SystemParams",
    "HistorySpec",
    "make_params",
    "rhs",
    "Trajectory",
    "integrate",
    "eval_dense",
    "eval_frequency",
    "convergence_order",
    # Diagnostics
    "DiagnosticsSeries",
    "diagnostics_over",
    "phase_diameter",
    "freq_diameter",
    "natural_freq_diameter",
    "order_parameter",
    "coefficients",
    "convex_combination",
    "check_min_index",
    # Certificates and rates
    "StrongCertificate",
    "evaluate_certificate",
    "search_certificate",
    "predict_t_star",
    "gronwall_envelope",
    "contraction_ladder",
    "all_to_all_rate",
    "windowed_diameters",
    "sync_detect",
    "fit_decay_rate",
    # Scenarios and runs
    "RunConfig",
    "IntegrationConfig",
    "RunReport",
    "RunResult",
    "ReferenceScenario",
    "reference_scenario",
    "scenario_ids",
    "run",
    "reproduce",
    "load_config",
    "write_csv",
    "read_csv",
    "emit_plot_script",
    # Exceptions
    "KdlError",
    "ConfigParseError",
    "DimensionMismatch",
    "NonSquareMatrix",
    "NegativeValue",
    "UnknownScenario",
    "PreconditionViolated",
    "CertificateInvalid",
    "KdlIoError",
]
