"""Run orchestration: config to trajectory, diagnostics and report."""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .certificates import evaluate_certificate, search_certificate
from .config import settings
from .diagnostics import DiagnosticsSeries, diagnostics_over
from .exceptions import HorizonTooShort, InsufficientSamples, KdlIoError, StepTooLarge
from .graph import DigraphTopology, all_to_all, analyze_connectivity, build_topology, ring
from .integrator import Trajectory, integrate
from .io import emit_plot_script, write_csv, write_report
from .ladder import all_to_all_rate, windowed_diameters
from .model import HistorySpec, SystemParams, make_params
from .rates import fit_decay_rate, sync_detect
from .scenarios import STANDARDIZED_DELAYS, reference_scenario, scenario_ids
from .types import (
    AllToAllRate,
    CertificateSearchResult,
    CertificateSpec,
    DecayFit,
    OmegaSeed,
    RunConfig,
    RunReport,
    SampledHistory,
    StrongCertificate,
    SyncReport,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RunResult:
    """Everything one run produces."""

    trajectory: Trajectory
    series: DiagnosticsSeries
    report: RunReport


def _topology(config: RunConfig) -> DigraphTopology:
    if config.topology == "all_to_all":
        return all_to_all(config.n)
    if config.topology == "ring":
        return ring(config.n)
    return build_topology(config.topology)


def build_instance(config: RunConfig) -> tuple[SystemParams, HistorySpec]:
    """Resolve a config into system parameters and initial data.

    Raises:
        NonSquareMatrix, InvalidAdjacency, SelfLoopPresent: For a bad explicit adjacency
        DimensionMismatch, NegativeValue: If the resolved arrays are inconsistent
    """
    omega = config.omega.draw() if isinstance(config.omega, OmegaSeed) else config.omega
    if isinstance(config.delays, list):
        delays = np.asarray(config.delays, dtype=np.float64)
    elif config.delays.standardized:
        delays = config.delays.scale * np.asarray(STANDARDIZED_DELAYS)
    else:
        delays = None
    params = make_params(omega, config.kappa, delays, _topology(config))

    if isinstance(config.history, SampledHistory):
        history = HistorySpec.sampled(
            config.history.times, config.history.phases, config.history.derivs
        )
    else:
        history = HistorySpec.constant(config.history)
    return params, history


def _certificate(
    config: RunConfig, params: SystemParams, history: HistorySpec
) -> tuple[StrongCertificate | None, CertificateSearchResult | None]:
    if isinstance(config.certificate, CertificateSpec):
        spec = config.certificate
        cert = evaluate_certificate(params, history, spec.zeta, spec.xi, spec.d_inf, spec.eta)
        return cert, None
    if config.certificate == "search":
        result = search_certificate(params, history, config.grid)
        return result.certificate, result
    return None, None


def _rate(
    cert: StrongCertificate | None, params: SystemParams, traj: Trajectory
) -> AllToAllRate | None:
    if cert is None or cert.t_star is None or not cert.valid:
        return None
    if not params.topology.is_all_to_all or params.tau_max <= 0.0:
        return None
    try:
        window = windowed_diameters(traj, cert.t_star, params.tau_max, 0)
    except (StepTooLarge, HorizonTooShort) as e:
        logger.warning("all-to-all rate skipped: %s", e.message)
        return None
    return all_to_all_rate(cert, params, window.d_omega_star_n[0])


def _fit(config: RunConfig, series: DiagnosticsSeries, sync: SyncReport) -> DecayFit | None:
    t_from = config.diagnostics.fit_from
    t_to = None
    if t_from is None:
        if not sync.synced or not sync.t_sync:
            return None
        # decay segment ahead of the tolerance crossing
        t_from, t_to = 0.5 * sync.t_sync, sync.t_sync
    try:
        return fit_decay_rate(series, t_from=t_from, t_to=t_to)
    except InsufficientSamples as e:
        logger.warning("decay fit skipped: %s", e.message)
        return None


def run(config: RunConfig) -> RunResult:
    """Integrate one configuration and derive every report it asks for.

    Deterministic for a fixed config.

    Raises:
        KdlError: Propagated from instance building, integration or certificate evaluation
    """
    params, history = build_instance(config)
    traj = integrate(params, history, config.integration)

    cert, search = _certificate(config, params, history)
    eta = config.diagnostics.eta
    if eta is None and cert is not None:
        eta = cert.eta
    series = diagnostics_over(traj, eta=eta)
    sync = sync_detect(series, config.diagnostics.sync_tol, config.diagnostics.sync_window)
    connectivity = analyze_connectivity(params.topology)

    report = RunReport(
        label=config.label,
        n=params.n,
        kappa=params.kappa,
        tau_max=params.tau_max,
        r_omega=params.r_omega,
        step=traj.step,
        n_steps=traj.n_steps,
        t_end=traj.t_end,
        strongly_connected=connectivity.strongly_connected,
        depth=connectivity.depth,
        d_omega_nat=series.d_omega_nat,
        d_theta_init=series.d_theta_init,
        d_omega_init=series.d_omega_init,
        sync=sync,
        fit=_fit(config, series, sync),
        certificate=cert,
        search=search,
        rate=_rate(cert, params, traj),
    )
    return RunResult(trajectory=traj, series=series, report=report)


def write_outputs(result: RunResult, out_dir: str | Path, stem: str) -> list[Path]:
    """Write ``<stem>.csv``, both report files and ``<stem>_plot.py`` into ``out_dir``.

    Raises:
        KdlIoError: If the directory or a file cannot be written
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise KdlIoError(f"Cannot create {out_dir}: {e}") from e
    csv_path = write_csv(result.series, result.trajectory, out_dir / f"{stem}.csv")
    return [
        csv_path,
        write_report(result.report, out_dir / f"{stem}.report.txt"),
        write_report(result.report, out_dir / f"{stem}.report.json"),
        emit_plot_script(csv_path, out_dir / f"{stem}_plot.py"),
    ]


def _reproduce_one(scenario_id: str, out_dir: Path) -> RunResult:
    start = time.perf_counter()
    logger.info("scenario %s: started", scenario_id)
    result = run(reference_scenario(scenario_id).config)
    write_outputs(result, out_dir, scenario_id)
    logger.info(
        "scenario %s: finished in %.2fs (synced=%s)",
        scenario_id,
        time.perf_counter() - start,
        result.report.sync.synced,
    )
    return result


def reproduce(ids: Sequence[str] | None, out_dir: str | Path) -> dict[str, RunResult]:
    """Run reference scenarios and write their outputs, one worker process per scenario.

    Args:
        ids: Scenario ids; None runs all of them
        out_dir: Directory receiving the per-scenario files

    Returns:
        Results keyed by scenario id, in the order given

    Raises:
        UnknownScenario: If an id is not known (checked before any run starts)
    """
    ids = list(ids) if ids is not None else scenario_ids()
    for scenario_id in ids:
        reference_scenario(scenario_id)
    out_dir = Path(out_dir)
    workers = min(settings.threads or len(ids), len(ids)) or 1
    if workers == 1:
        return {sid: _reproduce_one(sid, out_dir) for sid in ids}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {sid: pool.submit(_reproduce_one, sid, out_dir) for sid in ids}
        return {sid: future.result() for sid, future in futures.items()}
