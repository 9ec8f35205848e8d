"""Embedded data and run configurations of the ten-oscillator reference scenarios."""

from __future__ import annotations

from typing import Literal, NamedTuple

from pydantic import BaseModel

from .exceptions import UnknownScenario
from .types import DelaySpec, DiagnosticsConfig, IntegrationConfig, RunConfig

# Natural frequencies of the numerical-simulations section, drawn from a zero-centered
# uniform distribution and rounded to three decimals.
OMEGA = (-0.563, 0.839, -0.119, 0.904, -0.493, -0.063, 0.603, 0.979, -0.101, -0.060)

# Same list with the fifth entry as printed there, unrounded.
OMEGA_PRINTED = (-0.563, 0.839, -0.119, 0.904, -0.49349812, -0.063, 0.603, 0.979, -0.101, -0.060)

# Initial phases of the numerical-simulations section, uniform in the half circle.
THETA0 = (1.714, 2.892, 2.684, 1.543, 1.081, 0.007, 2.025, 1.012, 1.228, 1.955)

# Standardized delay matrix of the numerical-simulations section. Row i holds the delays
# on information arriving at oscillator i; the diagonal is never used.
STANDARDIZED_DELAYS = (
    (0.941, 0.432, 0.440, 0.953, 0.497, 0.126, 0.941, 0.501, 0.361, 0.901),
    (0.017, 0.948, 0.088, 0.075, 0.942, 0.478, 0.180, 0.982, 0.335, 0.941),
    (0.459, 0.368, 0.573, 0.911, 0.980, 0.696, 0.368, 0.864, 0.924, 0.543),
    (0.712, 0.871, 0.684, 0.650, 0.381, 0.600, 0.243, 0.120, 0.259, 0.446),
    (0.345, 0.702, 0.383, 0.505, 0.291, 0.089, 0.717, 0.224, 0.465, 0.594),
    (0.673, 0.415, 0.279, 0.893, 0.644, 0.248, 0.768, 0.537, 0.420, 0.097),
    (0.222, 0.105, 0.697, 0.748, 0.436, 0.054, 0.170, 0.945, 0.892, 0.398),
    (0.141, 0.443, 0.434, 0.020, 0.719, 0.657, 0.587, 0.807, 0.821, 0.214),
    (0.070, 0.369, 0.881, 0.776, 0.255, 0.733, 0.567, 0.276, 0.721, 0.284),
    (0.342, 0.202, 0.558, 0.448, 0.632, 0.011, 0.406, 0.038, 0.305, 0.086),
)


class _Row(NamedTuple):
    topology: Literal["all_to_all", "ring"]
    kappa: float
    scale: float
    t_end: float


SCENARIOS: dict[str, _Row] = {
    "a2a_k2_t0": _Row("all_to_all", 2.0, 0.0, 200.0),
    "a2a_k2_t5x": _Row("all_to_all", 2.0, 5.0, 200.0),
    "ring_k2_t0": _Row("ring", 2.0, 0.0, 500.0),
    "ring_k8_t0": _Row("ring", 8.0, 0.0, 500.0),
    "ring_k8_t30x": _Row("ring", 8.0, 30.0, 600.0),
}


class ReferenceScenario(BaseModel):
    """A reference scenario id together with its resolved run configuration."""

    id: str
    config: RunConfig


def scenario_ids() -> list[str]:
    return list(SCENARIOS)


def reference_scenario(
    scenario_id: str, omega_variant: Literal["rounded", "printed"] = "rounded"
) -> ReferenceScenario:
    """Resolve a reference scenario.

    Args:
        scenario_id: One of ``scenario_ids()``
        omega_variant: ``rounded`` uses the three-decimal frequencies, ``printed`` the
            list with its one unrounded entry

    Returns:
        ReferenceScenario with the embedded data and the scenario's coupling, delay scale
        and horizon

    Raises:
        UnknownScenario: If the id is not known
    """
    row = SCENARIOS.get(scenario_id)
    if row is None:
        raise UnknownScenario(scenario_id, known=scenario_ids())
    omega = OMEGA_PRINTED if omega_variant == "printed" else OMEGA
    label = scenario_id if omega_variant == "rounded" else f"{scenario_id}_printed"
    config = RunConfig(
        label=label,
        topology=row.topology,
        omega=list(omega),
        kappa=row.kappa,
        delays=DelaySpec(standardized=True, scale=row.scale),
        history=list(THETA0),
        integration=IntegrationConfig(t_end=row.t_end, dt=0.01),
        diagnostics=DiagnosticsConfig(),
    )
    return ReferenceScenario(id=scenario_id, config=config)
