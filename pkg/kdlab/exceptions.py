"""Custom exception hierarchy for kdlab.

Every error carries the process exit code the command-line surface maps it to.
Analysis outcomes (failed certificate conditions, missing synchronization) are
never raised; they are fields of the report records in :mod:`kdlab.types`.
"""

from collections.abc import Sequence


class KdlError(Exception):
    """Base exception for all kdlab errors."""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code


# --- input errors -----------------------------------------------------------


class NonSquareMatrix(KdlError):
    """Raised when an adjacency or delay matrix is not N x N."""

    def __init__(self, message: str = "Matrix is not square"):
        super().__init__(message)


class InvalidAdjacency(KdlError):
    """Raised when an adjacency matrix holds entries other than 0 and 1."""

    def __init__(self, message: str = "Adjacency entries must be 0 or 1"):
        super().__init__(message)


class SelfLoopPresent(KdlError):
    """Raised when an adjacency matrix has a nonzero diagonal entry."""

    def __init__(self, vertex: int):
        super().__init__(f"Self-loop at vertex {vertex + 1} (chi_ii must be 0)")
        self.vertex = vertex


class DimensionMismatch(KdlError):
    """Raised when vectors and matrices of one instance disagree on N."""

    def __init__(self, message: str = "Dimension mismatch"):
        super().__init__(message)


class NegativeValue(KdlError):
    """Raised when a quantity that must be non-negative (or positive) is not."""

    def __init__(self, message: str = "Negative value"):
        super().__init__(message)


class ConfigParseError(KdlError):
    """Raised when a run configuration file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class UnknownScenario(KdlError):
    """Raised when a scenario id is not in the embedded library."""

    def __init__(self, scenario_id: str, known: Sequence[str] = ()):
        hint = f" Known scenarios: {', '.join(known)}." if known else ""
        super().__init__(f"Unknown scenario '{scenario_id}'.{hint}")
        self.scenario_id = scenario_id


class EtaTooSmall(KdlError):
    """Raised when the convex-combination parameter eta is not above 2."""

    def __init__(self, eta: float):
        super().__init__(f"eta must exceed 2 so that beta = 1 - 2/eta > 0 (got {eta})")
        self.eta = eta


class KExceedsM(KdlError):
    """Raised when P(m, k) is requested with k > m."""

    def __init__(self, m: int, k: int):
        super().__init__(f"P(m, k) needs k <= m (got m={m}, k={k})")


# --- numerical / runtime errors --------------------------------------------


class AccessorOutOfRange(KdlError):
    """Raised when a delayed argument falls outside the stored solution."""

    def __init__(self, message: str = "Delayed time precedes the stored history"):
        super().__init__(message)


class OutOfRange(KdlError):
    """Raised when a trajectory is evaluated outside [-tau, t_end]."""

    def __init__(self, t: float, lo: float, hi: float):
        super().__init__(f"t = {t} lies outside the covered range [{lo}, {hi}]")
        self.t = t


class StepTooLarge(KdlError):
    """Raised when the step (or sample spacing) cannot satisfy its constraints."""

    def __init__(self, message: str = "Step size is not positive after constraints"):
        super().__init__(message)


class NonFiniteState(KdlError):
    """Raised when the integrated state overflows or becomes NaN."""

    def __init__(self, t: float):
        super().__init__(f"Non-finite state detected at t = {t}")
        self.t = t


class CoefficientOverflow(KdlError):
    """Raised when convex-combination coefficients overflow 64-bit floats."""

    def __init__(self, n: int, eta: float):
        super().__init__(f"Convex-combination coefficients overflow for N={n}, eta={eta}")


class PreconditionViolated(KdlError):
    """Raised when the min-index ordering is checked outside its hypotheses."""

    def __init__(self, failed: Sequence[str]):
        super().__init__(f"Preconditions violated: {', '.join(failed)}")
        self.failed = list(failed)


class HorizonTooShort(KdlError):
    """Raised when a trajectory does not cover the windows an analysis needs."""

    def __init__(self, needed: float, available: float):
        super().__init__(f"Trajectory ends at t = {available}, analysis needs t = {needed}")
        self.needed = needed
        self.available = available


class CertificateInvalid(KdlError):
    """Raised when an operation needs a valid certificate and gets an invalid one."""

    def __init__(self, message: str = "Certificate is not valid"):
        super().__init__(message)


class NotAllToAll(KdlError):
    """Raised when the all-to-all decay rate is requested on another topology."""

    def __init__(self, message: str = "Topology is not all-to-all"):
        super().__init__(message)


class ZeroDelay(KdlError):
    """Raised when a delay-dependent rate is requested with tau = 0."""

    def __init__(self, message: str = "Rate formula degenerates at tau = 0"):
        super().__init__(message)


class InsufficientSamples(KdlError):
    """Raised when a decay fit has fewer than the required usable samples."""

    def __init__(self, usable: int, required: int = 10):
        super().__init__(f"Decay fit needs {required} usable samples, got {usable}")
        self.usable = usable


class KdlIoError(KdlError):
    """Raised when an output file cannot be written or an input file read."""

    def __init__(self, message: str):
        super().__init__(message)
