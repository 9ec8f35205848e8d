"""Configuration management via environment variables."""

from pydantic_settings import BaseSettings


class KdlSettings(BaseSettings):
    """Process-wide defaults loaded from environment variables.

    Environment variables:
        KDL_THREADS: Run-level parallelism for ``reproduce --scenario all``
            (default: 0, one worker per scenario)
        KDL_LOG_LEVEL: Log level applied by the command line (default: WARNING)
        KDL_DT: Requested integration step when a config omits it (default: 0.01)
        KDL_T_END: Integration horizon when a config omits it (default: 200)
        KDL_SYNC_TOL: Frequency-diameter tolerance for sync detection (default: 1e-6)
        KDL_MAX_SAMPLES: Upper bound on stored output samples (default: 20000)
    """

    threads: int = 0
    log_level: str = "WARNING"
    dt: float = 0.01
    t_end: float = 200.0
    sync_tol: float = 1e-6
    max_samples: int = 20000

    model_config = {"env_prefix": "KDL_"}


settings = KdlSettings()
