"""Runtime settings for the decentralized baseband processing simulator.

Settings here describe *how* the simulator runs on this machine, not *what* it
simulates; experiment parameters live in ``schemas.SystemConfig`` and are read
from a TOML file.

Integration Points:

1. Execution:
   - Worker threads that advance cluster programs (DBP_MAX_WORKERS; 1 runs the
     sequential reference schedule)
   - Worker threads for independent Monte-Carlo trials (DBP_TRIAL_WORKERS)

2. Output:
   - Default directory for CSV reports (DBP_OUTPUT_DIR)
   - Default experiment file when --config is not given (DBP_DEFAULT_CONFIG_PATH)

3. Observability:
   - Log level for the CLI (DBP_LOG_LEVEL)
   - Stage timing with slow-stage warnings (DBP_PERFORMANCE_ENABLED,
     DBP_SLOW_OPERATION_MS)
"""

from typing import Optional

from pydantic_settings import BaseSettings

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """
    Simulator settings loaded from environment variables or a ``.env`` file.

    Every field can be overridden with a ``DBP_``-prefixed variable, e.g.
    ``DBP_MAX_WORKERS=4``.
    """

    # Environment Configuration
    environment: str = "development"
    debug: bool = False
    log_level: str = "INFO"

    # Execution - cluster runtime and Monte-Carlo trials
    max_workers: int = 1  # threads advancing cluster programs
    trial_workers: int = 1  # threads running independent trials

    # Output
    output_dir: str = "results"
    default_config_path: Optional[str] = None

    # Performance Monitoring
    performance_enabled: bool = True
    slow_operation_ms: float = 5000.0

    class Config:
        env_prefix = "DBP_"
        env_file = ".env"
        env_file_encoding = "utf-8"

    def validate_runtime_settings(self) -> list[str]:
        """
        Validate settings that pydantic cannot check field by field.

        Returns:
            List of configuration errors (empty if valid)
        """
        errors = []

        if self.max_workers < 1:
            errors.append(f"DBP_MAX_WORKERS must be >= 1, got {self.max_workers}")

        if self.trial_workers < 1:
            errors.append(f"DBP_TRIAL_WORKERS must be >= 1, got {self.trial_workers}")

        if self.log_level.upper() not in _LOG_LEVELS:
            errors.append(f"DBP_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got {self.log_level}")

        if self.slow_operation_ms <= 0:
            errors.append("DBP_SLOW_OPERATION_MS must be positive")

        if self.environment == "production" and self.debug:
            errors.append("DEBUG should be False in production environment")

        return errors


# Global settings instance
settings = Settings()
