import os
import logging
from typing import Dict, Any, Optional

logger = logging.getLogger(__name__)

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _optional_int(raw: Optional[str]) -> Optional[int]:
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


def load_config() -> Dict[str, Any]:
    """Load runtime configuration from the environment (all variables optional)"""

    # Logging
    HV_LOG_FILE = os.getenv("HV_LOG_FILE", "hv_geodesic.log")
    HV_LOG_LEVEL = os.getenv("HV_LOG_LEVEL", "INFO").upper()

    # Output
    HV_OUTPUT_DIR = os.getenv("HV_OUTPUT_DIR", "out")

    # Solver defaults (command-line flags take precedence)
    HV_MAX_WORKERS = _optional_int(os.getenv("HV_MAX_WORKERS"))
    HV_MAX_ITERS = int(os.getenv("HV_MAX_ITERS", 200))
    HV_KMAX = int(os.getenv("HV_KMAX", 3))

    return {
        "HV_LOG_FILE": HV_LOG_FILE,
        "HV_LOG_LEVEL": HV_LOG_LEVEL,
        "HV_OUTPUT_DIR": HV_OUTPUT_DIR,
        "HV_MAX_WORKERS": HV_MAX_WORKERS,
        "HV_MAX_ITERS": HV_MAX_ITERS,
        "HV_KMAX": HV_KMAX,
    }


def validate_config(config: Dict[str, Any]) -> bool:
    """Validate configuration values"""
    problems = []

    if config["HV_LOG_LEVEL"] not in _LOG_LEVELS:
        problems.append(f"HV_LOG_LEVEL={config['HV_LOG_LEVEL']} (expected one of {sorted(_LOG_LEVELS)})")

    workers = config["HV_MAX_WORKERS"]
    if workers is not None and workers < 1:
        problems.append(f"HV_MAX_WORKERS={workers} (must be at least 1)")

    if problems:
        logger.critical(f"❌ Invalid configuration: {', '.join(problems)}")
        return False

    # Soft limits
    if config["HV_MAX_ITERS"] < 1:
        logger.warning(f"⚠ HV_MAX_ITERS={config['HV_MAX_ITERS']} is not positive; falling back to 200")
        config["HV_MAX_ITERS"] = 200
    if config["HV_KMAX"] < 0:
        logger.warning(f"⚠ HV_KMAX={config['HV_KMAX']} is negative; falling back to 3")
        config["HV_KMAX"] = 3

    return True
