"""Application settings and configuration."""

import os
from typing import Dict, Any

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _default_threads() -> int:
    value = os.getenv("COARSE_BEZOUT_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


# Default settings
DEFAULT_SETTINGS: Dict[str, Any] = {
    "tool_name": "coarse-bezout",
    "tool_version": "1.0.0",

    # Parallelism
    "threads": _default_threads(),

    # Extended-exponent arithmetic
    "absorption_gap_bits": 100,
    "exponent_limit": 2 ** 62,
    "truncation_rel_err": 2.0 ** -50,

    # Grids
    "max_grid_cells": 2 ** 28,
    "min_resolution": 16,

    # Zero location
    "contour_initial_points": 64,
    "contour_max_points": 2 ** 18,
    "newton_max_iterations": 200,

    # Logging
    "log_level": os.getenv("COARSE_BEZOUT_LOG_LEVEL", "INFO"),
    "log_dir": os.getenv("COARSE_BEZOUT_LOG_DIR", "logs"),

    # Reports
    "report_schema_path": os.path.join(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
        "schema",
        "report_schema_v1.json",
    ),
}


def get_setting(key: str, default: Any = None) -> Any:
    """Get a setting value."""
    return DEFAULT_SETTINGS.get(key, default)


def update_setting(key: str, value: Any) -> None:
    """Update a setting value."""
    DEFAULT_SETTINGS[key] = value
