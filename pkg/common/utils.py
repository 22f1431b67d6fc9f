"""
Common utility functions for uqflow project.

This module contains small helpers shared by the study runners, the
management commands and the REST views: timing, number formatting and
conversion of numpy values to JSON-compatible Python objects.
"""

import math
import time
from typing import Any, Dict, Optional

import numpy as np

SIGNIFICANT_DIGITS = 6


class Stopwatch:
    """
    Wall-clock timer used as a context manager.

    Example:
        with Stopwatch() as watch:
            run()
        watch.elapsed  # seconds
    """

    def __init__(self):
        self.started: Optional[float] = None
        self.elapsed: float = 0.0

    def __enter__(self) -> 'Stopwatch':
        self.started = time.perf_counter()
        return self

    def __exit__(self, *exc_info):
        self.elapsed = time.perf_counter() - self.started
        return False


def format_significant(value: Any, digits: int = SIGNIFICANT_DIGITS) -> str:
    """
    Format a number with ``digits`` significant digits.

    Args:
        value: Number (or None / non-numeric, passed through as text)
        digits: Significant digits (default 6)

    Returns:
        str: e.g. "3.13665", "1.035e-05"; empty string for None
    """
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return f"{value:.{digits}g}"
    return str(value)


def format_time_duration(seconds: float) -> str:
    """
    Format a duration for log lines.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted string (e.g. "850 ms", "12.3 s", "2m 05s")
    """
    if seconds < 0:
        return "0 ms"
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60.0:
        return f"{seconds:.1f} s"
    minutes, rest = divmod(int(round(seconds)), 60)
    return f"{minutes}m {rest:02d}s"


def to_builtin(value: Any) -> Any:
    """Recursively convert numpy arrays and scalars to lists, floats and ints."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    return value


def relative_speedup(slow: float, fast: float) -> Optional[float]:
    """Ratio slow/fast, or None when the fast timing is zero."""
    if fast <= 0.0:
        return None
    return slow / fast


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of ``base`` with non-None ``overrides`` applied, nested dicts merged."""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged
