"""Utility functions for the discriminator toolkit."""

import math
import re
from typing import Sequence

import numpy as np

SIGNIFICANT_DIGITS = 12


def sanitize_filename(name: str) -> str:
    """Sanitize an experiment or cell name for use as a filename."""
    sanitized = re.sub(r'[<>:"/\\|?*\x00-\x1f]', "_", name)
    sanitized = re.sub(r"[_\s]+", "_", sanitized).strip("_")
    if len(sanitized) > 200:
        sanitized = sanitized[:200]
    return sanitized or "unnamed"


def derive_seed(seed: int, index: int) -> int:
    """Independent, reproducible child seed for item ``index`` of a seeded run."""
    state = np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)
    return int(state[0])


def round_sig(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    """Round to ``digits`` significant digits; non-finite values pass through."""
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def moving_average(values: Sequence[float], window: int) -> float:
    """Mean of the last ``window`` values (all of them if fewer)."""
    if not values:
        return math.nan
    tail = values[-window:] if window > 0 else values
    return float(np.mean(tail))


def mean_and_sd(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard deviation (sd 0 for a single value)."""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        return math.nan, math.nan
    sd = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return float(np.mean(array)), sd
