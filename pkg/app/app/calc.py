"""
Numeric helpers for the experiment tables.
"""
import math

import numpy as np


def observed_rate(error_coarse, error_fine, ratio=2.0):
    "Observed order log_ratio(e_coarse / e_fine); None if undefined"
    if error_coarse <= 0 or error_fine <= 0:
        return None
    return math.log(error_coarse / error_fine) / math.log(ratio)


def drift_slope(times, errors):
    "Least-squares slope of |errors| against times"
    times = np.asarray(times, dtype=float)
    errors = np.abs(np.asarray(errors, dtype=float))
    if times.size < 2:
        return 0.0
    slope, _ = np.polyfit(times, errors, 1)
    return float(slope)


def max_norm(values):
    "Largest absolute entry, 0 for empty input"
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values))) if values.size else 0.0


GRID_TOL = 1e-9


def grid_steps(span, h):
    "Number of steps of size |h| covering span; ValueError off the grid"
    if h == 0:
        raise ValueError('Step size must be non-zero')
    ratio = span / abs(h)
    steps = round(ratio)
    if steps < 1 or abs(ratio - steps) > GRID_TOL * max(1.0, ratio):
        raise ValueError(
            f'{span:g} is not a whole number of steps of size {abs(h):g}'
        )
    return int(steps)
