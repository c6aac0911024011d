"""Bessel functions of the first kind for integer order.

J_n(x) comes from Miller's downward recurrence
    J_{k-1}(x) = (2k / x) J_k(x) - J_{k+1}(x)
started far above the wanted order, normalised with J_0^2 + 2 sum J_k^2 = 1
and signed with J_0 + 2 sum J_{2k} = 1.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from app.core.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)

MAX_ORDER = 60
MAX_ARGUMENT = 50.0
# below this the ascending series is used instead of the recurrence
SERIES_ARGUMENT = 1e-3
_RESCALE_ABOVE = 1e200


def _miller_start(n_max: int, x: float) -> int:
    reach = max(n_max, x)
    start = int(reach + 20 + 12 * math.sqrt(reach))
    return start + start % 2


def bessel_j_series(n: int, x: float) -> float:
    """Ascending power series, accurate for |x| <= 3."""
    if n < 0:
        raise InvalidParameterError(f"series order must be non-negative, got {n}")
    half = x / 2
    term = 1.0
    for i in range(1, n + 1):
        term *= half / i
    total = term
    k = 0
    while k < 500:
        k += 1
        term *= -(half * half) / (k * (k + n))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def bessel_j_orders(n_max: int, x: float) -> np.ndarray:
    """J_0(x) ... J_{n_max}(x) from a single downward sweep."""
    if not 0 <= n_max <= MAX_ORDER:
        raise InvalidParameterError(f"order must lie in [0, {MAX_ORDER}], got {n_max}")
    if not abs(x) <= MAX_ARGUMENT:
        raise InvalidParameterError(f"argument must satisfy |x| <= {MAX_ARGUMENT}, got {x}")
    ax = abs(float(x))
    if ax < SERIES_ARGUMENT:
        result = np.array([bessel_j_series(n, ax) for n in range(n_max + 1)])
    else:
        start = _miller_start(n_max, ax)
        values = np.zeros(start + 2)
        values[start] = 1.0
        for k in range(start, 0, -1):
            values[k - 1] = (2 * k / ax) * values[k] - values[k + 1]
            if abs(values[k - 1]) > _RESCALE_ABOVE:
                values[k - 1:] /= _RESCALE_ABOVE
        values /= np.max(np.abs(values))
        magnitude = math.sqrt(values[0] ** 2 + 2 * np.sum(values[1:] ** 2))
        sign = math.copysign(1.0, values[0] + 2 * np.sum(values[2::2]))
        result = values[: n_max + 1] * (sign / magnitude)
    if x < 0:
        result[1::2] *= -1
    return result


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for |n| <= 60 and |x| <= 50, absolute error around 1e-15."""
    if abs(n) > MAX_ORDER:
        raise InvalidParameterError(f"order must satisfy |n| <= {MAX_ORDER}, got {n}")
    if x == 0:
        return 1.0 if n == 0 else 0.0
    value = float(bessel_j_orders(abs(n), x)[abs(n)])
    # J_{-n} = (-1)^n J_n
    return -value if n < 0 and n % 2 else value


@lru_cache(maxsize=None)
def j0_first_root(tol: float = 1e-12) -> float:
    """First positive zero of J_0 by bisection on [2, 3] (about 2.404825557695773)."""
    lo, hi = 2.0, 3.0
    f_lo = bessel_j(0, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(0, mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    logger.debug(f"first J0 root {root:.15f}")
    return root
