"""Hot inner loops, each in a numba-compiled and a pure-numpy flavour.

The public names at the bottom of the module are bound once at import time
according to ``benford_scan._jit.JIT_ENABLED``. The ``*_jit`` and ``*_numpy``
variants stay importable so tests and the benchmark can compare them.

Leading-digit extraction for a magnitude ``a`` in base ``b``::

    e = floor(log(a) / log(b))
    d = floor(a / b**e)   computed exactly, see below
    shift e by one if d fell outside [1, b-1]

Powers of the base come from a table of correctly rounded ``float(b**k)``
values. ``a / b**e`` is formed as a division (e >= 0) or as a product with
``b**-e`` (e < 0); the floating-point result can round up onto an integer
that the exact quotient does not reach (e.g. the double just below 0.1 times
100 rounds to 10.0), so an error-free product (Dekker's two-product) checks
that case and steps the digit down. The result is exact whenever the power
of the base is exactly representable.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ._jit import JIT_ENABLED, njit

# Exact integer bound of the float range, so the comparison never overflows.
_FLOAT_MAX = int(np.finfo(np.float64).max)


@lru_cache(maxsize=64)
def power_table(base: int) -> np.ndarray:
    """``float(base**k)`` for every k with a finite result."""
    powers = []
    value = 1
    while value <= _FLOAT_MAX:
        powers.append(float(value))
        value *= base
    table = np.array(powers, dtype=np.float64)
    table.setflags(write=False)
    return table


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

# Veltkamp splitting constant 2^27 + 1 for Dekker's exact product.
_SPLIT = 134217729.0
# Above this the splitting step could overflow; skip the exactness fix-up.
_SPLIT_LIMIT = 1e290


@njit
def _two_prod_jit(x, y):
    p = x * y
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    c = _SPLIT * y
    yh = c - (c - y)
    yl = y - yh
    err = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return p, err


@njit
def _floor_quotient_jit(a, e, powers):
    """floor(a / base**e) of the exact real quotient."""
    if e >= 0:
        if e >= powers.size:
            return 0.0
        pw = powers[e]
        d = math.floor(a / pw)
        if d >= 1.0 and a < _SPLIT_LIMIT:
            h, l = _two_prod_jit(d, pw)
            if a - h < l:
                d -= 1.0
        return d
    k = -e
    if k >= powers.size:
        return math.inf
    pw = powers[k]
    if a >= _SPLIT_LIMIT / pw:
        return math.floor(a * pw)
    h, l = _two_prod_jit(a, pw)
    d = math.floor(h)
    if h == d and l < 0.0:
        d -= 1.0
    return d


@njit
def _digit_jit(a, base, log_base, powers):
    e = int(math.floor(math.log(a) / log_base))
    d = _floor_quotient_jit(a, e, powers)
    if d < 1.0:
        d = _floor_quotient_jit(a, e - 1, powers)
    elif d >= base:
        d = _floor_quotient_jit(a, e + 1, powers)
    return int(d)


@njit
def leading_digits_jit(values, base, eps, powers):
    out = np.zeros(values.size, dtype=np.int64)
    log_base = math.log(base)
    flat = values.ravel()
    for i in range(flat.size):
        a = abs(flat[i])
        if a >= eps:
            out[i] = _digit_jit(a, base, log_base, powers)
    return out


@njit
def count_digits_jit(values, base, eps, powers):
    counts = np.zeros(base - 1, dtype=np.int64)
    log_base = math.log(base)
    flat = values.ravel()
    for i in range(flat.size):
        a = abs(flat[i])
        if a >= eps:
            counts[_digit_jit(a, base, log_base, powers) - 1] += 1
    return counts


@njit
def glass_swaps_jit(img, offsets, max_delta):
    height, width, channels = img.shape
    for it in range(offsets.shape[0]):
        for h in range(max_delta, height - max_delta):
            for w in range(max_delta, width - max_delta):
                hp = h + offsets[it, h - max_delta, w - max_delta, 0]
                wp = w + offsets[it, h - max_delta, w - max_delta, 1]
                for c in range(channels):
                    tmp = img[h, w, c]
                    img[h, w, c] = img[hp, wp, c]
                    img[hp, wp, c] = tmp
    return img


# --------------------------------------------------------------------------
# numpy fallbacks
# --------------------------------------------------------------------------


def _two_prod_numpy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = x * y
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    c = _SPLIT * y
    yh = c - (c - y)
    yl = y - yh
    err = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return p, err


def _floor_quotient_numpy(a: np.ndarray, e: np.ndarray, powers: np.ndarray) -> np.ndarray:
    k = np.abs(e)
    in_range = k < powers.size
    pw = powers[np.where(in_range, k, 0)]
    pos = e >= 0
    with np.errstate(over="ignore", invalid="ignore"):
        # e >= 0: divide, then step down if d * pw overshoots a.
        d_div = np.floor(a / pw)
        h, l = _two_prod_numpy(d_div, pw)
        fix = (d_div >= 1.0) & (a < _SPLIT_LIMIT) & (a - h < l)
        d_div = d_div - fix
        # e < 0: multiply, then step down if the exact product is just below an integer.
        h, l = _two_prod_numpy(a, pw)
        d_mul = np.floor(h)
        safe = a < _SPLIT_LIMIT / pw
        d_mul = np.where(safe, d_mul - ((h == d_mul) & (l < 0.0)), np.floor(a * pw))
    d = np.where(pos, d_div, d_mul)
    return np.where(in_range, d, np.where(pos, 0.0, np.inf))


def leading_digits_numpy(values, base, eps, powers) -> np.ndarray:
    flat = np.abs(np.asarray(values, dtype=np.float64).ravel())
    out = np.zeros(flat.size, dtype=np.int64)
    keep = flat >= eps
    a = flat[keep]
    if a.size == 0:
        return out
    e = np.floor(np.log(a) / math.log(base)).astype(np.int64)
    d = _floor_quotient_numpy(a, e, powers)
    low = d < 1
    high = d >= base
    if low.any():
        d[low] = _floor_quotient_numpy(a[low], e[low] - 1, powers)
    if high.any():
        d[high] = _floor_quotient_numpy(a[high], e[high] + 1, powers)
    out[keep] = d.astype(np.int64)
    return out


def count_digits_numpy(values, base, eps, powers) -> np.ndarray:
    digits = leading_digits_numpy(values, base, eps, powers)
    return np.bincount(digits, minlength=base)[1:base].astype(np.int64)


def glass_swaps_numpy(img, offsets, max_delta):
    height, width = img.shape[:2]
    for it in range(offsets.shape[0]):
        for h in range(max_delta, height - max_delta):
            row = offsets[it, h - max_delta]
            for w in range(max_delta, width - max_delta):
                hp = h + row[w - max_delta, 0]
                wp = w + row[w - max_delta, 1]
                tmp = img[h, w].copy()
                img[h, w] = img[hp, wp]
                img[hp, wp] = tmp
    return img


if JIT_ENABLED:
    leading_digits = leading_digits_jit
    count_digits = count_digits_jit
    glass_swaps = glass_swaps_jit
else:
    leading_digits = leading_digits_numpy
    count_digits = count_digits_numpy
    glass_swaps = glass_swaps_numpy
