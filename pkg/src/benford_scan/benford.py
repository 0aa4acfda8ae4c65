"""Benford reference distribution, leading digits, pmfs and divergences.

All divergences are in nats; the Jensen-Shannon divergence is therefore
bounded by ``ln 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import (
    EmptyPmfError,
    InvalidBaseError,
    InvalidDistributionError,
    InvalidValueError,
)
from .imaging import partition_blocks, to_greyscale
from .spectral import dct2_8x8

DEFAULT_BASE = 10
# |coefficient| below this has no leading digit and is excluded from the pmf.
EPSILON = 1e-12
LN2 = math.log(2.0)


def _check_base(base: int) -> int:
    if isinstance(base, bool) or int(base) != base or base < 2:
        raise InvalidBaseError(f"base must be an integer >= 2, got {base!r}")
    return int(base)


@dataclass(frozen=True)
class BenfordReference:
    """Theoretical first-digit law ``p(d) = log_b(1 + 1/d)``, d = 1..b-1."""

    base: int
    probs: np.ndarray = field(repr=False)

    @property
    def digits(self) -> np.ndarray:
        return np.arange(1, self.base)


def benford_reference(base: int = DEFAULT_BASE) -> BenfordReference:
    base = _check_base(base)
    d = np.arange(1, base, dtype=np.float64)
    probs = np.log1p(1.0 / d) / math.log(base)
    probs.setflags(write=False)
    return BenfordReference(base=base, probs=probs)


@dataclass(frozen=True)
class LeadingDigitPmf:
    base: int
    counts: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def probs(self) -> np.ndarray:
        total = self.total
        if total == 0:
            raise EmptyPmfError("pmf has no counts")
        return self.counts / total


@dataclass(frozen=True)
class DivergenceScore:
    image_id: str
    js_divergence: float
    coefficient_count: int
    corruption: Optional[str] = None
    severity: Optional[int] = None

    @property
    def normalized(self) -> float:
        """Divergence as a fraction of its ``ln 2`` upper bound."""
        return self.js_divergence / LN2


def leading_digit(x: float, base: int = DEFAULT_BASE, eps: float = EPSILON) -> Optional[int]:
    """First significant digit of ``|x|`` in ``base``; ``None`` when ``|x| < eps``.

    >>> leading_digit(245326)
    2
    >>> leading_digit(-0.0042)
    4
    """
    base = _check_base(base)
    x = float(x)
    if not math.isfinite(x):
        raise InvalidValueError(f"leading digit of non-finite value {x!r}")
    a = abs(x)
    if a < eps:
        return None
    return int(_kernels.leading_digits_numpy(np.array([a]), base, eps, _kernels.power_table(base))[0])


def leading_digits(values, base: int = DEFAULT_BASE, eps: float = EPSILON) -> np.ndarray:
    """Vectorised :func:`leading_digit`; excluded entries are reported as 0."""
    base = _check_base(base)
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if not np.isfinite(arr).all():
        raise InvalidValueError("values contain NaN or Inf")
    return _kernels.leading_digits(arr, base, float(eps), _kernels.power_table(base))


def digit_counts(values, base: int = DEFAULT_BASE, eps: float = EPSILON) -> np.ndarray:
    """Histogram of leading digits 1..base-1 over ``values``."""
    base = _check_base(base)
    arr = np.ascontiguousarray(values, dtype=np.float64).ravel()
    if not np.isfinite(arr).all():
        raise InvalidValueError("values contain NaN or Inf")
    return _kernels.count_digits(arr, base, float(eps), _kernels.power_table(base))


def accumulate_pmf(
    coeffs: np.ndarray,
    base: int = DEFAULT_BASE,
    include_dc: bool = False,
    eps: float = EPSILON,
) -> LeadingDigitPmf:
    """Pool the leading digits of DCT coefficients from all blocks of one image.

    Args:
        coeffs: DCT blocks, shape ``(8, 8)`` or ``(n, 8, 8)``.
        base: Digit base.
        include_dc: Count the (0, 0) coefficient of each block as well.
        eps: Magnitudes below this are skipped.

    Raises:
        EmptyPmfError: no coefficient had a leading digit.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim == 2:
        coeffs = coeffs[None]
    if coeffs.ndim != 3 or coeffs.shape[1:] != (8, 8) or coeffs.shape[0] == 0:
        raise InvalidValueError(f"expected a non-empty stack of 8x8 blocks, got shape {coeffs.shape}")
    flat = coeffs.reshape(coeffs.shape[0], 64)
    if not include_dc:
        flat = flat[:, 1:]
    counts = digit_counts(flat, base, eps)
    if counts.sum() == 0:
        raise EmptyPmfError("no coefficient above the near-zero threshold")
    return LeadingDigitPmf(base=_check_base(base), counts=counts)


def _check_pmf(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidDistributionError(f"{name} must be a non-empty 1-D vector")
    if not np.isfinite(p).all() or (p < 0).any():
        raise InvalidDistributionError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistributionError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats with ``0 log 0 = 0``; infinite if q misses p's support."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if (q[mask] == 0).any():
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence in nats, in ``[0, ln 2]``.

    Symmetric by construction: the two KL terms are summed in a canonical
    order so that ``js_divergence(p, q) == js_divergence(q, p)`` bit for bit.
    """
    p = _check_pmf(p, "p")
    q = _check_pmf(q, "q")
    if p.shape != q.shape:
        raise InvalidDistributionError(f"length mismatch: {p.size} vs {q.size}")
    m = 0.5 * (p + q)
    a = kl_divergence(p, m)
    b = kl_divergence(q, m)
    lo, hi = min(a, b), max(a, b)
    return float(min(max(0.5 * lo + 0.5 * hi, 0.0), LN2))


def score_image(
    img: np.ndarray,
    base: int = DEFAULT_BASE,
    include_dc: bool = False,
    image_id: str = "",
    corruption: Optional[str] = None,
    severity: Optional[int] = None,
) -> DivergenceScore:
    """Divergence of an image's block-DCT leading-digit pmf from Benford's law.

    Colour input is converted to greyscale first.

    Raises:
        ImageTooSmallError: smaller than 8x8.
        EmptyPmfError: no usable coefficient (e.g. a flat image).
    """
    grey = to_greyscale(img)
    coeffs = dct2_8x8(partition_blocks(grey))
    pmf = accumulate_pmf(coeffs, base, include_dc)
    ref = benford_reference(base)
    return DivergenceScore(
        image_id=image_id,
        js_divergence=js_divergence(pmf.probs, ref.probs),
        coefficient_count=pmf.total,
        corruption=corruption,
        severity=severity,
    )
