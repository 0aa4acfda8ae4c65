"""Benford's-law scoring of images for corruption / out-of-distribution screening.

Pipeline: greyscale -> non-overlapping 8x8 blocks -> orthonormal DCT-II ->
leading-digit pmf of the AC coefficients -> Jensen-Shannon divergence from
``log_b(1 + 1/d)``.
"""

__version__ = "0.1.0"

from .benford import (  # noqa: E402
    DEFAULT_BASE,
    EPSILON,
    BenfordReference,
    DivergenceScore,
    LeadingDigitPmf,
    accumulate_pmf,
    benford_reference,
    js_divergence,
    kl_divergence,
    leading_digit,
    leading_digits,
    score_image,
)
from .corruptions import FAMILIES, CorruptionSpec, SeverityTable, corrupt  # noqa: E402
from .imaging import decode_image, partition_blocks, to_greyscale  # noqa: E402
from .spectral import dct2_8x8, dct2_naive, idct2_8x8  # noqa: E402

__all__ = [
    "DEFAULT_BASE",
    "EPSILON",
    "FAMILIES",
    "BenfordReference",
    "CorruptionSpec",
    "DivergenceScore",
    "LeadingDigitPmf",
    "SeverityTable",
    "accumulate_pmf",
    "benford_reference",
    "corrupt",
    "dct2_8x8",
    "dct2_naive",
    "decode_image",
    "idct2_8x8",
    "js_divergence",
    "kl_divergence",
    "leading_digit",
    "leading_digits",
    "partition_blocks",
    "score_image",
    "to_greyscale",
]
