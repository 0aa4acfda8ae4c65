"""Orthonormal 8x8 two-dimensional DCT-II and its inverse.

``C[u, v] = a(u) a(v) sum_{x,y} f[x, y] cos((2x+1) u pi / 16) cos((2y+1) v pi / 16)``
with ``a(0) = sqrt(1/8)`` and ``a(k) = sqrt(2/8)`` otherwise.
"""

from __future__ import annotations

import math

import numpy as np

N = 8


def _basis() -> np.ndarray:
    k = np.arange(N)[:, None]
    x = np.arange(N)[None, :]
    table = np.cos((2 * x + 1) * k * np.pi / (2 * N))
    table[0] *= math.sqrt(1.0 / N)
    table[1:] *= math.sqrt(2.0 / N)
    table.setflags(write=False)
    return table


# DCT_MATRIX[u, x] = a(u) cos((2x+1) u pi / 16); rows are orthonormal.
DCT_MATRIX = _basis()


def _check(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.shape[-2:] != (N, N):
        raise ValueError(f"expected trailing shape (8, 8), got {block.shape}")
    return block


def dct2_8x8(block: np.ndarray) -> np.ndarray:
    """Forward transform of one block ``(8, 8)`` or a stack ``(n, 8, 8)``.

    Applied separably: the 1-D transform runs along rows, then along columns.
    """
    block = _check(block)
    rows = block @ DCT_MATRIX.T
    return DCT_MATRIX @ rows


def idct2_8x8(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dct2_8x8`; accepts the same shapes."""
    coeffs = _check(coeffs)
    return DCT_MATRIX.T @ coeffs @ DCT_MATRIX


def _naive_kernel() -> np.ndarray:
    kernel = np.empty((N, N, N, N))
    for u in range(N):
        au = math.sqrt(1.0 / N) if u == 0 else math.sqrt(2.0 / N)
        for v in range(N):
            av = math.sqrt(1.0 / N) if v == 0 else math.sqrt(2.0 / N)
            for x in range(N):
                cx = math.cos((2 * x + 1) * u * math.pi / 16)
                for y in range(N):
                    kernel[u, v, x, y] = au * av * cx * math.cos((2 * y + 1) * v * math.pi / 16)
    return kernel


_NAIVE_KERNEL = _naive_kernel()


def dct2_naive(block: np.ndarray) -> np.ndarray:
    """Direct evaluation of the double-sum definition, 64 x 64 terms per block.

    Test oracle: every (u, v, x, y) term is tabulated with scalar ``math.cos``
    and summed without the row/column factorisation used by :func:`dct2_8x8`.
    """
    return np.einsum("uvxy,...xy->...uv", _NAIVE_KERNEL, _check(block))
