"""Compare the numba kernels with the pure-numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Kernels are timed in-process (both flavours are importable side by side).
The end-to-end ``score_image`` timing runs once per flavour in a child
process with ``BENFORD_SCAN_JIT`` set, because the public entry points are
bound at import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from benford_scan import _kernels
from benford_scan._kernels import power_table

SCORE_SNIPPET = """
import time, numpy as np
from benford_scan import score_image
img = np.random.default_rng(0).random((512, 512, 3))
score_image(img)  # warm-up / JIT compile
t0 = time.perf_counter()
for _ in range({repeat}):
    score_image(img)
print((time.perf_counter() - t0) / {repeat})
"""


def _best(fn, repeat: int) -> float:
    fn()  # warm-up, triggers compilation on the jit side
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_digits(repeat: int) -> tuple[float, float]:
    x = np.random.default_rng(0).laplace(scale=0.05, size=1_000_000)
    powers = power_table(10)
    jit = _best(lambda: _kernels.count_digits_jit(x, 10, 1e-12, powers), repeat)
    ref = _best(lambda: _kernels.count_digits_numpy(x, 10, 1e-12, powers), repeat)
    return jit, ref


def bench_glass(repeat: int) -> tuple[float, float]:
    rng = np.random.default_rng(0)
    img = rng.random((128, 128, 3))
    md, it = 2, 3
    offsets = rng.integers(-md, md + 1, size=(it, 128 - 2 * md, 128 - 2 * md, 2)).astype(np.int64)
    jit = _best(lambda: _kernels.glass_swaps_jit(img.copy(), offsets, md), repeat)
    ref = _best(lambda: _kernels.glass_swaps_numpy(img.copy(), offsets, md), max(1, repeat // 2))
    return jit, ref


def bench_score(repeat: int) -> tuple[float, float]:
    out = []
    for flag in ("1", "0"):
        env = dict(os.environ, BENFORD_SCAN_JIT=flag)
        proc = subprocess.run(
            [sys.executable, "-c", SCORE_SNIPPET.format(repeat=repeat)],
            env=env, capture_output=True, text=True, check=True,
        )
        out.append(float(proc.stdout.strip()))
    return out[0], out[1]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rows = [
        ("count_digits, 1e6 values", bench_digits(args.repeat)),
        ("glass_swaps, 128x128x3, 3 passes", bench_glass(args.repeat)),
        ("score_image, 512x512 RGB", bench_score(args.repeat)),
    ]
    print(f"{'kernel':<36}{'numba ms':>12}{'numpy ms':>12}{'speed-up':>10}")
    for name, (jit, ref) in rows:
        print(f"{name:<36}{jit * 1e3:>12.2f}{ref * 1e3:>12.2f}{ref / jit:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
