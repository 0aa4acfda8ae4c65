"""Deterministic synthesis of four common-corruption families.

Families: ``gaussian-noise``, ``contrast``, ``fog`` and ``glass-blur``, each
at severities 1-5 with parameters from a :class:`SeverityTable`. Images are
float arrays in [0, 1], greyscale ``(H, W)`` or colour ``(H, W, C)``; every
corruption keeps the input's shape and channel count.

All randomness comes from a keyed stream derived from
``(seed, image_id, family, severity)``, so a corrupted image depends only on
its inputs and not on the order in which a corpus is processed.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate1d

from . import _kernels
from .errors import (
    ImageTooSmallError,
    InvalidParameterError,
    TableFormatError,
    UnsupportedCorruptionError,
)
from .rng import stream

FAMILIES = ("gaussian-noise", "contrast", "fog", "glass-blur")
SEVERITIES = (1, 2, 3, 4, 5)
MIN_SIZE = 32
TABLE_ENV = "BENFORD_SCAN_TABLE"

FAMILY_PARAMS: dict[str, tuple[str, ...]] = {
    "gaussian-noise": ("sigma",),
    "contrast": ("factor",),
    "fog": ("max_val", "decay"),
    "glass-blur": ("sigma", "max_delta", "iterations"),
}
_INT_PARAMS = {"max_delta", "iterations"}

# ImageNet-C reference parameterisation (Hendrycks & Dietterich, 2019).
DEFAULT_PARAMS: dict[str, dict[str, tuple]] = {
    "gaussian-noise": {"sigma": (0.08, 0.12, 0.18, 0.26, 0.38)},
    "contrast": {"factor": (0.4, 0.3, 0.2, 0.1, 0.05)},
    "fog": {"max_val": (1.5, 2.0, 2.5, 2.5, 3.0), "decay": (2.0, 2.0, 1.7, 1.5, 1.4)},
    "glass-blur": {
        "sigma": (0.7, 0.9, 1.0, 1.1, 1.5),
        "max_delta": (1, 2, 2, 3, 4),
        "iterations": (2, 1, 3, 2, 2),
    },
}


def _check_family(family: str) -> str:
    if family not in FAMILIES:
        raise UnsupportedCorruptionError(
            f"unknown corruption family {family!r}; supported: {', '.join(FAMILIES)}"
        )
    return family


@dataclass(frozen=True)
class CorruptionSpec:
    family: str
    severity: int
    seed: int = 0

    def __post_init__(self) -> None:
        _check_family(self.family)
        if self.severity not in SEVERITIES:
            raise InvalidParameterError(f"severity must be in 1..5, got {self.severity!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


class SeverityTable:
    """Per-family, per-severity corruption parameters.

    The on-disk form is a plain ``key = v1, v2, v3, v4, v5`` text file where
    ``key`` is ``<family>.<parameter>``; ``#`` starts a comment. Keys that are
    absent keep their built-in default.
    """

    def __init__(self, values: dict[str, dict[str, tuple]] | None = None) -> None:
        merged = {fam: dict(params) for fam, params in DEFAULT_PARAMS.items()}
        for fam, params in (values or {}).items():
            _check_family(fam)
            for name, seq in params.items():
                if name not in FAMILY_PARAMS[fam]:
                    raise TableFormatError(f"unknown parameter {fam}.{name}")
                merged[fam][name] = tuple(seq)
        self._values = merged
        self._validate()

    @classmethod
    def default(cls) -> SeverityTable:
        return cls()

    @classmethod
    def parse(cls, text: str) -> SeverityTable:
        values: dict[str, dict[str, tuple]] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise TableFormatError(f"line {lineno}: expected 'family.param = values'")
            key, _, rhs = (part.strip() for part in line.partition("="))
            fam, dot, name = key.partition(".")
            if not dot or fam not in FAMILY_PARAMS or name not in FAMILY_PARAMS[fam]:
                raise TableFormatError(f"line {lineno}: unknown key {key!r}")
            cast = int if name in _INT_PARAMS else float
            try:
                seq = tuple(cast(tok) for tok in rhs.replace(",", " ").split())
            except ValueError as exc:
                raise TableFormatError(f"line {lineno}: {exc}") from exc
            values.setdefault(fam, {})[name] = seq
        return cls(values)

    @classmethod
    def load(cls, path: str | os.PathLike) -> SeverityTable:
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_env(cls, path: str | os.PathLike | None = None) -> SeverityTable:
        """Explicit ``path``, else ``$BENFORD_SCAN_TABLE``, else the defaults."""
        path = path or os.environ.get(TABLE_ENV)
        return cls.load(path) if path else cls.default()

    def _validate(self) -> None:
        for fam, names in FAMILY_PARAMS.items():
            for name in names:
                seq = self._values[fam][name]
                if len(seq) != len(SEVERITIES):
                    raise TableFormatError(f"{fam}.{name}: need 5 values, got {len(seq)}")
        v = self._values

        def monotone(seq, increasing: bool) -> bool:
            pairs = zip(seq, seq[1:])
            return all(a <= b for a, b in pairs) if increasing else all(a >= b for a, b in pairs)

        checks = [
            ("gaussian-noise", "sigma", True),
            ("contrast", "factor", False),
            ("fog", "max_val", True),
            ("fog", "decay", False),
            ("glass-blur", "sigma", True),
            ("glass-blur", "max_delta", True),
        ]
        for fam, name, inc in checks:
            if not monotone(v[fam][name], inc):
                direction = "non-decreasing" if inc else "non-increasing"
                raise TableFormatError(f"{fam}.{name} must be {direction} in severity")
        if any(s < 0 for s in v["gaussian-noise"]["sigma"]):
            raise TableFormatError("gaussian-noise.sigma must be >= 0")
        if any(not 0 < f <= 1 for f in v["contrast"]["factor"]):
            raise TableFormatError("contrast.factor must be in (0, 1]")
        if any(m <= 0 for m in v["fog"]["max_val"]) or any(d <= 1 for d in v["fog"]["decay"]):
            raise TableFormatError("fog needs max_val > 0 and decay > 1")
        g = v["glass-blur"]
        if any(s < 0 for s in g["sigma"]) or any(x < 0 for x in g["max_delta"] + g["iterations"]):
            raise TableFormatError("glass-blur parameters must be >= 0")

    def params(self, family: str, severity: int) -> dict:
        _check_family(family)
        if severity not in SEVERITIES:
            raise InvalidParameterError(f"severity must be in 1..5, got {severity!r}")
        return {name: self._values[family][name][severity - 1] for name in FAMILY_PARAMS[family]}

    def dumps(self) -> str:
        lines = []
        for fam in FAMILIES:
            for name in FAMILY_PARAMS[fam]:
                lines.append(f"{fam}.{name} = " + ", ".join(repr(x) for x in self._values[fam][name]))
        return "\n".join(lines) + "\n"

    def checksum(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SeverityTable) and self.dumps() == other.dumps()

    def __repr__(self) -> str:
        return f"SeverityTable(checksum={self.checksum()[:12]})"


def default_table_text() -> str:
    """Contents of the bundled, commented ``severity_table.cfg``."""
    return resources.files("benford_scan").joinpath("severity_table.cfg").read_text(encoding="utf-8")


# --------------------------------------------------------------------------
# individual corruptions
# --------------------------------------------------------------------------


def _as_float(img) -> np.ndarray:
    return np.array(img, dtype=np.float64, copy=True)


def gaussian_noise(img: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise per pixel and channel, then clamp."""
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    out = _as_float(img)
    if sigma == 0:
        return out
    out += sigma * rng.standard_normal(out.shape)
    return np.clip(out, 0.0, 1.0, out=out)


def contrast(img: np.ndarray, factor: float) -> np.ndarray:
    """Shrink deviations from the global (all-channel) mean by ``factor``."""
    if not 0 < factor <= 1:
        raise InvalidParameterError(f"contrast factor must be in (0, 1], got {factor}")
    out = _as_float(img)
    if factor == 1:
        return out
    mean = out.mean()
    out = (out - mean) * factor + mean
    return np.clip(out, 0.0, 1.0, out=out)


def plasma_fractal(height: int, width: int, decay: float, rng: np.random.Generator) -> np.ndarray:
    """Diamond-square heightmap covering ``height x width``, scaled to [0, 1].

    Runs on the smallest ``(2^k + 1)^2`` grid that covers the image. The
    random displacement at subdivision level ``l`` is uniform on
    ``[-decay^(-2l), decay^(-2l)]``: the reference ImageNet-C generator
    draws ``wibble * uniform(-wibble, wibble)`` and divides ``wibble`` by
    ``decay`` per level, and the default decay values assume that scaling.
    The grid is cropped to the image before normalisation.
    """
    if decay <= 1:
        raise InvalidParameterError(f"decay must be > 1, got {decay}")
    k = max(1, math.ceil(math.log2(max(height, width, 2) - 1)))
    n = 2**k
    grid = np.zeros((n + 1, n + 1))
    grid[::n, ::n] = rng.uniform(-1.0, 1.0, (2, 2))
    step, amp = n, 1.0
    while step > 1:
        half = step // 2
        amp /= decay * decay
        corners = grid[::step, ::step]
        centre = 0.25 * (corners[:-1, :-1] + corners[1:, :-1] + corners[:-1, 1:] + corners[1:, 1:])
        grid[half::step, half::step] = centre + amp * rng.uniform(-1.0, 1.0, centre.shape)

        # Diamond points sit on the edges of each square; neighbours that fall
        # outside the grid are padded with NaN and left out of the mean.
        padded = np.pad(grid, half, constant_values=np.nan)
        for r0, c0 in ((0, half), (half, 0)):
            rows = slice(r0 + half, n + 1 + half, step)
            cols = slice(c0 + half, n + 1 + half, step)
            rs, cs = np.arange(n + 1 + 2 * half)[rows], np.arange(n + 1 + 2 * half)[cols]
            neigh = np.stack(
                [
                    padded[np.ix_(rs - half, cs)],
                    padded[np.ix_(rs + half, cs)],
                    padded[np.ix_(rs, cs - half)],
                    padded[np.ix_(rs, cs + half)],
                ]
            )
            total = np.nansum(neigh, axis=0)
            count = np.sum(~np.isnan(neigh), axis=0)
            noise = amp * rng.uniform(-1.0, 1.0, total.shape)
            grid[r0::step, c0::step] = total / count + noise
        step = half

    layer = grid[:height, :width]
    lo, hi = layer.min(), layer.max()
    if hi - lo <= 0:
        return np.zeros_like(layer)
    return (layer - lo) / (hi - lo)


def fog_layer(
    height: int, width: int, max_val: float, decay: float, rng: np.random.Generator
) -> np.ndarray:
    """Additive fog: a plasma fractal scaled to [0, max_val]."""
    if max_val <= 0:
        raise InvalidParameterError(f"fog max_val must be > 0, got {max_val}")
    return max_val * plasma_fractal(height, width, decay, rng)


def fog(img: np.ndarray, max_val: float, decay: float, rng: np.random.Generator) -> np.ndarray:
    """Add a fog layer and renormalise by ``1 + max_val``.

    Dividing by ``1 + max_val`` maps a unit-maximum image back into [0, 1]
    without looking at the image's own maximum, which keeps the output a
    function of the pixels alone.
    """
    out = _as_float(img)
    layer = fog_layer(out.shape[0], out.shape[1], max_val, decay, rng)
    if out.ndim == 3:
        layer = layer[..., None]
    out = (out + layer) / (1.0 + max_val)
    return np.clip(out, 0.0, 1.0, out=out)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalised 1-D Gaussian, radius ``ceil(4 sigma)``."""
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return np.ones(1)
    radius = math.ceil(4 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur over the two spatial axes, edges replicated."""
    out = _as_float(img)
    if sigma == 0:
        return out
    kernel = gaussian_kernel(sigma)
    out = correlate1d(out, kernel, axis=0, mode="nearest")
    return correlate1d(out, kernel, axis=1, mode="nearest")


def glass_swaps(img: np.ndarray, max_delta: int, iterations: int, rng: np.random.Generator) -> np.ndarray:
    """Local pixel shuffling used by :func:`glass_blur` (a pure permutation).

    Each pass walks the interior pixels in raster order and swaps each with
    the pixel at a random offset ``(dy, dx)``, both uniform on
    ``[-max_delta, max_delta]``. Interior means every such offset stays in
    bounds.
    """
    if max_delta < 0 or iterations < 0:
        raise InvalidParameterError("max_delta and iterations must be >= 0")
    out = _as_float(img)
    height, width = out.shape[:2]
    inner_h, inner_w = height - 2 * max_delta, width - 2 * max_delta
    if max_delta == 0 or iterations == 0 or inner_h <= 0 or inner_w <= 0:
        return out
    offsets = rng.integers(-max_delta, max_delta + 1, size=(iterations, inner_h, inner_w, 2))
    work = out if out.ndim == 3 else out[..., None]
    work = np.ascontiguousarray(work)
    _kernels.glass_swaps(work, offsets.astype(np.int64), int(max_delta))
    return work.reshape(out.shape)


def glass_blur(
    img: np.ndarray, sigma: float, max_delta: int, iterations: int, rng: np.random.Generator
) -> np.ndarray:
    """Blur, shuffle pixels locally ``iterations`` times, blur again, clamp."""
    if sigma < 0:
        raise InvalidParameterError(f"sigma must be >= 0, got {sigma}")
    if max_delta < 0 or iterations < 0:
        raise InvalidParameterError("max_delta and iterations must be >= 0")
    out = gaussian_blur(img, sigma)
    out = glass_swaps(out, max_delta, iterations, rng)
    out = gaussian_blur(out, sigma)
    return np.clip(out, 0.0, 1.0, out=out)


def corrupt(
    img: np.ndarray,
    spec: CorruptionSpec,
    table: SeverityTable | None = None,
    image_id: str = "",
) -> np.ndarray:
    """Apply ``spec`` to ``img``; a pure function of its arguments.

    Raises:
        ImageTooSmallError: either side is shorter than 32 pixels.
        UnsupportedCorruptionError: unknown family.
    """
    img = np.asarray(img, dtype=np.float64)
    _check_family(spec.family)
    if img.ndim not in (2, 3):
        raise InvalidParameterError(f"expected (H, W) or (H, W, C) image, got shape {img.shape}")
    height, width = img.shape[:2]
    if height < MIN_SIZE or width < MIN_SIZE:
        raise ImageTooSmallError(f"image is {width}x{height}; corruptions need at least {MIN_SIZE}x{MIN_SIZE}")
    table = table or SeverityTable.default()
    p = table.params(spec.family, spec.severity)
    rng = stream(spec.seed, image_id, spec.family, spec.severity)
    if spec.family == "gaussian-noise":
        return gaussian_noise(img, p["sigma"], rng)
    if spec.family == "contrast":
        return contrast(img, p["factor"])
    if spec.family == "fog":
        return fog(img, p["max_val"], p["decay"], rng)
    return glass_blur(img, p["sigma"], p["max_delta"], p["iterations"], rng)
