"""Raster decode/encode, greyscale conversion and 8x8 block partitioning.

Images are float64 ndarrays with values in [0, 1]: shape ``(H, W)`` for
greyscale and ``(H, W, 3)`` for colour. Alpha channels are dropped.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageDecodeError, ImageReadError, ImageTooSmallError, InvalidParameterError

BLOCK = 8
# ITU-R BT.601 luma weights.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def decode_image(path: str | os.PathLike) -> np.ndarray:
    """Decode a PNG or JPEG file into a float image scaled to [0, 1].

    Greyscale sources (with or without alpha) give a 2-D array, everything
    else an ``(H, W, 3)`` RGB array. 16-bit greyscale is scaled by 65535.

    Raises:
        ImageReadError: the file cannot be opened or read.
        ImageDecodeError: the bytes are not a complete PNG/JPEG raster.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageReadError(path, exc.strerror or str(exc)) from exc
    try:
        with Image.open(io.BytesIO(data)) as im:
            if im.format not in ("PNG", "JPEG"):
                raise ImageDecodeError(path, f"unsupported format {im.format!r}")
            im.load()
            return _to_array(im)
    except ImageDecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(path, str(exc)) from exc


def _to_array(im: Image.Image) -> np.ndarray:
    mode = im.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(im, dtype=np.float64)
        scale = 65535.0 if mode.startswith("I;16") or arr.max(initial=0) > 255 else 255.0
        return np.clip(arr / scale, 0.0, 1.0)
    if mode in ("1", "L", "LA", "La"):
        return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    if mode != "RGB":
        im = im.convert("RGB")
    arr = np.asarray(im, dtype=np.float64)[..., :3]
    return arr / 255.0


def to_greyscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luminance of an RGB image; 2-D input is returned unchanged."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim != 3 or img.shape[2] not in (3, 4):
        raise InvalidParameterError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")
    grey = img[..., :3] @ LUMA_WEIGHTS
    return np.clip(grey, 0.0, 1.0)


def partition_blocks(img: np.ndarray) -> np.ndarray:
    """Split a greyscale image into non-overlapping 8x8 blocks.

    Returns an array of shape ``(rows * cols, 8, 8)`` in row-major block
    order. Trailing rows/columns that do not fill a block are dropped.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidParameterError(f"partition_blocks expects a 2-D image, got shape {img.shape}")
    height, width = img.shape
    if height < BLOCK or width < BLOCK:
        raise ImageTooSmallError(f"image is {width}x{height}; need at least {BLOCK}x{BLOCK}")
    rows, cols = height // BLOCK, width // BLOCK
    cropped = img[: rows * BLOCK, : cols * BLOCK]
    blocks = cropped.reshape(rows, BLOCK, cols, BLOCK).swapaxes(1, 2)
    return np.ascontiguousarray(blocks.reshape(rows * cols, BLOCK, BLOCK))


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def _to_pil(img: np.ndarray) -> Image.Image:
    arr = to_uint8(img)
    return Image.fromarray(arr, mode="L" if arr.ndim == 2 else "RGB")


def encode_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    _to_pil(img).save(buf, format="PNG")
    return buf.getvalue()


def encode_jpeg(img: np.ndarray, quality: int = 85) -> bytes:
    buf = io.BytesIO()
    _to_pil(img).save(buf, format="JPEG", quality=int(quality))
    return buf.getvalue()


def save_png(img: np.ndarray, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.write_bytes(encode_png(img))
    return path


CODECS = ("jpeg", "png", "none")


def storage_roundtrip(img: np.ndarray, codec: str = "jpeg", quality: int = 85) -> np.ndarray:
    """Simulate writing ``img`` to disk with ``codec`` and reading it back.

    ``png`` is an 8-bit quantisation, ``jpeg`` a lossy encode at ``quality``
    and ``none`` returns the float image untouched.
    """
    if codec == "none":
        return img
    if codec == "png":
        return to_uint8(img).astype(np.float64) / 255.0
    if codec == "jpeg":
        with Image.open(io.BytesIO(encode_jpeg(img, quality))) as im:
            return _to_array(im)
    raise InvalidParameterError(f"unknown codec {codec!r}; expected one of {CODECS}")


def list_images(directory: str | os.PathLike) -> list[Path]:
    """PNG/JPEG files directly inside ``directory``, sorted by name."""
    directory = Path(directory)
    return sorted(
        p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
