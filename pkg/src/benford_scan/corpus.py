"""Assemble a small natural-photo corpus from photographs shipped with common
scientific Python packages (scikit-image, scikit-learn, matplotlib).

Each photo is downsampled with a Lanczos filter, which also removes any
8x8 JPEG grid left over from its original encoding, then cut into
non-overlapping square tiles saved as JPEG. Only photographs are used; no
synthetic test patterns.

Usage::

    python -m benford_scan.corpus OUT_DIR [--scale 0.8] [--tile 128] [--quality 85]
"""

from __future__ import annotations

import argparse
import importlib.util
from pathlib import Path

import numpy as np
from PIL import Image

PHOTOS = {
    "skimage": [
        "data/astronaut.png",
        "data/brick.png",
        "data/camera.png",
        "data/chelsea.png",
        "data/coffee.png",
        "data/coins.png",
        "data/grass.png",
        "data/gravel.png",
        "data/hubble_deep_field.jpg",
        "data/moon.png",
        "data/motorcycle_left.png",
        "data/motorcycle_right.png",
        "data/rocket.jpg",
    ],
    "sklearn": ["datasets/images/china.jpg", "datasets/images/flower.jpg"],
    "matplotlib": ["mpl-data/sample_data/grace_hopper.jpg"],
}


def find_photos() -> list[Path]:
    """Paths of the bundled photographs that are present on this machine."""
    found = []
    for package, rel_paths in PHOTOS.items():
        spec = importlib.util.find_spec(package)
        if spec is None or not spec.submodule_search_locations:
            continue
        root = Path(next(iter(spec.submodule_search_locations)))
        found.extend(root / rel for rel in rel_paths if (root / rel).is_file())
    return found


def build_photo_corpus(
    out_dir: str | Path,
    scale: float = 0.8,
    tile: int = 128,
    quality: int = 85,
    photos: list[Path] | None = None,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for src in photos if photos is not None else find_photos():
        with Image.open(src) as im:
            im = im.convert("RGB")
            size = (int(im.width * scale), int(im.height * scale))
            arr = np.asarray(im.resize(size, Image.Resampling.LANCZOS))
        for r in range(arr.shape[0] // tile):
            for c in range(arr.shape[1] // tile):
                patch = arr[r * tile : (r + 1) * tile, c * tile : (c + 1) * tile]
                dest = out_dir / f"{src.stem}_r{r:02d}c{c:02d}.jpg"
                Image.fromarray(patch).save(dest, format="JPEG", quality=quality)
                written.append(dest)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m benford_scan.corpus", description=__doc__.split("\n\n")[0])
    parser.add_argument("out_dir")
    parser.add_argument("--scale", type=float, default=0.8)
    parser.add_argument("--tile", type=int, default=128)
    parser.add_argument("--quality", type=int, default=85)
    args = parser.parse_args(argv)
    written = build_photo_corpus(args.out_dir, args.scale, args.tile, args.quality)
    print(f"{len(written)} tiles written to {args.out_dir}")
    return 0 if written else 1


if __name__ == "__main__":
    raise SystemExit(main())
