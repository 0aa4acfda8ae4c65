import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_image(rng, height=64, width=64, channels=None):
    """Low-pass random field in [0, 1]; photo-like enough for pipeline tests."""
    shape = (height, width) if channels is None else (height, width, channels)
    base = rng.random(shape)
    for axis in (0, 1):
        base = (base + np.roll(base, 1, axis=axis) + np.roll(base, -1, axis=axis)) / 3
    base -= base.min()
    return base / base.max()


def write_png(path, img):
    arr = np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")
    return path


@pytest.fixture
def corpus(tmp_path, rng):
    """Three small colour PNGs."""
    d = tmp_path / "corpus"
    d.mkdir()
    for i in range(3):
        write_png(d / f"img{i}.png", smooth_image(rng, 48, 56, 3))
    return d


# Filled by test_acceptance.py: criterion number -> (passed, detail).
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
