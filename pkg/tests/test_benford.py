import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from benford_scan import benford
from benford_scan.benford import (
    LN2,
    accumulate_pmf,
    benford_reference,
    digit_counts,
    js_divergence,
    kl_divergence,
    leading_digit,
    leading_digits,
    score_image,
)
from benford_scan.errors import (
    EmptyPmfError,
    ImageTooSmallError,
    InvalidBaseError,
    InvalidDistributionError,
    InvalidValueError,
)
from benford_scan.spectral import dct2_8x8

from conftest import smooth_image

# 0.5*KL(p||m) + 0.5*KL(q||m) for p=(0.5,0.5), q=(0.9,0.1), evaluated with
# mpmath at 50 significant digits.
JSD_HALF_VS_NINE_TENTHS = 0.101749225079196688563779888356


def string_digit(x: float) -> int:
    """First digit of the 17-significant-digit decimal rendering of |x|."""
    return int(format(abs(x), ".16e")[0])


def exact_digit(x: float, base: int) -> int:
    """Leading digit of the exact rational value of the double x."""
    f = Fraction(abs(x))
    e = 0
    while f >= base ** (e + 1):
        e += 1
    while f < Fraction(base) ** e:
        e -= 1
    return int(f / Fraction(base) ** e)


# ---------------------------------------------------------------- reference


def test_reference_base10_digit_one():
    ref = benford_reference(10)
    assert ref.probs[0] == pytest.approx(0.30103, abs=1e-5)
    assert ref.probs[0] == pytest.approx(math.log10(2), abs=1e-15)


def test_reference_base2_degenerate():
    ref = benford_reference(2)
    np.testing.assert_array_equal(ref.probs, [1.0])


@pytest.mark.parametrize("base", range(2, 17))
def test_reference_normalised_and_decreasing(base):
    probs = benford_reference(base).probs
    assert probs.size == base - 1
    assert abs(probs.sum() - 1.0) < 1e-12
    assert (probs > 0).all()
    assert (np.diff(probs) < 0).all()


@pytest.mark.parametrize("bad", [1, 0, -3, 2.5, True])
def test_reference_rejects_bad_base(bad):
    with pytest.raises(InvalidBaseError):
        benford_reference(bad)


# ------------------------------------------------------------ leading digit


@pytest.mark.parametrize(
    "x, expected",
    [
        (245326, 2),
        (-0.0042, 4),
        (0.1, 1),
        (1.0, 1),
        (9.999999999999998, 9),
        (1000.0, 1),
        # the double nearest 1e-12 is 9.9999999999999998e-13
        (1e-12, 9),
        (1e-12 * (1 + 2**-52), 1),
    ],
)
def test_leading_digit_examples(x, expected):
    assert leading_digit(x) == expected


def test_point_one_matches_string_oracle():
    assert leading_digit(0.1) == string_digit(0.1) == 1
    below = np.nextafter(0.1, 0.0)
    assert leading_digit(below) == string_digit(below) == exact_digit(below, 10) == 9


def test_leading_digit_near_zero_is_none():
    assert leading_digit(0.0) is None
    assert leading_digit(5e-13) is None


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_leading_digit_rejects_non_finite(bad):
    with pytest.raises(InvalidValueError):
        leading_digit(bad)
    with pytest.raises(InvalidValueError):
        leading_digits(np.array([1.0, bad]))


def test_vectorised_matches_string_oracle(rng):
    magnitudes = 10.0 ** rng.uniform(-12, 12, 20_000)
    x = magnitudes * rng.choice([-1.0, 1.0], magnitudes.size)
    got = leading_digits(x)
    expected = np.array([string_digit(v) for v in x])
    np.testing.assert_array_equal(got, expected)


@pytest.mark.parametrize("base", [2, 3, 7, 10, 16])
def test_vectorised_matches_exact_oracle(rng, base):
    x = 10.0 ** rng.uniform(-11, 11, 2_000)
    got = leading_digits(x, base)
    expected = [exact_digit(v, base) for v in x]
    np.testing.assert_array_equal(got, expected)


@settings(max_examples=300)
@given(st.floats(min_value=1e-12, max_value=1e12, allow_nan=False, allow_infinity=False))
def test_scalar_matches_exact_oracle(x):
    assert leading_digit(x) == exact_digit(x, 10)


@pytest.mark.parametrize("base", [2, 10, 16])
def test_power_of_base_invariance(rng, base):
    x = float(base) ** rng.uniform(-9, 9, 5_000)
    eps = 1e-300  # keep every scaled value above the near-zero cut
    d0 = leading_digits(x, base, eps)
    for k in range(-30, 31):
        scaled = x * float(base) ** k if k >= 0 else x / float(base) ** -k
        np.testing.assert_array_equal(leading_digits(scaled, base, eps), d0, err_msg=f"k={k}")


def test_digits_in_range(rng):
    x = rng.normal(size=10_000) * 10.0 ** rng.uniform(-10, 10, 10_000)
    for base in (2, 5, 10, 16):
        d = leading_digits(x, base)
        assert d.min() >= 1 and d.max() <= base - 1


# --------------------------------------------------------------------- pmf


def test_pmf_constant_block_without_dc_is_empty():
    with pytest.raises(EmptyPmfError):
        accumulate_pmf(dct2_8x8(np.ones((8, 8))), 10, include_dc=False)


def test_pmf_constant_block_with_dc_is_digit_eight():
    pmf = accumulate_pmf(dct2_8x8(np.ones((8, 8))), 10, include_dc=True)
    expected = np.zeros(9, dtype=int)
    expected[7] = 1
    np.testing.assert_array_equal(pmf.counts, expected)
    assert pmf.total == 1
    np.testing.assert_array_equal(pmf.probs, expected)


def test_pmf_scale_by_power_of_base_keeps_counts(rng):
    coeffs = dct2_8x8(rng.random((200, 8, 8)))
    base_counts = accumulate_pmf(coeffs).counts
    for k in (-5, -1, 1, 3):
        np.testing.assert_array_equal(accumulate_pmf(coeffs * 10.0**k).counts, base_counts)


def test_pmf_dc_flag_counts(rng):
    coeffs = dct2_8x8(rng.random((10, 8, 8)))
    assert accumulate_pmf(coeffs, include_dc=False).total == 10 * 63
    assert accumulate_pmf(coeffs, include_dc=True).total == 10 * 64


def test_pmf_invariants(rng):
    pmf = accumulate_pmf(dct2_8x8(rng.random((50, 8, 8))), 7)
    assert pmf.counts.size == 6
    assert abs(pmf.probs.sum() - 1) < 1e-12


def test_digit_counts_match_bincount(rng):
    x = rng.normal(size=5000) * 100
    counts = digit_counts(x)
    expected = np.bincount([string_digit(v) for v in x if abs(v) >= 1e-12], minlength=10)[1:]
    np.testing.assert_array_equal(counts, expected)


def test_synthetic_benford_stream_converges():
    u = np.random.default_rng(7).random(1_000_000)
    x = 3.7 * 10.0**u
    counts = digit_counts(x)
    jsd = js_divergence(counts / counts.sum(), benford_reference(10).probs)
    assert jsd < 1e-4


# --------------------------------------------------------------- divergence


def test_jsd_identity():
    p = benford_reference(10).probs
    assert js_divergence(p, p) == 0.0


def test_jsd_disjoint_is_ln2():
    assert js_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(LN2, abs=1e-15)


def test_jsd_against_high_precision_evaluation():
    assert abs(js_divergence([0.5, 0.5], [0.9, 0.1]) - JSD_HALF_VS_NINE_TENTHS) < 1e-12


def test_jsd_against_scalar_kl_sums():
    p, q = (0.5, 0.5), (0.9, 0.1)
    m = [(a + b) / 2 for a, b in zip(p, q)]
    expected = 0.5 * sum(a * math.log(a / c) for a, c in zip(p, m)) + 0.5 * sum(
        b * math.log(b / c) for b, c in zip(q, m)
    )
    assert abs(js_divergence(p, q) - expected) < 1e-12


@pytest.mark.parametrize(
    "p, q",
    [([0.5, 0.5], [1.0]), ([0.5, 0.6], [0.5, 0.5]), ([-0.1, 1.1], [0.5, 0.5]), ([math.nan, 1], [0.5, 0.5])],
)
def test_jsd_rejects_invalid(p, q):
    with pytest.raises(InvalidDistributionError):
        js_divergence(p, q)


def test_kl_infinite_outside_support():
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(LN2)


def _normalised(raw):
    v = np.asarray(raw, dtype=np.float64)
    assume(v.sum() > 1e-6)
    return v / v.sum()


pmf_pairs = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0, 1), min_size=n, max_size=n),
        st.lists(st.floats(0, 1), min_size=n, max_size=n),
    )
)


@settings(max_examples=400)
@given(pmf_pairs)
def test_jsd_properties(pair):
    p, q = (_normalised(v) for v in pair)
    d = js_divergence(p, q)
    assert d == js_divergence(q, p)
    assert 0.0 <= d <= LN2
    if np.array_equal(p, q):
        assert d == 0.0
    else:
        assert d > 0.0 or np.allclose(p, q, atol=1e-7)


# ------------------------------------------------------------------- score


def test_score_noise_image_strictly_inside_bounds(rng):
    score = score_image(rng.random((64, 64)))
    assert 0.0 < score.js_divergence < LN2
    assert score.coefficient_count == 64 * 63


def test_score_flat_image_is_empty():
    with pytest.raises(EmptyPmfError):
        score_image(np.full((64, 64), 0.5))


def test_score_too_small():
    with pytest.raises(ImageTooSmallError):
        score_image(np.zeros((7, 64)))


def test_score_deterministic(rng):
    img = smooth_image(rng, 64, 64, 3)
    a, b = score_image(img, image_id="x"), score_image(img.copy(), image_id="x")
    assert a == b
    assert a.js_divergence.hex() == b.js_divergence.hex()


def test_score_base2_uses_single_digit_reference(rng):
    score = score_image(rng.random((32, 32)), base=2)
    assert score.js_divergence == 0.0  # every nonzero magnitude starts with 1 in base 2


def test_score_metadata(rng):
    s = score_image(rng.random((16, 16)), image_id="a", corruption="fog", severity=3)
    assert (s.image_id, s.corruption, s.severity) == ("a", "fog", 3)
    assert s.normalized == pytest.approx(s.js_divergence / LN2)


def test_epsilon_matches_design():
    assert benford.EPSILON == 1e-12
