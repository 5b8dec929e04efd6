import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmseries.beta import BetaError, BetaSpec, b6_argmax, beta, beta_array, beta_series_tail
from gmseries.sequences import from_function, make_generator


def brute_beta(variant, a, n, N=0, c=2.0, horizon=None):
    """Literal definitions over a Python list ``a`` (a[k] is the k-th coefficient)."""
    A = lambda k: abs(a(k))
    if variant == "b1":
        return A(n)
    if variant == "b2":
        return sum(A(k) for k in range(n, n + N + 1))
    if variant == "b3":
        return sum(A(math.floor(c ** v * n)) for v in range(N + 1))
    if variant == "b4":
        return A(n) + sum(A(k) / k for k in range(n + 1, math.floor(c * n) + 1))
    if variant == "b5":
        return sum(A(k) / k for k in range(max(math.floor(n / c), 1), math.floor(c * n) + 1))
    if variant == "b6":
        lo = max(math.floor(n / c), 1)
        best = max(math.log(m) / m * sum(A(k) for k in range(m, 2 * m + 1)) for m in range(lo, horizon + 1))
        return best / math.log(n)


def test_b1_harmonic(harmonic):
    assert beta(BetaSpec("b1"), harmonic, 10) == 0.1


def test_b5_harmonic_n4(harmonic):
    # window k = floor(4/2) .. floor(2*4), both ends included
    expected = math.fsum(1 / k ** 2 for k in range(2, 9))
    assert beta(BetaSpec("b5", c=2.0), harmonic, 4) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.527422052154195, rel=1e-12)


@pytest.mark.parametrize("spec", [BetaSpec("b1"), BetaSpec("b2", N=3), BetaSpec("b3", N=2, c=2.0),
                                  BetaSpec("b3", N=2, c=1.5), BetaSpec("b4", c=3.0), BetaSpec("b5", c=2.5),
                                  BetaSpec("b6", c=2.0, horizon=300)])
@pytest.mark.parametrize("gen", [("harmonic", {}), ("remark6", {"r": 3}), ("remark5_cos", {}),
                                 ("power", {"p": 0.5})])
def test_variants_match_literal_definitions(spec, gen):
    seq = make_generator(*gen)
    ns = [2, 3, 7, 20, 41]
    got = beta_array(spec, seq, ns)
    for n, g in zip(ns, got):
        want = brute_beta(spec.variant, seq.coeff, n, spec.N, spec.c, spec.horizon)
        assert g == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_b6_remark6_is_order_inverse_square():
    seq = make_generator("remark6", {"r": 3})
    spec = BetaSpec("b6", c=2.0, horizon=1 << 15)
    ns = np.array([64, 256, 1024, 4096])
    scaled = beta_array(spec, seq, ns) * ns ** 2
    assert np.all(scaled < 1.0) and np.all(scaled > 0.3)
    assert scaled.max() / scaled.min() < 1.2
    assert abs(b6_argmax(spec, seq, 1024) - 512) <= 3


def test_b6_errors(harmonic):
    with pytest.raises(BetaError):
        beta(BetaSpec("b6"), harmonic, 1)
    # constant sequence: (ln m / m) * (m+1) grows, so the max sits on the horizon
    with pytest.raises(BetaError, match="horizon"):
        beta(BetaSpec("b6", horizon=100), make_generator("constant", {"value": 1.0}), 10)


def test_spec_validation():
    with pytest.raises(BetaError):
        BetaSpec("b7")
    with pytest.raises(BetaError):
        BetaSpec("b5", c=1.0)
    with pytest.raises(BetaError):
        BetaSpec("b3", c=2.5, strict_integer=True)
    assert BetaSpec("b3", c=2.5).flags == ["b3-real-c-floored"]


def test_spec_json_round_trip():
    spec = BetaSpec("b6", c=3.0, horizon=5000)
    assert BetaSpec.from_json(spec.to_json()) == spec
    with pytest.raises(BetaError):
        BetaSpec.from_json({"variant": "b1", "gamma": 2})


def test_custom_beta(harmonic):
    spec = BetaSpec("custom", custom=lambda s, n: 2 * s[n])
    assert beta(spec, harmonic, 4) == 0.5


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=60, max_size=60),
       st.lists(st.floats(0, 1, allow_nan=False), min_size=60, max_size=60),
       st.sampled_from(["b1", "b2", "b3", "b4", "b5"]), st.integers(1, 20))
def test_majorant_monotone_in_coefficients(big, frac, variant, n):
    small = [b * f for b, f in zip(big, frac)]
    spec = BetaSpec(variant, N=2, c=2.0)
    a = make_generator("explicit", {"values": small})
    b = make_generator("explicit", {"values": big})
    assert beta(spec, a, n) <= beta(spec, b, n) * (1 + 1e-12) + 1e-300


def test_series_tail_remark6_zeta():
    seq = make_generator("remark6", {"r": 3})
    res = beta_series_tail(BetaSpec("b1"), seq, 1, 100_000)
    assert res.verdict == "summable"
    assert res.value + res.tail == pytest.approx(float(mp.zeta(3)) / 27, rel=1e-8)


def test_series_tail_harmonic(harmonic):
    res = beta_series_tail(BetaSpec("b1"), harmonic, 1, 1 << 17)
    assert res.verdict == "summable"
    assert res.value + res.tail == pytest.approx(math.pi ** 2 / 6, rel=1e-6)


def test_series_tail_constant_not_summable():
    res = beta_series_tail(BetaSpec("b1"), make_generator("constant", {"value": 1.0}), 1, 1 << 16)
    assert res.verdict == "not-summable"
    assert res.value == pytest.approx(math.log(1 << 16) + 0.5772, rel=1e-3)


def test_series_tail_needs_three_decades(harmonic):
    with pytest.raises(BetaError):
        beta_series_tail(BetaSpec("b1"), harmonic, 10, 5000)
