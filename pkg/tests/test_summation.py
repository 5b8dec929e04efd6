import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmseries.sequences import make_generator, from_function
from gmseries.summation import (BlockSumRequest, NoTailCertificate, SingularPointError, TailEngine,
                                abel_block_sum, direct_block_sum, partial_sum, series_tail_bound, trig_sum,
                                vallee_poussin)


def mp_block(a, n, m, x, kind):
    mp.mp.dps = 40
    trig = mp.cos if kind == "cos" else mp.sin
    return float(mp.fsum(mp.mpf(a(k)) * trig(k * mp.mpf(x)) for k in range(n, m + 1)))


def test_zero_sequence():
    z = make_generator("constant", {"value": 0.0})
    assert direct_block_sum(BlockSumRequest(z, 1, 50, 3, 0.7)).value == 0.0
    assert abel_block_sum(BlockSumRequest(z, 1, 50, 3, 0.7)).value == 0.0


def test_constant_hand_value():
    one = make_generator("constant", {"value": 1.0})
    req = BlockSumRequest(one, 1, 5, 1, math.pi / 3, "cos")
    assert direct_block_sum(req).value == pytest.approx(-1.0, abs=1e-14)
    res = abel_block_sum(req)
    assert res.value == pytest.approx(-1.0, abs=1e-14)
    assert res.components["difference"] == 0.0


def test_harmonic_sine_high_precision(harmonic):
    got = direct_block_sum(BlockSumRequest(harmonic, 1, 10_000, 1, 1.0, "sin")).value
    assert got == pytest.approx(mp_block(lambda k: mp.mpf(1) / k, 1, 10_000, 1.0, "sin"), abs=1e-12)


def test_remark6_abel_matches_direct():
    seq = make_generator("remark6", {"r": 3})
    req = BlockSumRequest(seq, 6, 60, 3, 1.0)
    d, a = direct_block_sum(req).value, abel_block_sum(req).value
    assert a == pytest.approx(d, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 300), st.sampled_from([1, 2, 3, 5, 7]),
       st.floats(-3.1, 3.1), st.sampled_from(["cos", "sin"]))
def test_abel_identity_constant_sine(n, extra, r, x, kind):
    seq = make_generator("constant", {"value": 1.0})
    req = BlockSumRequest(seq, n, n + extra, r, x, kind)
    try:
        a = abel_block_sum(req, eps=1e-2).value
    except SingularPointError:
        return
    d = direct_block_sum(req).value
    assert abs(a - d) <= 1e-10 * (1 + abs(d)) * max(1.0, 0.1 / abs(math.sin(r * x / 2)))


def test_singular_point_error(harmonic):
    with pytest.raises(SingularPointError):
        abel_block_sum(BlockSumRequest(harmonic, 1, 10, 3, 2 * math.pi / 3))


def test_request_validation(harmonic):
    with pytest.raises(ValueError):
        BlockSumRequest(harmonic, 5, 4)
    with pytest.raises(ValueError):
        BlockSumRequest(harmonic, 1, 4, kind="exp")


def test_partial_sum_basics():
    zero = make_generator("constant", {"value": 0.0})
    assert partial_sum(zero, "cos", 10, 0.3) == 0.0
    const = make_generator("constant", {"value": 0.0, "a0": 2.0})
    assert partial_sum(const, "cos", 10, 1.234) == 1.0
    delta = make_generator("explicit", {"values": [0, 0, 1]})
    assert partial_sum(delta, "sin", 5, math.pi / 6) == pytest.approx(1.0, abs=1e-15)


def test_partial_sum_vectorised_matches_mpmath(harmonic):
    xs = np.array([0.1, 1.0, 2.5, -3.0])
    got = partial_sum(harmonic, "cos", 2000, xs)
    for x, g in zip(xs, got):
        assert g == pytest.approx(mp_block(lambda k: mp.mpf(1) / k, 1, 2000, x, "cos"), abs=1e-12)


def test_trig_sum_large_against_fsum(rng):
    coef = rng.standard_normal(5000)
    xs = rng.uniform(-math.pi, math.pi, 7)
    got = trig_sum(coef, 3, xs, "sin")
    for x, g in zip(xs, got):
        k = np.arange(3, 5003)
        mp.mp.dps = 30
        want = math.fsum(coef * np.array([float(mp.sin(int(kk) * mp.mpf(x))) for kk in k]))
        assert g == pytest.approx(want, abs=1e-11)


def test_exponential_partial_sum_matches_cosine(harmonic):
    from gmseries.sequences import to_exponential
    pos, neg = to_exponential(harmonic, "cos")
    z = partial_sum((pos, neg), "exp", 50, 0.8)
    assert z.real == pytest.approx(partial_sum(harmonic, "cos", 50, 0.8), abs=1e-13)
    assert abs(z.imag) < 1e-13


def test_vallee_poussin_literal_mean(harmonic):
    literal = math.fsum(partial_sum(harmonic, "cos", k, 1.0) for k in range(17)) / 17
    assert vallee_poussin(harmonic, "cos", 16, 1.0) == pytest.approx(literal, abs=1e-13)


def test_vallee_poussin_degenerate():
    const = make_generator("constant", {"value": 0.0, "a0": 3.0})
    assert vallee_poussin(const, "cos", 0, 0.4) == 1.5
    assert vallee_poussin(const, "cos", 9, 2.0) == 1.5
    h = make_generator("harmonic")
    assert vallee_poussin(h, "sin", 0, 0.4) == partial_sum(h, "sin", 0, 0.4)


def test_tail_engine_closed_form(harmonic):
    # sum_{k>=1} cos(kx)/k = -ln(2 sin(x/2)), sum sin(kx)/k = (pi - x)/2
    eng = TailEngine(harmonic, r=1, order=2)
    x = np.array([0.05, 0.7, 2.0, 3.0])
    n = 100
    res = eng.evaluate(n, x, atol=1e-10)
    cos_tail = -np.log(2 * np.sin(x / 2)) - partial_sum(harmonic, "cos", n, x)
    sin_tail = (np.pi - x) / 2 - partial_sum(harmonic, "sin", n, x)
    assert np.all(np.abs(res.value.real - cos_tail) <= res.error + 1e-12)
    assert np.all(np.abs(res.value.imag - sin_tail) <= res.error + 1e-12)


def test_series_tail_bound_remark6():
    seq = make_generator("remark6", {"r": 3})
    bound, _ = series_tail_bound(seq, 30, 3, 1.0)
    k = np.arange(31, 10 ** 6 + 1)
    actual = abs(math.fsum(seq.values(31, 10 ** 6) * np.cos(k * 1.0)))
    assert bound >= actual


def test_series_tail_bound_remark5_sin():
    seq = make_generator("remark5_sin")
    bound, _ = series_tail_bound(seq, 10, 2, math.pi / 2)
    k = np.arange(11, 10 ** 6 + 1)
    actual = abs(math.fsum(seq.values(11, 10 ** 6) * np.sin(k * math.pi / 2)))
    assert math.isfinite(bound) and bound >= actual


def test_series_tail_bound_zero_and_errors():
    zero = make_generator("constant", {"value": 0.0})
    assert series_tail_bound(zero, 5, 1, 1.0)[0] == 0.0
    with pytest.raises(SingularPointError):
        series_tail_bound(make_generator("harmonic"), 5, 2, math.pi)
    with pytest.raises(NoTailCertificate):
        series_tail_bound(from_function(lambda n: np.sin(n) ** 2 + 1 / n), 5, 1, 1.0)
