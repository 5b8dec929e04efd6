import math

import numpy as np
import pytest

from gmseries.beta import BetaSpec
from gmseries.classes import (ClassError, ClassSpec, block_variation, bounded_verdict, coefficient_criterion,
                              membership_scan, o1_verdict, qm_tau_search, remark1_chain, remark1_condition,
                              remark2_chain, tail_variation, theorem2_hypothesis, theorem2_keystep,
                              theorem3_hypothesis)
from gmseries.sequences import make_generator

GRID = [2 ** j for j in range(4, 13)]


def brute_block(a, m, r):
    return math.fsum(abs(a(k) - a(k + r)) for k in range(m, 2 * m))


def test_block_variation_constant_is_zero():
    seq = make_generator("constant", {"value": 3.0})
    assert all(block_variation(seq, m, r) == 0 for m in (1, 5, 40) for r in (1, 2, 7))


def test_block_variation_harmonic_telescopes(harmonic):
    assert block_variation(harmonic, 4, 1) == pytest.approx(0.125, rel=1e-15)


@pytest.mark.parametrize("gen", [("remark6", {"r": 3}), ("remark5_cos", {}), ("power", {"p": 1.5})])
@pytest.mark.parametrize("r", [1, 2, 3, 5])
def test_block_variation_brute(gen, r):
    seq = make_generator(*gen)
    for m in (1, 4, 17, 100):
        assert block_variation(seq, m, r) == pytest.approx(brute_block(seq.coeff, m, r), rel=1e-13)


def test_remark6_block_lower_bound():
    seq = make_generator("remark6", {"r": 3})
    for n in GRID:
        assert block_variation(seq, n, 2) >= 1 / (12 * n)


def test_tail_variation_constant():
    res = tail_variation(make_generator("constant", {"value": 1.0}), 5, 2, 1000)
    assert (res.value, res.tail) == (0.0, 0.0)


def test_tail_variation_harmonic(harmonic):
    res = tail_variation(harmonic, 8, 1, 1 << 16)
    # truncated sum telescopes to 1/8 - 1/(H+1)
    assert res.value == pytest.approx(1 / 8 - 1 / ((1 << 16) + 1), rel=1e-13)
    assert res.total == pytest.approx(0.125, rel=1e-4)


def test_tail_variation_remark5_chain_bound():
    seq = make_generator("remark5_cos")
    res = tail_variation(seq, 10, 3, 10 ** 6)
    k = np.arange(10, 10 ** 6 + 1)
    k = k[(k % 3 == 1)]
    bound = 6 / math.log(math.log(10)) * math.fsum(1 / (k * np.log(k) ** 2))
    assert res.value <= bound


def test_tail_variation_horizon_check(harmonic):
    with pytest.raises(ClassError):
        tail_variation(harmonic, 100, 1, 150)


def test_harmonic_gm(harmonic):
    rep = membership_scan(harmonic, ClassSpec("GM"), [2 ** j for j in range(1, 13)])
    assert rep.verdict == "consistent"
    assert max(rep.ratios) <= 0.5 + 1e-12


def test_remark6_not_in_gm_b6_2():
    seq = make_generator("remark6", {"r": 3})
    rep = membership_scan(seq, ClassSpec("GM(beta,r)", r=2, beta=BetaSpec("b6", c=2.0, horizon=1 << 17)), GRID)
    assert rep.verdict == "inconsistent"
    assert rep.trend_slope >= 0.8


def test_remark5_in_rbvs_b5_3():
    rep = membership_scan(make_generator("remark5_cos"), ClassSpec("RBVS(beta,r)", r=3, beta=BetaSpec("b5")),
                          GRID)
    assert rep.verdict == "consistent"


@pytest.mark.parametrize("cls", ["M", "GM", "RBVS", "NBVS", "MVBV"])
def test_monotone_sequence_in_every_class(harmonic, cls):
    assert membership_scan(harmonic, ClassSpec(cls), GRID).verdict == "consistent"


def test_gbvs(harmonic):
    assert membership_scan(harmonic, ClassSpec("GBVS", N=2), GRID).verdict == "consistent"


def test_qm():
    seq = make_generator("remark6", {"r": 2})
    assert membership_scan(seq, ClassSpec("M"), GRID).verdict == "inconsistent"
    assert qm_tau_search(make_generator("harmonic"), [0.5, 1.0], GRID) == 0.5


def test_zero_majorant_is_infinite_ratio():
    seq = make_generator("explicit", {"values": [1.0, 0.0, 1.0, 0.0, 0.0, 0.0]})
    rep = membership_scan(seq, ClassSpec("GM"), [2, 3, 4])
    assert math.isinf(rep.ratios[0]) and rep.verdict == "inconsistent"
    zero = membership_scan(make_generator("constant", {"value": 0.0}), ClassSpec("GM"), GRID)
    assert all(r == 0 for r in zero.ratios) and zero.flags


def test_grid_validation(harmonic):
    with pytest.raises(ClassError):
        membership_scan(harmonic, ClassSpec("GM"), [4, 2])
    with pytest.raises(ClassError):
        ClassSpec("GM(beta,r)", r=2)
    with pytest.raises(ClassError):
        ClassSpec("XYZ")


def test_report_serialisation(harmonic):
    rep = membership_scan(harmonic, ClassSpec("GM"), GRID)
    assert '"verdict": "consistent"' in rep.to_json()
    assert rep.to_csv().splitlines()[0] == "m,variation,majorant,ratio"


def test_bounded_verdict_rules():
    grid = [10, 100, 1000, 10000]
    assert bounded_verdict(grid, [1, 1, 1, 1])[0] == "consistent"
    assert bounded_verdict(grid, [1, 10, 100, 1000])[0] == "inconsistent"
    assert bounded_verdict([10, 20], [1, 1])[0] == "inconclusive"
    assert bounded_verdict([10, 20, 40], [1, 1, 1])[0] == "inconclusive"


def test_o1_verdict_rules():
    ns = [2 ** j for j in range(4, 13)]
    assert o1_verdict(ns, [1 / n for n in ns])[0] == "o(1)"
    assert o1_verdict(ns, [1 + 1 / n for n in ns])[0] == "not-o(1)"
    assert o1_verdict(ns, [0.0] * len(ns))[0] == "o(1)"
    assert o1_verdict([16, 32], [1, 1])[0] == "inconclusive"


def test_remark1_condition_constant():
    rep = remark1_condition(BetaSpec("b1"), make_generator("constant", {"value": 1.0}), 2, 3, GRID)
    assert rep.verdict == "bounded" and all(v == 3 for v in rep.values)


def test_remark1_condition_b5_harmonic(harmonic):
    assert remark1_condition(BetaSpec("b5"), harmonic, 1, 2, GRID).verdict == "bounded"


def test_remark1_condition_geometric_sequence_ratio_is_constant():
    # sum_{i<p} 2^(n+iq) / 2^n = 1 + 2^q + ... + 2^((p-1)q), independent of n
    from gmseries.sequences import from_function
    seq = from_function(lambda n: 2.0 ** np.minimum(n, 900))
    rep = remark1_condition(BetaSpec("b1"), seq, 2, 3, [1, 4, 16, 64])
    assert rep.values == pytest.approx([1 + 4 + 16] * 4)


def test_remark1_condition_zero_beta_excluded():
    seq = make_generator("remark6", {"r": 3})
    rep = remark1_condition(BetaSpec("b1"), seq, 3, 2, [3, 4, 6, 9, 12, 30, 300])
    assert any(f.startswith("zero-beta-excluded") for f in rep.flags)
    assert 4 not in rep.grid


def test_theorem2_hypothesis(harmonic):
    rep = theorem2_hypothesis(harmonic, BetaSpec("b1"), 2.0, [2 ** j for j in range(6, 16)])
    assert rep.verdict == "bounded"
    assert rep.values[-1] == pytest.approx(0.5, abs=2e-3)


def test_theorem2_hypothesis_constant():
    rep = theorem2_hypothesis(make_generator("constant", {"value": 1.0}), BetaSpec("b1"), 2.0, GRID)
    assert rep.verdict == "bounded"
    assert rep.values[-1] == pytest.approx(1 / 3, rel=1e-2)


def test_theorem2_zero_denominator():
    rep = theorem2_hypothesis(make_generator("constant", {"value": 0.0}), BetaSpec("b1"), 2.0, GRID)
    assert rep.flags


def test_keystep(harmonic):
    rep = theorem2_keystep(harmonic, 1, 2.0, [2 ** j for j in range(6, 16)])
    assert rep.verdict == "bounded"
    assert rep.values[-1] == pytest.approx(1 / math.log(4), abs=2e-3)
    assert theorem2_keystep(make_generator("remark5_cos"), 3, 2.0, [3 * 2 ** j + 1 for j in range(3, 12)]).verdict \
        == "bounded"


def test_keystep_delta_sequence():
    rep = theorem2_keystep(make_generator("explicit", {"values": [1.0]}), 1, 2.0, [1, 2, 4])
    assert rep.values[0] == 1.0
    assert rep.flags


def test_theorem3_hypothesis():
    zero = theorem3_hypothesis(make_generator("constant", {"value": 0.0}), BetaSpec("b1"), GRID)
    assert all(v == 0 for v in zero.values)
    assert theorem3_hypothesis(make_generator("inv_log", {"shift": 2}), BetaSpec("b1"), GRID).verdict == "not-o(1)"
    assert theorem3_hypothesis(make_generator("power", {"p": 0.5}), BetaSpec("b1"), GRID).verdict == "o(1)"


def test_coefficient_criterion(harmonic):
    assert coefficient_criterion(harmonic, GRID).verdict == "o(1)"
    assert coefficient_criterion(make_generator("inv_log"), GRID).verdict == "not-o(1)"
    support = [3 * 2 ** j + 1 for j in range(3, 14)]
    assert coefficient_criterion(make_generator("remark5_cos"), support).verdict == "o(1)"


@pytest.mark.parametrize("gen,q,p,beta", [(("harmonic", {}), 1, 3, BetaSpec("b5")),
                                          (("remark6", {"r": 6}), 2, 3, BetaSpec("b5")),
                                          (("remark5_cos", {}), 3, 2, BetaSpec("b5")),
                                          (("constant", {"value": 1.0}), 1, 3, BetaSpec("b1"))])
def test_embedding_chains(gen, q, p, beta):
    seq = make_generator(*gen)
    assert all(c.holds for c in remark1_chain(seq, beta, q, p, GRID))
    assert all(c.holds for c in remark2_chain(seq, q, p * q, GRID, 1 << 15))


def test_remark2_needs_divisor(harmonic):
    with pytest.raises(ClassError):
        remark2_chain(harmonic, 2, 3, GRID, 1000)
