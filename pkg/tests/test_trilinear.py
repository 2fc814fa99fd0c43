import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.acceptance import random_table
from bilinlab.lattice import IndexBox, SeqFunction, seq_norm
from bilinlab.trilinear import (certify_weight, classify, form_norm_alt, form_norm_oracle, oracle_supports,
                                trilinear_form)
from bilinlab.weights import Constant, Factor, SumPower, Table, weight_transform


def test_form_of_deltas_is_the_weight_value():
    V = SumPower(-0.5)
    val = trilinear_form(V, SeqFunction.delta(3), SeqFunction.delta(1), SeqFunction.delta(2))
    assert val == pytest.approx(4 ** -0.5)


def test_form_rejects_negative_inputs():
    neg = SeqFunction.from_dict({0: -1.0}, signed=True)
    with pytest.raises(ValueError):
        trilinear_form(Constant(1.0), neg, SeqFunction.delta(0), SeqFunction.delta(0))


@given(st.lists(st.floats(0, 3), min_size=3, max_size=3), st.floats(0, 4))
def test_form_is_homogeneous_in_each_argument(b, t):
    box = IndexBox(1, 1)
    A = SeqFunction(1, IndexBox(1, 2).points(), np.linspace(0.1, 1, 5))
    B = SeqFunction(1, box.points(), b)
    C = SeqFunction(1, box.points(), [0.3, 0.2, 0.1])
    tB = SeqFunction(1, box.points(), np.asarray(b) * t)
    V = SumPower(-0.5)
    assert trilinear_form(V, A, tB, C) == pytest.approx(t * trilinear_form(V, A, B, C), rel=1e-12, abs=1e-15)


def test_constant_weight_on_one_point_box():
    assert form_norm_alt(Constant(2.0), radius=0).estimate == pytest.approx(2.0)


def test_constant_weight_norm_on_a_box_is_known():
    # for V = 1 on {-R..R}^2 the optimum is sqrt(R + 1)-ish; it must exceed the uniform value
    R = 3
    res = form_norm_alt(Constant(1.0), radius=R)
    side = 2 * R + 1
    A = np.bincount(np.add.outer(np.arange(side), np.arange(side)).ravel())
    uniform = np.linalg.norm(A) / side
    assert res.estimate >= uniform - 1e-12
    assert res.converged


def test_zero_weight_is_degenerate():
    res = form_norm_alt(Constant(0.0), radius=2)
    assert res.degenerate and res.estimate == 0.0


def test_estimate_is_a_lower_bound_attained_by_its_vectors():
    V = SumPower(-0.5)
    res = form_norm_alt(V, radius=3)
    A = SeqFunction(1, res.a_points, np.maximum(res.A, 0))
    B = SeqFunction(1, res.b_points, np.maximum(res.B, 0))
    C = SeqFunction(1, res.c_points, np.maximum(res.C, 0))
    for s in (A, B, C):
        assert seq_norm(s) == pytest.approx(1.0)
    assert trilinear_form(V, A, B, C) == pytest.approx(res.estimate, rel=1e-9)


def test_restart_values_are_reported():
    res = form_norm_alt(SumPower(-0.5), radius=2, restarts=4)
    assert len(res.restart_values) >= 4
    assert res.estimate == max(res.restart_values)


def test_restarts_must_be_positive():
    with pytest.raises(ValueError):
        form_norm_alt(Constant(1.0), radius=1, restarts=0)


@given(st.integers(0, 10_000))
def test_oracle_never_below_alternating_beyond_grid_error(seed):
    V = random_table(np.random.default_rng(seed), (0, 1, 2), (0, 1))
    bp, cp = oracle_supports(V)
    alt = form_norm_alt(V, b_points=bp, c_points=cp).estimate
    assert form_norm_oracle(V) >= alt * (1 - 1e-4)


def test_oracle_single_point_is_the_value():
    assert form_norm_oracle(Table.from_dict({(1, 2): 0.75})) == pytest.approx(0.75)


def test_oracle_refuses_large_supports():
    with pytest.raises(ValueError):
        form_norm_oracle(Constant(1.0), IndexBox(1, 3))
    with pytest.raises(ValueError):
        form_norm_oracle(Constant(1.0))


def test_left_factor_norm_tends_to_l2_norm():
    V0 = SeqFunction.from_dict({0: 1.0, 2: 0.5})
    est = form_norm_alt(Factor(V0, "left"), radius=16).estimate
    assert est == pytest.approx(seq_norm(V0), rel=0.01)
    assert est <= seq_norm(V0) * (1 + 1e-12)


def test_transform_invariance_on_a_table():
    V = Table.from_dict({(0, 0): 1.0, (1, 0): 0.5, (0, 1): 0.25})
    base = form_norm_oracle(V)
    for variant in ("swap1", "swap2"):
        assert form_norm_oracle(weight_transform(V, variant)) == pytest.approx(base, rel=1e-3)


def test_classify_verdicts():
    assert classify([4, 8, 16, 32], [1, 1.01, 1.015, 1.017])[2] == "bounded"
    assert classify([4, 8, 16, 32], [2, 2 * 2 ** 0.5, 4, 4 * 2 ** 0.5])[2] == "growing"
    assert classify([4, 8, 16, 32], [1, 1.09, 1.19, 1.3])[2] == "inconclusive"


def test_certificate_is_monotone_and_replayable():
    a = certify_weight(SumPower(-0.5), (2, 4, 8), restarts=3, seed=5)
    b = certify_weight(SumPower(-0.5), (2, 4, 8), restarts=3, seed=5)
    assert a.norms == b.norms and a.seeds == b.seeds
    assert all(y >= x - 1e-12 for x, y in zip(a.norms, a.norms[1:]))
    d = a.to_dict()
    assert d["verdict"] == a.verdict and d["radii"] == [2, 4, 8]


def test_certify_needs_three_radii():
    with pytest.raises(ValueError):
        certify_weight(SumPower(-0.5), (4, 8))
