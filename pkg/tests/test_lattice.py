import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.lattice import IndexBox, SeqFunction, lattice_iter, seq_add_convolve, seq_norm
from bilinlab.weights import Constant

values = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=30)


def test_box_enumeration_is_lexicographic():
    pts = IndexBox(2, 1).points()
    assert len(pts) == 9 == len(IndexBox(2, 1))
    assert pts[0].tolist() == [-1, -1] and pts[1].tolist() == [-1, 0] and pts[-1].tolist() == [1, 1]
    assert [tuple(p) for p in pts] == list(lattice_iter(IndexBox(2, 1)))


def test_box_rejects_bad_shapes():
    with pytest.raises(ValueError):
        IndexBox(0, 2)
    with pytest.raises(ValueError):
        IndexBox(1, -1)


def test_seq_function_lookup_and_off_support_zero():
    a = SeqFunction.from_dict({(0, 1): 2.0, (3, -1): 0.5})
    assert a[(0, 1)] == 2.0 and a[(5, 5)] == 0.0
    assert a.evaluate(np.array([[0.0, 1.0], [0.5, 1.0]])).tolist() == [2.0, 0.0]


def test_seq_function_rejects_negative_and_duplicates():
    with pytest.raises(ValueError):
        SeqFunction.from_dict({0: -1.0})
    with pytest.raises(ValueError):
        SeqFunction(1, np.array([[1], [1]]), np.array([1.0, 2.0]))
    assert SeqFunction.from_dict({0: -1.0}, signed=True)[0] == -1.0


def test_norm_examples():
    a = SeqFunction.from_dict({0: 3.0, 1: 4.0})
    assert seq_norm(a) == 5.0
    assert seq_norm(a, 1) == 7.0
    assert seq_norm(a, math.inf) == 4.0
    # weak l^1 of (4, 3): max(4 * 1, 3 * 2)
    assert seq_norm(a, 1, weak=True) == 6.0


def test_norm_of_empty_sequence_is_zero():
    assert seq_norm(SeqFunction(1, np.zeros((0, 1)), np.zeros(0))) == 0.0


@given(values, st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_weak_norm_below_strong_norm(vals, p):
    assert seq_norm(vals, p, weak=True) <= seq_norm(vals, p) * (1 + 1e-12) + 1e-300


@given(values)
def test_lp_norms_decrease_in_p(vals):
    norms = [seq_norm(vals, p) for p in (1, 2, 4, math.inf)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_csv_round_trip(tmp_path):
    a = SeqFunction.from_dict({(0, 1): 0.25, (-2, 3): 1.0 / 3})
    a.to_csv(tmp_path / "t.csv")
    b = SeqFunction.from_csv(tmp_path / "t.csv")
    assert b[(0, 1)] == 0.25 and b[(-2, 3)] == 1.0 / 3


def test_csv_without_header_is_rejected(tmp_path):
    (tmp_path / "t.csv").write_text("1,2\n")
    with pytest.raises(ValueError):
        SeqFunction.from_csv(tmp_path / "t.csv")


def test_add_convolve_of_deltas():
    out = seq_add_convolve(Constant(2.0), SeqFunction.delta(1, 3.0), SeqFunction.delta(-4, 0.5))
    assert out[-3] == 3.0 and len(out) == 1


@given(st.lists(st.floats(0, 5), min_size=3, max_size=3), st.lists(st.floats(0, 5), min_size=3, max_size=3),
       st.floats(0, 3))
def test_add_convolve_is_bilinear(b, c, t):
    box = IndexBox(1, 1)
    B = SeqFunction(1, box.points(), b)
    C = SeqFunction(1, box.points(), c)
    tB = SeqFunction(1, box.points(), np.array(b) * t)
    base = seq_add_convolve(Constant(1.0), B, C)
    scaled = seq_add_convolve(Constant(1.0), tB, C)
    for k in range(-2, 3):
        assert scaled[k] == pytest.approx(t * base[k], rel=1e-12, abs=1e-12)
