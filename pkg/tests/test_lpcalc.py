import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.fieldgrid import Grid
from bilinlab.lpcalc import (SYMBOL_GRAMMAR, Spectrum, besov_norm_star, besov_norm_vec, bracket_symbol, const_symbol,
                             default_K, delta_star, delta_vec, derivative_decay_check, filter_direct, gauss_symbol,
                             inclusion_ratio, lp_partition, max_shell, modulated_symbol, parse_symbol, phi,
                             psi_k, sample_symbol, spectral_axis, weight_symbol)
from bilinlab.weights import BracketPower, SumPower


def test_cutoff_profile():
    assert phi(np.array([0.0, 1.0])).tolist() == [1.0, 1.0]
    assert phi(np.array([2.0, 3.0])).tolist() == [0.0, 0.0]
    assert 0 < phi(1.5) < 1
    assert psi_k(np.array([0.0]), 1)[0] == 0.0


@given(st.floats(0, 1e4))
def test_psi_pieces_telescope(r):
    total = sum(psi_k(np.array([r]), k)[0] for k in range(16))
    assert total == pytest.approx(phi(np.array([r / 2 ** 15]))[0], abs=1e-12)


def test_partition_sums_to_one():
    g = Grid(2, 8, 128)
    K = max_shell(g)
    P = lp_partition(2, K, g)
    inside = P.radius() <= 2.0 ** K
    assert np.abs(P.total()[inside] - 1).max() < 1e-12


def test_partition_refuses_unresolved_shells():
    g = Grid(1, 16, 128)
    with pytest.raises(ValueError):
        lp_partition(1, max_shell(g) + 2, g)


def test_parse_symbol():
    assert parse_symbol("const:2").x_independent
    assert not parse_symbol("eix-bracket:-1").x_independent
    assert parse_symbol("weight:sum-power:-0.5").name.startswith("weight:")
    with pytest.raises(ValueError) as info:
        parse_symbol("unknown")
    assert SYMBOL_GRAMMAR in str(info.value)


def test_x_dependent_symbol_has_no_frequency_view():
    with pytest.raises(ValueError):
        modulated_symbol(-1).freq(np.zeros((1, 1)), np.zeros((1, 1)))


def small_sample(sigma=None):
    sigma = gauss_symbol() if sigma is None else sigma
    return sample_symbol(sigma, Grid(1, 2, 16), Grid(1, 8, 128))


def test_star_filters_reconstruct():
    s = small_sample()
    Ks = default_K(s)
    spec = Spectrum(s)
    acc = sum(spec.star((a, b, c)) for a in range(Ks[0] + 1) for b in range(Ks[1] + 1) for c in range(Ks[2] + 1))
    assert np.abs(acc - s.values).max() < 1e-10


def test_fft_filter_matches_dense_matrix():
    s = small_sample(modulated_symbol(-1.0))
    k = (1, 2, 0)
    fast = delta_vec(s, k).values
    mults = [lambda r, kk=kk: psi_k(r, kk) for kk in k]
    slow = filter_direct(s.values, s.axis_grids, mults)
    assert np.abs(fast - slow).max() < 1e-12


def test_vec_equals_star_in_one_dimension():
    s = small_sample(bracket_symbol(-0.5))
    assert np.allclose(delta_star(s, (1, 0, 2)).values, delta_vec(s, (1, 0, 2)).values, atol=1e-14)
    a = besov_norm_star(s, BracketPower(-0.5), (0.5, 0.5, 0.5)).total
    b = besov_norm_vec(s, BracketPower(-0.5), (0.5, 0.5, 0.5)).total
    assert a == pytest.approx(b, rel=1e-12)


def test_besov_norm_grows_with_smoothness_weights():
    s = small_sample(bracket_symbol(-0.5))
    W = BracketPower(-0.5)
    lo = besov_norm_star(s, W, (0, 0, 0)).total
    hi = besov_norm_star(s, W, (0.5, 0.5, 0.5)).total
    assert hi >= lo


def test_constant_symbol_has_only_the_zero_shell():
    s = small_sample(const_symbol(1.0))
    rep = besov_norm_star(s, None)
    assert rep.total == pytest.approx(1.0, rel=1e-12)
    assert all(r == 0 for r in rep.increment_ratios[1:])


def test_besov_rejects_negative_smoothness():
    with pytest.raises(ValueError):
        besov_norm_star(small_sample(), None, (-1, 0, 0))
    with pytest.raises(ValueError):
        besov_norm_vec(small_sample(), None, [0, 0])


def test_decay_check_needs_asserted_orders():
    s = small_sample(weight_symbol(SumPower(-0.5)))
    with pytest.raises(ValueError):
        derivative_decay_check(weight_symbol(SumPower(-0.5)), s)


def test_decay_check_on_gaussian():
    sigma = gauss_symbol()
    s = sample_symbol(sigma, Grid(1, 1, 2), Grid(1, 16, 256))
    rep = derivative_decay_check(sigma, s, groups=(1, 2))
    assert rep.ok


def test_inclusion_ratio_is_finite_and_positive():
    s = small_sample(bracket_symbol(-1.0))
    r = inclusion_ratio(s, BracketPower(-1.0), 0.25)
    assert 0 < r < 10


def test_spectral_axis_matches_fft_order():
    g = Grid(1, 2, 8)
    assert spectral_axis(g)[1] == pytest.approx(2 * math.pi / 4)
