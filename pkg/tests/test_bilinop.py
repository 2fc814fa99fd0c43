import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.bilinop import (apply, apply_general, apply_xindep, op_ratio_sweep, parse_target, quadrature_oracle,
                              random_bandlimited, target_norm)
from bilinlab.fieldgrid import Grid, GridFunction, lr_norm
from bilinlab.lpcalc import bracket_symbol, const_symbol, gauss_symbol, modulated_symbol, parse_symbol


def gauss(grid, shift=0.0):
    return GridFunction.from_function(grid, lambda x: np.exp(-(x - shift) ** 2 / 2))


def test_constant_symbol_is_the_product():
    g = Grid(1, 16, 512)
    f1, f2 = gauss(g), gauss(g, 1.0)
    T = apply(const_symbol(1.0), f1, f2)
    assert np.abs(T.values - f1.values * f2.values).max() < 1e-8


def test_gaussian_symbol_closed_form():
    # sigma = exp(-(xi1^2 + xi2^2)/2) with Gaussian inputs gives exp(-x^2/2) / 2
    g = Grid(1, 16, 512)
    f = gauss(g)
    T = apply(gauss_symbol(), f, f)
    x = g.axis()
    assert np.abs(T.values - 0.5 * np.exp(-x ** 2 / 2)).max() < 1e-12


@given(st.integers(0, 2 ** 31), st.floats(-3, 3))
def test_bilinearity(seed, t):
    rng = np.random.default_rng(seed)
    g = Grid(1, 4, 32)
    a, b, c = (random_bandlimited(g, 4.0, rng) for _ in range(3))
    sigma = bracket_symbol(-0.5)
    lhs = apply(sigma, a * t + b, c).values
    rhs = t * apply(sigma, a, c).values + apply(sigma, b, c).values
    assert np.abs(lhs - rhs).max() < 1e-10


def test_general_matches_xindep():
    g = Grid(1, 4, 64)
    f1, f2 = gauss(g), gauss(g, 0.5)
    for sigma in (bracket_symbol(-0.5), gauss_symbol()):
        assert np.abs(apply_general(sigma, f1, f2).values - apply_xindep(sigma, f1, f2).values).max() < 1e-12


def test_x_modulation_multiplies_the_output():
    g = Grid(1, 4, 64)
    f1, f2 = gauss(g), gauss(g, 0.5)
    T = apply(modulated_symbol(-1.0), f1, f2)
    ref = np.exp(1j * g.axis()) * apply_xindep(bracket_symbol(-1.0), f1, f2).values
    assert np.abs(T.values - ref).max() < 1e-12


def test_general_refuses_large_grids():
    g = Grid(1, 16, 2048)
    f = gauss(g)
    with pytest.raises(ValueError):
        apply_general(modulated_symbol(-1.0), f, f)


def test_quadrature_oracle_agreement():
    g = Grid(1, 16, 128)
    f1, f2 = gauss(g), gauss(g, 1.0)
    sigma = bracket_symbol(-1.0)
    T = apply(sigma, f1, f2)
    hat1 = lambda xi: math.sqrt(2 * math.pi) * np.exp(-xi ** 2 / 2)
    hat2 = lambda xi: hat1(xi) * np.exp(-1j * xi)
    idx = np.arange(0, 128, 16)
    ref = quadrature_oracle(sigma, hat1, hat2, g.axis()[idx])
    assert np.abs(T.values[idx] - ref).max() <= 1e-6 * np.abs(ref).max()


def test_mismatched_grids_are_rejected():
    with pytest.raises(ValueError):
        apply(const_symbol(), gauss(Grid(1, 4, 32)), gauss(Grid(1, 4, 64)))


def test_random_bandlimited_is_normalized_and_bandlimited(rng):
    g = Grid(1, 8, 64)
    f = random_bandlimited(g, 2.0, rng)
    assert lr_norm(f, 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        random_bandlimited(g, 100.0, rng)


def test_targets():
    assert parse_target("lr:2") == ("lr", 2.0)
    assert parse_target("amalgam:1,2") == ("amalgam", [1.0, 2.0])
    with pytest.raises(ValueError):
        parse_target("hardy:1")
    g = Grid(1, 4, 32)
    f = gauss(g)
    assert target_norm(f, "amalgam:2") == pytest.approx(lr_norm(f, 2))


def test_sweep_preconditions_and_label():
    sigma = parse_symbol("weight:step(sum-power:-0.5)")
    with pytest.raises(ValueError):
        op_ratio_sweep(sigma, "amalgam:1", [2, 3], trials=4)
    with pytest.raises(ValueError):
        op_ratio_sweep(sigma, "amalgam:1", [3, 2])
    rep = op_ratio_sweep(sigma, "amalgam:1", [1, 2, 3], trials=8, seed=1)
    assert rep.label == "empirical lower envelope" and len(rep.ratios) == 3
    again = op_ratio_sweep(sigma, "amalgam:1", [1, 2, 3], trials=8, seed=1)
    assert again.ratios == rep.ratios
