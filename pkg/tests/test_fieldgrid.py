import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.fieldgrid import (Grid, GridFunction, amalgam_norm, check_wraparound, cube_norms, grid_ft, grid_ift,
                                l2ul_norm, lr_norm, mixed_lp_norm)


def indicator(grid, lo, hi):
    return GridFunction.from_function(grid, lambda x: ((x >= lo) & (x < hi)).astype(float))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(1, 16, 500)
    with pytest.raises(ValueError):
        Grid(1, 16, 16)
    g = Grid(1, 4, 64)
    assert g.h == 0.125 and g.per_unit == 8 and g.dxi == pytest.approx(math.pi / 4)
    assert g.axis()[0] == -4 and g.freq_axis()[32] == 0


def test_cube_assignment_uses_centered_cubes():
    g = Grid(1, 2, 8)
    # samples -2, -1.5, ..., 1.5; cube nu holds [nu - 1/2, nu + 1/2)
    assert g.cube_index().tolist() == [0, 1, 1, 2, 2, 3, 3, 0]


def test_gaussian_transform_is_exact():
    g = Grid(1, 16, 512)
    f = GridFunction.from_function(g, lambda x: np.exp(-x ** 2 / 2))
    xi = g.freq_axis()
    err = np.abs(grid_ft(f).values - math.sqrt(2 * math.pi) * np.exp(-xi ** 2 / 2)).max()
    assert err < 1e-12


def test_shift_becomes_a_phase():
    g = Grid(1, 16, 512)
    f = GridFunction.from_function(g, lambda x: np.exp(-(x - 1) ** 2 / 2))
    xi = g.freq_axis()
    ref = math.sqrt(2 * math.pi) * np.exp(-xi ** 2 / 2 - 1j * xi)
    assert np.abs(grid_ft(f).values - ref).max() < 1e-12


@given(st.integers(0, 2 ** 31))
def test_transform_round_trip(seed):
    rng = np.random.default_rng(seed)
    g = Grid(2, 2, 16)
    f = GridFunction(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    back = grid_ift(grid_ft(f))
    assert np.abs(back.values - f.values).max() < 1e-12


@given(st.integers(0, 2 ** 31))
def test_plancherel(seed):
    rng = np.random.default_rng(seed)
    g = Grid(2, 2, 16)
    f = GridFunction(g, rng.normal(size=g.shape))
    F = grid_ft(f)
    lhs = lr_norm(f, 2) ** 2
    rhs = np.sum(np.abs(F.values) ** 2) * g.dxi ** 2 / (2 * math.pi) ** 2
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_indicator_norms():
    g = Grid(1, 8, 64)
    one = indicator(g, -0.5, 0.5)
    assert lr_norm(one, 1) == pytest.approx(1.0)
    assert amalgam_norm(one, 2, 1) == pytest.approx(1.0)
    two = indicator(g, -0.5, 1.5)
    assert amalgam_norm(two, 2, 1) == pytest.approx(2.0)
    assert amalgam_norm(two, 2, 2) == pytest.approx(math.sqrt(2))
    assert l2ul_norm(two) == pytest.approx(1.0)


def test_misaligned_indicator_splits_across_cubes():
    g = Grid(1, 8, 64)
    f = indicator(g, 0.0, 1.0)
    assert amalgam_norm(f, 2, 1) == pytest.approx(2 * math.sqrt(0.5))


@given(st.integers(0, 2 ** 31), st.sampled_from([1.0, 1.5, 2.0]))
def test_lr_below_amalgam_for_r_at_most_two(seed, r):
    rng = np.random.default_rng(seed)
    g = Grid(1, 4, 32)
    f = GridFunction(g, rng.normal(size=g.shape))
    assert lr_norm(f, r) <= amalgam_norm(f, 2, r) * (1 + 1e-12)


@given(st.integers(0, 2 ** 31))
def test_amalgam_monotone_in_q(seed):
    rng = np.random.default_rng(seed)
    g = Grid(2, 2, 8)
    f = GridFunction(g, rng.normal(size=g.shape))
    norms = [amalgam_norm(f, 2, q) for q in (1, 2, 4, math.inf)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
    assert norms[1] == pytest.approx(lr_norm(f, 2), rel=1e-12)


def test_mixed_exponents_take_axis_order():
    g = Grid(2, 2, 4)
    vals = np.zeros(g.shape)
    vals[0, :] = 1.0  # one cube along axis 0, every cube along axis 1
    f = GridFunction(g, vals)
    a = amalgam_norm(f, 2, [1, math.inf])
    b = amalgam_norm(f, 2, [math.inf, 1])
    assert a != b


def test_cube_norms_inf():
    g = Grid(1, 2, 8)
    out = cube_norms(np.arange(8.0), [g], math.inf)
    assert out.tolist() == [7.0, 2.0, 4.0, 6.0]


def test_mixed_lp_norm_of_ones():
    assert mixed_lp_norm(np.ones((4, 2)), (0.5, 1.0), (1, 2)) == pytest.approx(math.sqrt(8.0))


def test_container_round_trip(tmp_path):
    g = Grid(2, 2, 8)
    f = GridFunction(g, np.arange(64.0).reshape(8, 8) + 1j)
    f.save(tmp_path / "f.grid")
    back = GridFunction.load(tmp_path / "f.grid")
    assert back.grid == g and np.array_equal(back.values, f.values)
    (tmp_path / "bad").write_bytes(b"nope\n")
    with pytest.raises(ValueError):
        GridFunction.load(tmp_path / "bad")


def test_csv_export(tmp_path):
    g = Grid(1, 1, 4)
    GridFunction(g, np.ones(4)).to_csv(tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0] == "x,real,imag" and len(lines) == 5


def test_wraparound_flag():
    g = Grid(1, 8, 64)
    wide = GridFunction.from_function(g, lambda x: np.ones_like(x))
    narrow = GridFunction.from_function(g, lambda x: np.exp(-x ** 2))
    assert check_wraparound(wide) and wide.warnings
    assert not check_wraparound(narrow)
    with pytest.warns(RuntimeWarning):
        check_wraparound(wide, warn=True)


def test_domain_mismatch_is_rejected():
    g = Grid(1, 2, 8)
    f = GridFunction(g, np.ones(8))
    with pytest.raises(ValueError):
        grid_ift(f)
    with pytest.raises(ValueError):
        f + GridFunction(g, np.ones(8), "frequency")
