import math

import numpy as np
import pytest

from bilinlab.experiments import (RANGE_PSI, RANGE_THETA, bandlimited_pieces, check_support, constant_proxy_closed_form,
                                  exp_ghs, exp_random_sign, exp_range, exp_smoothness, ghs_preset, growth_report,
                                  lacunary_symbol, bandlimited_bound_matrix, random_sign_proxy, range_Psi, range_theta,
                                  rs_inverse_lower_bound)
from bilinlab.weights import Constant, SumPower


def test_growth_report_verdicts():
    rep = growth_report("t", [0, 1, 2, 3], [1, 2, 4, 8], 1.0)
    assert rep.slope == pytest.approx(1.0) and rep.passed
    assert growth_report("t", [0, 1, 2, 3], [1, 2, 4, 8], 0.5).verdict == "fail"
    assert growth_report("t", [0, 1, 2, 3], [1, 8, 1, 8], 0.0).verdict == "inconclusive"
    with pytest.raises(ValueError):
        growth_report("t", [0, 1, 2], [1, 2, 4], 1.0)


def test_profiles_have_the_required_supports():
    check_support(range_Psi, RANGE_PSI[1:3], RANGE_PSI[0], RANGE_PSI[3])
    check_support(range_theta, None, RANGE_THETA[0], RANGE_THETA[3])
    with pytest.raises(ValueError):
        check_support(lambda r: np.ones_like(r), None, 0.5, 1.0)


def test_lacunary_symbol_has_one_term_per_point():
    sigma = lacunary_symbol()
    r = np.array([1.0, 2.0, 4.0, 8.0])
    vals = sigma.freq(r[:, None], np.zeros((4, 1)))
    assert np.allclose(np.abs(vals), 2.0 ** (-np.arange(4) / 2))


def test_range_growth_matches_the_exponent_law():
    reps = exp_range((1.0, 2.0, 4.0), K=5)
    for r, rep in reps.items():
        assert rep.slope == pytest.approx(0.5 - 1 / r, abs=0.1)
        assert rep.extra["input_l2_drift"] <= 1e-6
    # r = 1 decays at half an octave per shell
    assert reps[1.0].slope == pytest.approx(-0.5, abs=0.1)


def test_range_refuses_unresolved_shells():
    with pytest.raises(ValueError):
        exp_range((2.0,), K=9)


def test_smoothness_cases():
    assert exp_smoothness("s0", s0=0.25, r=2.0).passed
    assert exp_smoothness("s1", s1=0.0, r=1.0).passed
    finite = exp_smoothness("s1s2", s1=0.75, s2=0.75, r=1.0)
    infinite = exp_smoothness("s1s2", s1=0.25, s2=0.25, r=1.0)
    assert finite.extra["finite"] and not infinite.extra["finite"]
    border = exp_smoothness("s1s2", s1=0.5, s2=0.5, r=1.0)
    assert border.verdict == "inconclusive"
    with pytest.raises(ValueError):
        exp_smoothness("s3")


def test_random_sign_proxy_constant_closed_form():
    for R in (1, 4, 9):
        assert random_sign_proxy(Constant(1.0), R) == pytest.approx(constant_proxy_closed_form(R), rel=1e-12)


def test_random_sign_profile_meets_the_lower_bound():
    assert rs_inverse_lower_bound(401) >= 1.0


def test_random_sign_experiment():
    rep = exp_random_sign(Constant(1.0), radii=(2, 4, 8, 16), seed=3)
    assert rep.slope == pytest.approx(0.5, abs=0.1)
    assert all(1 / 3 <= q <= 3 for q in rep.extra["median_over_proxy"])
    with pytest.raises(ValueError):
        exp_random_sign(Constant(1.0), trials=4)
    assert exp_random_sign(SumPower(-0.5), seed=3).slope <= 0.1


def test_ghs_preset_preconditions():
    with pytest.raises(ValueError):
        ghs_preset(-1.0, 4.0)
    with pytest.raises(ValueError):
        ghs_preset(-0.25, 3.6)
    assert ghs_preset(-5 / 8, 3.6).x_independent


def test_ghs_pieces_settle():
    rep = exp_ghs(ghs_preset(-5 / 8, 3.6), 3.6, K=5, L=64, N=512, trials=8)
    assert rep.ratio_after(3) <= 0.8
    assert math.isfinite(rep.fitted_constant)


def test_band_limited_symbol_has_no_high_pieces():
    vals, pieces = bandlimited_pieces(K=5)
    assert max(np.abs(p).max() for p in pieces[3:]) <= 1e-10
    assert np.abs(sum(pieces) - vals).max() <= 1e-10 * np.abs(vals).max() * 10


def test_band_limited_inequality_ratios_stay_bounded():
    cases = bandlimited_bound_matrix(cases=5, seed=1)
    assert all(0 < c.ratio < 1 for c in cases)
