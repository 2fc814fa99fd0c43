"""Numbered acceptance checks shared by ``bilinlab selftest`` and the test suite.

Each check returns a list of ``(name, passed, detail)`` tuples.
"""

from __future__ import annotations

import math
import time

import numpy as np

from bilinlab.lattice import IndexBox, SeqFunction, seq_norm


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def random_table(rng: np.random.Generator, b_points=(-2, -1, 0, 1, 2), c_points=(-2, -1, 0, 1, 2),
                 density: float = 0.6):
    """Random nonnegative table weight on b_points x c_points (n = 1), never all zero."""
    from bilinlab.weights import Table

    while True:
        table = {(b, c): float(rng.uniform(0.1, 1.0)) for b in b_points for c in c_points
                 if rng.random() < density}
        if table:
            return Table.from_dict(table)


# --------------------------------------------------------------------------
# 1-4: the trilinear class


def check_oracle_equivalence(count: int = 10, seed: int = 1):
    from bilinlab.trilinear import form_norm_alt, form_norm_oracle, oracle_supports

    def run():
        rng = np.random.default_rng(seed)
        gaps = []
        for _ in range(count):
            V = random_table(rng)
            bp, cp = oracle_supports(V)
            alt = form_norm_alt(V, b_points=bp, c_points=cp, seed=seed).estimate
            ora = form_norm_oracle(V)
            gaps.append(abs(alt - ora) / ora)
        return gaps

    gaps, secs = _timed(run)
    worst = max(gaps)
    return [("alternating method matches the brute-force oracle", worst <= 1e-3 and secs <= 120,
             f"max relative gap {worst:.2e} over {count} tables in {secs:.0f}s (limits 1e-3, 120s)")]


def check_l2_characterization(radius: int = 64, seed: int = 2):
    from bilinlab.trilinear import form_norm_alt
    from bilinlab.weights import Factor

    def run():
        rng = np.random.default_rng(seed)
        rows = []
        for i in range(5):
            size = int(rng.integers(1, 6))
            pts = rng.choice(np.arange(-4, 5), size=size, replace=False)
            V0 = SeqFunction(1, pts[:, None], rng.uniform(0.2, 2.0, size=size))
            V = Factor(V0, "left")
            est = form_norm_alt(V, radius=radius, seed=seed + i, max_iters=5000).estimate
            rows.append(abs(est - seq_norm(V0)) / seq_norm(V0))
        return rows

    rows, secs = _timed(run)
    worst = max(rows)
    return [("form norm of V0(nu1) equals the l2 norm of V0", worst <= 0.01 and secs <= 60,
             f"max relative deviation {worst:.2e} at radius {radius} in {secs:.0f}s (limits 1e-2, 60s)")]


CRITICALITY = [
    ("const:1", "between", 0.5),
    ("sum-power:-0.5", "at_most", 0.1),
    ("split:-0.25,-0.25", "at_most", 0.1),
    ("split:0,-0.5", "between", 0.25),
    ("left(bracket:-0.25)", "between", 0.25),
]


def check_criticality(radii=(4, 8, 16, 32), seed: int = 3):
    from bilinlab.trilinear import certify_weight
    from bilinlab.weights import parse_weight

    out = []
    t0 = time.perf_counter()
    for spec, kind, target in CRITICALITY:
        cert = certify_weight(parse_weight(spec), radii, seed=seed, label=spec)
        ok = cert.slope <= target if kind == "at_most" else abs(cert.slope - target) <= 0.1
        want = f"<= {target}" if kind == "at_most" else f"{target} +- 0.1"
        out.append((f"criticality slope of {spec}", ok,
                    f"slope {cert.slope:.3f} (want {want}), norms {np.round(cert.norms, 4).tolist()}"))
    secs = time.perf_counter() - t0
    out.append(("criticality runtime", secs <= 600, f"{secs:.0f}s (limit 600s)"))
    return out


def check_change_of_variables(seed: int = 4):
    from bilinlab.trilinear import form_norm_oracle
    from bilinlab.weights import weight_transform

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        V = random_table(rng, (0, 1), (0, 1), density=0.8)
        base = form_norm_oracle(V)
        for variant in ("swap1", "swap2"):
            worst = max(worst, abs(form_norm_oracle(weight_transform(V, variant)) - base) / base)
    return [("form norm is invariant under both changes of variables", worst <= 1e-3,
             f"max relative difference {worst:.2e} (limit 1e-3)")]


# --------------------------------------------------------------------------
# 5: operator identities


def _gauss(grid, shift=0.0, width=1.0):
    from bilinlab.fieldgrid import GridFunction

    return GridFunction.from_function(grid, lambda x: np.exp(-((x - shift) / width) ** 2 / 2) + 0j)


def _multiplier(f, m):
    from bilinlab.fieldgrid import GridFunction, grid_ft, grid_ift

    F = grid_ft(f)
    xi = f.grid.freq_axis()
    return grid_ift(GridFunction(f.grid, F.values * m(xi[:, None]), "frequency"))


def check_operator_identities():
    from bilinlab.bilinop import apply_general, apply_xindep, quadrature_oracle
    from bilinlab.fieldgrid import Grid
    from bilinlab.lpcalc import bracket_symbol, const_symbol, separable_symbol

    out = []
    grid = Grid(1, 16, 512)
    f1, f2 = _gauss(grid), _gauss(grid, 1.0, 0.7)
    T = apply_xindep(const_symbol(1.0), f1, f2)
    err = float(np.abs(T.values - f1.values * f2.values).max())
    out.append(("constant symbol gives the pointwise product", err <= 1e-8, f"max abs error {err:.1e}"))

    m1 = lambda a: (1 + a[..., 0] ** 2) ** -0.5
    m2 = lambda b: np.cos(b[..., 0]) / (2 + b[..., 0] ** 2)
    T = apply_xindep(separable_symbol(m1, m2), f1, f2)
    ref = _multiplier(f1, m1).values * _multiplier(f2, m2).values
    err = float(np.abs(T.values - ref).max())
    out.append(("separable symbol factors into two multipliers", err <= 1e-8, f"max abs error {err:.1e}"))

    small = Grid(1, 4, 64)
    g1, g2 = _gauss(small), _gauss(small, -0.5, 0.8)
    worst = 0.0
    for sigma in (bracket_symbol(-0.5), separable_symbol(m1, m2)):
        d = np.abs(apply_general(sigma, g1, g2).values - apply_xindep(sigma, g1, g2).values).max()
        worst = max(worst, float(d))
    out.append(("direct and FFT evaluation agree", worst <= 1e-12, f"max abs difference {worst:.1e}"))

    g128 = Grid(1, 16, 128)
    h1, h2 = _gauss(g128), _gauss(g128, 1.0, 0.7)
    sig = bracket_symbol(-0.5)
    T = apply_xindep(sig, h1, h2)
    hat1 = lambda xi: math.sqrt(2 * math.pi) * np.exp(-xi ** 2 / 2)
    hat2 = lambda xi: 0.7 * math.sqrt(2 * math.pi) * np.exp(-(0.7 * xi) ** 2 / 2 - 1j * xi)
    idx = np.arange(0, 128, 8)
    ref = quadrature_oracle(sig, hat1, hat2, g128.axis()[idx])
    rel = float(np.abs(T.values[idx] - ref).max() / np.abs(ref).max())
    out.append(("quadrature oracle agreement at N=128", rel <= 1e-6, f"max relative error {rel:.1e}"))
    return out


# --------------------------------------------------------------------------
# 6-9: sharpness and growth experiments


def check_range_sharpness():
    from bilinlab.experiments import exp_range

    reps, secs = _timed(lambda: exp_range((1.0, 2.0), K=5))
    s1, s2 = reps[1.0].slope, reps[2.0].slope
    return [("range sharpness slope at r=2", abs(s2) <= 0.1 and secs <= 300, f"slope {s2:.3f} (want 0 +- 0.1)"),
            ("range sharpness slope at r=1", abs(s1 - 0.5) <= 0.1 and secs <= 300,
             f"slope {s1:.3f} (want 0.5 +- 0.1), runtime {secs:.0f}s")]


def check_smoothness_sharpness():
    from bilinlab.experiments import exp_smoothness

    a = exp_smoothness("s0", s0=0.25, r=2.0)
    b = exp_smoothness("s1", s1=0.0, r=1.0)
    return [("x-smoothness sharpness slope (s0=0.25, r=2)", abs(a.slope - 0.25) <= 0.1,
             f"slope {a.slope:.3f} (want 0.25 +- 0.1)"),
            ("xi1-smoothness sharpness slope (s1=0, r=1)", abs(b.slope - 0.5) <= 0.1,
             f"slope {b.slope:.3f} (want 0.5 +- 0.1)")]


def check_random_sign(seed: int = 8):
    from bilinlab.experiments import exp_random_sign
    from bilinlab.weights import Constant, SumPower

    c = exp_random_sign(Constant(1.0), seed=seed)
    ratios = c.extra["median_over_proxy"]
    within = all(1 / 3 <= q <= 3 for q in ratios)
    s = exp_random_sign(SumPower(-0.5), seed=seed)
    return [("random-sign proxy slope for V=1", abs(c.slope - 0.5) <= 0.1, f"slope {c.slope:.3f} (want 0.5 +- 0.1)"),
            ("random-sign medians track the proxy", within,
             f"median/proxy {np.round(ratios, 3).tolist()} (want within a factor 3)"),
            ("random-sign proxy slope for sum-power(-1/2)", s.slope <= 0.1, f"slope {s.slope:.3f} (want <= 0.1)")]


def check_boundedness_sweep(seed: int = 9):
    from bilinlab.bilinop import op_ratio_sweep
    from bilinlab.lpcalc import parse_symbol

    rep = op_ratio_sweep(parse_symbol("weight:step(sum-power:-0.5)"), "amalgam:1", range(2, 7), 16, seed)
    return [("operator ratio sweep into (L2, l1) stays flat", rep.slope <= 0.15,
             f"slope {rep.slope:.3f} (want <= 0.15), ratios {np.round(rep.ratios, 4).tolist()}")]


# --------------------------------------------------------------------------
# 10: Littlewood-Paley


def check_littlewood_paley():
    from bilinlab.fieldgrid import Grid
    from bilinlab.lpcalc import (Spectrum, besov_norm_star, besov_norm_vec, bracket_symbol, default_K,
                                 gauss_symbol, lp_partition, max_shell, sample_symbol)
    from bilinlab.weights import BracketPower

    out = []
    worst = 0.0
    for grid in (Grid(1, 16, 1024), Grid(2, 8, 128)):
        K = max_shell(grid)
        P = lp_partition(grid.n, K, grid)
        inside = P.radius() <= 2.0 ** K
        worst = max(worst, float(np.abs(P.total()[inside] - 1).max()))
    out.append(("dyadic partition sums to one on the resolved ball", worst <= 1e-12, f"max deviation {worst:.1e}"))

    s = sample_symbol(gauss_symbol(), Grid(1, 1, 2), Grid(1, 16, 256))
    spec = Spectrum(s)
    Ks = default_K(s)
    acc = sum(spec.star((a, b, c)) for a in range(Ks[0] + 1) for b in range(Ks[1] + 1) for c in range(Ks[2] + 1))
    err = float(np.abs(acc - s.values).max())
    out.append(("filtered pieces reconstruct the symbol", err <= 1e-10, f"max abs error {err:.1e}"))

    sigma = bracket_symbol(-0.5)
    W = BracketPower(-0.5, 1)
    s = sample_symbol(sigma, Grid(1, 1, 2), Grid(1, 16, 1024))
    star = besov_norm_star(s, W, (0.25, 0.5, 0.5))
    vec = besov_norm_vec(s, W, (0.25, 0.5, 0.5))
    rel = abs(star.total - vec.total) / star.total
    out.append(("vector and star norms coincide for n=1", rel <= 1e-10, f"relative difference {rel:.1e}"))

    plain = besov_norm_star(s, W)
    ratio = plain.ratio_after(3)
    out.append(("shell increments of <(xi1,xi2)>^-1/2 shrink by half", ratio <= 0.5,
                f"largest increment ratio beyond shell 3: {ratio:.3f} (want <= 0.5)"))
    return out


# --------------------------------------------------------------------------
# 11: moderate class


def check_moderate_class():
    from bilinlab.weights import BracketPower, FunctionWeight, Table, moderate_check, v_star

    out = []
    rep = moderate_check(BracketPower(-1.0, 1))
    out.append(("bracket-power(-1) is moderate", rep.passed and rep.spread <= 10, f"spread {rep.spread:.3g} (want <= 10)"))

    gauss_growth = FunctionWeight(lambda p: np.exp(np.sum(p * p, -1)), 2, "exp(|xi|^2)",
                                  lambda p: np.sum(p * p, -1))
    rep = moderate_check(gauss_growth)
    out.append(("exp(|xi|^2) is not moderate", (not rep.passed) and rep.spread >= 1e3,
                f"spread {rep.spread:.3g} (want >= 1e3)"))

    V = Table.indicator(IndexBox(1, 1), IndexBox(1, 0))
    pts = IndexBox(2, 4).points()
    res = v_star(V, 3.0, pts)
    dominated = bool(np.all(res.values >= res.lattice_values))
    rep = moderate_check(res.weight)
    out.append(("V* dominates V on the lattice", dominated,
                f"min V*-V {float(np.min(res.values - res.lattice_values)):.3g} over {len(pts)} points"))
    out.append(("V* is moderate", rep.passed, f"spread {rep.spread:.3g} (threshold {rep.threshold:g})"))
    return out


# --------------------------------------------------------------------------
# 12: dyadic decomposition of rough symbols


def check_ghs(seed: int = 12):
    from bilinlab.experiments import bandlimited_pieces, exp_ghs, ghs_preset

    rep = exp_ghs(ghs_preset(-5 / 8, 3.6), 3.6, seed=seed)
    ratio = rep.ratio_after(3)
    _, pieces = bandlimited_pieces(seed=seed)
    high = max(float(np.abs(p).max()) for p in pieces[3:])
    return [("surrogate sums settle beyond k=3", ratio <= 0.8, f"largest increment ratio {ratio:.3g} (want <= 0.8)"),
            ("band-limited symbol has no pieces from k=3 on", high <= 1e-10, f"max |sigma_k|, k>=3: {high:.1e}")]


# --------------------------------------------------------------------------
# 13: embeddings


def check_embeddings(count: int = 50, seed: int = 13):
    from bilinlab.fieldgrid import Grid, GridFunction, amalgam_norm, lr_norm

    rng = np.random.default_rng(seed)
    worst = -math.inf
    plancherel = 0.0
    for i in range(count):
        grid = Grid(1, 8, 64) if i % 2 == 0 else Grid(2, 4, 32)
        f = GridFunction(grid, rng.normal(size=grid.shape) * rng.exponential(size=grid.shape))
        for r in (1.0, 1.5, 2.0):
            lhs, rhs = lr_norm(f, r), amalgam_norm(f, 2.0, r)
            worst = max(worst, (lhs - rhs) / rhs)
        plancherel = max(plancherel, abs(amalgam_norm(f, 2.0, 2.0) - lr_norm(f, 2)) / lr_norm(f, 2))
    return [("L^r is dominated by (L2, l^r) for r <= 2", worst <= 1e-12,
             f"max (lhs - rhs)/rhs {worst:.2e} over {count} functions"),
            ("(L2, l2) equals L2", plancherel <= 1e-12, f"max relative difference {plancherel:.1e}")]


def run_check(num: int) -> list:
    """Run one numbered check with plain-bool verdicts."""
    return [(name, bool(ok), detail) for name, ok, detail in CHECKS[num]()]


CHECKS = {
    1: check_oracle_equivalence,
    2: check_l2_characterization,
    3: check_criticality,
    4: check_change_of_variables,
    5: check_operator_identities,
    6: check_range_sharpness,
    7: check_smoothness_sharpness,
    8: check_random_sign,
    9: check_boundedness_sweep,
    10: check_littlewood_paley,
    11: check_moderate_class,
    12: check_ghs,
    13: check_embeddings,
}
