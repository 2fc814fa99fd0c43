"""Reproducible growth experiments for bilinear symbols (dimension n = 1).

Each experiment builds an explicit symbol and family of inputs, measures a
norm along a dyadic schedule and fits the log2 growth rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.integrate import quad

from bilinlab.bilinop import apply_general, apply_xindep, random_bandlimited
from bilinlab.fieldgrid import Grid, GridFunction, amalgam_norm, grid_ift, lr_norm
from bilinlab.fitting import dyadic_fit, loglog_fit
from bilinlab.lattice import IndexBox, SeqFunction, seq_add_convolve, seq_norm
from bilinlab.lpcalc import Symbol, annulus, phi, psi_k, sample_symbol, smooth_bump
from bilinlab.weights import Constant, Weight

FIT_RESIDUAL_MAX = 0.15


@dataclass
class GrowthReport:
    experiment: str
    schedule: list
    values: list
    slope: float
    predicted: float
    tolerance: float
    residual: float  # max |log2 value - fitted line|
    verdict: str  # "pass", "fail" or "inconclusive"
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    dyadic: bool = True  # schedule holds exponents k rather than radii

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def plot_data(self):
        xs = [2.0 ** k for k in self.schedule] if self.dyadic else list(self.schedule)
        fit = loglog_fit(xs, self.values)
        return (xs, self.values, (fit.slope, fit.intercept),
                dict(title=self.experiment, xlabel="log2 scale", ylabel="log2 value"))


def growth_report(name, schedule, values, predicted, tolerance=0.1, *, dyadic=True, params=None,
                  extra=None, notes=None) -> GrowthReport:
    if len(schedule) < 4:
        raise ValueError("a growth fit needs at least 4 schedule points")
    x = np.asarray(schedule, float)
    t = x if dyadic else np.log2(x)
    fit = dyadic_fit(t, values)
    resid = float(np.max(np.abs(np.log2(values) - (fit.slope * t + fit.intercept))))
    if resid > FIT_RESIDUAL_MAX:
        verdict = "inconclusive"
    else:
        verdict = "pass" if abs(fit.slope - predicted) <= tolerance else "fail"
    return GrowthReport(name, list(schedule), [float(v) for v in values], fit.slope, predicted, tolerance,
                        resid, verdict, params or {}, extra or {}, notes or [], dyadic)


# --------------------------------------------------------------------------
# profiles

RANGE_PSI = (2 ** -0.5, 2 ** -0.25, 2 ** 0.25, 2 ** 0.5)
RANGE_THETA = (2 ** -0.75, 2 ** -0.625, 2 ** -0.375, 2 ** -0.25)


def range_Psi(r):
    """Radial profile equal to 1 on [2^{-1/4}, 2^{1/4}], supported in [2^{-1/2}, 2^{1/2}]."""
    return annulus(r, *RANGE_PSI)


def range_theta(r):
    """Radial bump supported in [2^{-3/4}, 2^{-1/4}]."""
    return annulus(r, *RANGE_THETA)


def check_support(profile, inside, outside_lo, outside_hi, samples: int = 4001):
    """Raise unless ``profile`` vanishes outside [outside_lo, outside_hi] and equals 1 on ``inside``."""
    r = np.linspace(0, 2 * outside_hi + 1, samples)
    v = np.asarray(profile(r), float)
    out = (r < outside_lo) | (r > outside_hi)
    if np.any(np.abs(v[out]) > 0):
        raise ValueError("profile does not vanish outside its required support")
    if inside is not None:
        lo, hi = inside
        on = (r >= lo) & (r <= hi)
        if np.any(np.abs(v[on] - 1) > 1e-12):
            raise ValueError("profile is not 1 on its required plateau")


def lacunary_symbol(Psi=range_Psi, n: int = 1) -> Symbol:
    """sum_j 2^{-jn/2} Psi(2^{-j} |(xi_1, xi_2)|); at most one term is nonzero at each point."""

    def fn(x, a, b):
        r = np.sqrt(np.sum(a * a, -1) + np.sum(b * b, -1))
        with np.errstate(divide="ignore"):
            j = np.clip(np.round(np.log2(np.where(r > 0, r, 1e-300))), 0, None)
        return 2.0 ** (-j * n / 2) * Psi(r / 2.0 ** j) + 0j

    return Symbol(fn, n, True, "lacunary")


def spectral_function(grid: Grid, profile) -> GridFunction:
    """The function whose grid transform samples ``profile(xi)``."""
    return grid_ift(GridFunction(grid, profile(grid.freq_mesh()[0]), "frequency"))


# --------------------------------------------------------------------------
# sharpness in r


def exp_range(r_values=(1.0, 2.0), K: int = 5, *, L: int = 512, h: float = 1 / 16,
              Psi=None, theta=None, tolerance: float = 0.1) -> dict:
    """L^r growth of T(f_{1,k}, f_{2,k}) for k = 0..K; one shared construction for all r.

    Returns {r: GrowthReport}.
    """
    Psi = range_Psi if Psi is None else Psi
    theta = range_theta if theta is None else theta
    check_support(Psi, RANGE_PSI[1:3], RANGE_PSI[0], RANGE_PSI[3])
    check_support(theta, None, RANGE_THETA[0], RANGE_THETA[3])
    if 2 ** K * RANGE_THETA[3] > math.pi / h:
        raise ValueError(f"K={K} exceeds the grid's frequency budget")
    grid = Grid(1, L, int(round(2 * L / h)))
    sigma = lacunary_symbol(Psi)
    outputs, l2 = [], []
    for k in range(K + 1):
        f = spectral_function(grid, lambda xi: 2.0 ** (-k / 2) * theta(np.abs(xi) / 2.0 ** k))
        l2.append(lr_norm(f, 2))
        outputs.append(apply_xindep(sigma, f, f))
    drift = float(max(l2) - min(l2))
    reports = {}
    for r in r_values:
        vals = [lr_norm(T, r) for T in outputs]
        reports[r] = growth_report(f"range r={r}", list(range(K + 1)), vals, 0.5 - 1.0 / r, tolerance,
                                   params=dict(r=r, K=K, L=L, h=h), extra=dict(input_l2=l2, input_l2_drift=drift))
    return reports


# --------------------------------------------------------------------------
# sharpness in smoothness


def _s0_symbol(s0: float) -> Symbol:
    def fn(x, a, b):
        xs, sa = x[..., 0], a[..., 0] + b[..., 0]
        return phi(xs) * np.exp(-1j * xs * sa) * (1 + a[..., 0] ** 2 + b[..., 0] ** 2) ** (-(s0 + 0.5) / 2)

    return Symbol(fn, 1, False, f"s0-family:{s0}", x_support=2.0)


def _s1_symbol(s1: float) -> Symbol:
    def fn(x, a, b):
        xs = x[..., 0]
        return (1 + xs * xs) ** (-s1 / 2) * np.exp(-1j * xs * a[..., 0]) * phi(a[..., 0]) * phi(b[..., 0])

    return Symbol(fn, 1, False, f"s1-family:{s1}")


TAIL_START = 3  # first shell 2^3 <= |x|, where <x> is within 1% of |x|


def _tail_shells(a: float, r: float, js):
    """Integrals of <x>^{-a r} over the dyadic shells 2^j <= |x| < 2^{j+1}."""
    f = lambda x: (1 + x * x) ** (-a * r / 2)
    return [2 * quad(f, 2.0 ** j, 2.0 ** (j + 1), epsabs=0, epsrel=1e-12, limit=200)[0] for j in js]


def exp_smoothness(case: str, *, s0: float = 0.25, s1: float = 0.0, s2: float = 0.0, r: float = 2.0,
                   J: int = 5, tolerance: float = 0.1) -> GrowthReport:
    """Norm growth for the three smoothness families.

    ``s0``: predicted slope -s0 + 1/2; ``s1``: -s1 + 1/r - 1/2 (j = 1..J);
    ``s1s2``: dyadic-shell integrals of <x>^{-(s1+s2) r}, predicted slope 1 - r(s1+s2),
    finite exactly when that slope is negative.
    """
    if min(s0, s1, s2) < 0 or r < 1:
        raise ValueError("smoothness parameters must be nonnegative and r >= 1")
    if case == "s0":
        grid = Grid(1, 16, 1024)
        if 2 ** (J + 1) > math.pi / grid.h:
            raise ValueError("J too large for the grid")
        sigma = _s0_symbol(s0)
        theta = lambda xi: annulus(xi, 0.5, 0.6, 1.8, 2.0)
        vals = []
        for j in range(J + 1):
            f = spectral_function(grid, lambda xi: 2.0 ** (-j / 2) * theta(np.abs(xi) / 2.0 ** j))
            vals.append(lr_norm(apply_general(sigma, f, f), r))
        return growth_report("smoothness s0", list(range(J + 1)), vals, -s0 + 0.5, tolerance,
                             params=dict(case=case, s0=s0, r=r, J=J))
    if case == "s1":
        grid = Grid(1, 256, 1024)
        sigma = _s1_symbol(s1)
        f1 = spectral_function(grid, phi)
        vals = []
        for j in range(1, J + 1):
            f2 = spectral_function(grid, lambda xi: 2.0 ** (j / 2) * phi(2.0 ** j * xi))
            vals.append(lr_norm(apply_general(sigma, f1, f2), r))
        rep = growth_report("smoothness s1", list(range(1, J + 1)), vals, -s1 + 1 / r - 0.5, tolerance,
                            params=dict(case=case, s1=s1, r=r, J=J))
        return rep
    if case == "s1s2":
        a = s1 + s2
        predicted = 1 - r * a
        js = list(range(TAIL_START, TAIL_START + J + 1))
        vals = _tail_shells(a, r, js)
        rep = growth_report("smoothness s1s2", js, vals, predicted, tolerance,
                            params=dict(case=case, s1=s1, s2=s2, r=r, J=J))
        if math.isclose(r * a, 1.0):
            rep.verdict = "inconclusive"
            rep.notes.append("borderline r(s1+s2) = n: no verdict")
            rep.extra["finite"] = None
        else:
            rep.extra["finite"] = bool(rep.slope < 0)
        return rep
    raise ValueError(f"unknown case {case!r}; use s0, s1 or s1s2")


# --------------------------------------------------------------------------
# random signs


def rs_phi_tilde(t):
    """1 on [-1/4, 1/4], supported in [-1/2, 1/2]."""
    return smooth_bump(t, 0.25, 0.5)


RS_PHI_HEIGHT = 4 * math.pi / (0.25 * math.cos(math.pi / 4))


def rs_phi(t):
    """Bump supported in [-1/4, 1/4], scaled so |F^{-1} phi| >= 1 on [-pi, pi]."""
    return RS_PHI_HEIGHT * smooth_bump(t, 0.125, 0.25)


def rs_inverse_lower_bound(samples: int = 2001) -> float:
    """min over |x| <= pi of |F^{-1} rs_phi(x)|, by quadrature."""
    xs = np.linspace(-math.pi, math.pi, samples)
    re = [quad(lambda t: rs_phi(t) * math.cos(x * t), -0.25, 0.25, limit=200)[0] / (2 * math.pi) for x in xs]
    return float(np.min(np.abs(re)))


def _nearest(v):
    return np.floor(v + 0.5)


def random_sign_symbol(V: Weight, R: int, eps: dict) -> Symbol:
    """sum eps_{k1+k2} V(k1, k2) phi~(xi1 - k1) phi~(xi2 - k2) over |k_i| <= R."""
    lo = -2 * R
    table = np.array([eps[k] for k in range(-2 * R, 2 * R + 1)])

    def fn(x, a, b):
        a, b = a[..., 0], b[..., 0]
        k1, k2 = _nearest(a), _nearest(b)
        inside = (np.abs(k1) <= R) & (np.abs(k2) <= R)
        v = V.evaluate(np.stack(np.broadcast_arrays(k1, k2), -1))
        s = table[np.clip((k1 + k2).astype(int) - lo, 0, len(table) - 1)]
        return np.where(inside, s * v * rs_phi_tilde(a - k1) * rs_phi_tilde(b - k2), 0.0) + 0j

    return Symbol(fn, 1, True, f"random-sign:{V.label}")


def random_sign_proxy(V: Weight, R: int) -> float:
    """||d||_{l^2} / (||B|| ||C||) with B = C = indicator of {-R..R}."""
    B = SeqFunction.on_box(IndexBox(1, R))
    d = seq_add_convolve(V, B, B)
    return seq_norm(d, 2) / seq_norm(B, 2) ** 2


def constant_proxy_closed_form(R: int) -> float:
    M = 2 * R + 1
    return math.sqrt(math.fsum((M - abs(k)) ** 2 for k in range(-2 * R, 2 * R + 1))) / M


def exp_random_sign(V: Weight, radii=(4, 8, 16, 32), trials: int = 9, r: float = 1.0, seed: int = 0,
                    *, L: int = 64, h: float = 1 / 16, predicted: float | None = None,
                    tolerance: float = 0.1) -> GrowthReport:
    """Median over sign draws of ||T(f1, f2)||_{L^r} / (||f1|| ||f2||) against the proxy.

    The fitted slope is that of the proxy; the report's extra section holds the
    medians, the medians' own slope and their ratio to the proxy per radius.
    """
    if trials < 8:
        raise ValueError("at least 8 trials are needed for a stable median")
    grid = Grid(1, L, int(round(2 * L / h)))
    if max(radii) + 0.5 > math.pi / h:
        raise ValueError("radius exceeds the grid's frequency budget")
    proxies, medians = [], []
    for R in radii:
        B = np.ones(2 * R + 1)
        f = spectral_function(grid, lambda xi: _comb(xi, B, R))
        norm2 = lr_norm(f, 2) ** 2
        ratios = []
        for t in range(trials):
            rng = np.random.default_rng([seed, R, t])
            eps = dict(zip(range(-2 * R, 2 * R + 1), rng.choice([-1.0, 1.0], size=4 * R + 1)))
            T = apply_xindep(random_sign_symbol(V, R, eps), f, f)
            ratios.append(lr_norm(T, r) / norm2)
        medians.append(float(np.median(ratios)))
        proxies.append(random_sign_proxy(V, R))
    rep = growth_report(f"random-sign {V.label}", list(radii), proxies,
                        _proxy_prediction(V) if predicted is None else predicted, tolerance, dyadic=False,
                        params=dict(weight=V.label, trials=trials, r=r, seed=seed, L=L, h=h))
    rep.extra.update(medians=medians, median_slope=loglog_fit(radii, medians).slope,
                     median_over_proxy=[m / p for m, p in zip(medians, proxies)])
    if isinstance(V, Constant):
        rep.extra["closed_form"] = [V.c * constant_proxy_closed_form(R) for R in radii]
    return rep


def _proxy_prediction(V: Weight) -> float:
    return 0.5 if isinstance(V, Constant) else 0.0


def _comb(xi, B, R):
    k = _nearest(xi)
    inside = np.abs(k) <= R
    coef = np.where(inside, B[np.clip(k.astype(int) + R, 0, len(B) - 1)], 0.0)
    return coef * rs_phi(xi - k)


# --------------------------------------------------------------------------
# dyadic decomposition of rough symbols


def ghs_preset(m: float, q: float, n: int = 1) -> Symbol:
    """<(xi_1, xi_2)>^m with sup_x |sigma| in L^q(R^{2n}); requires q < 4 and -m q > 2n."""
    if not q < 4:
        raise ValueError(f"q={q} is not below 4")
    if not -m * q > 2 * n:
        raise ValueError(f"<xi>^{m} is not in L^{q}(R^{2 * n})")
    from bilinlab.lpcalc import bracket_symbol

    return bracket_symbol(m, n)


@dataclass
class GHSReport:
    symbol: str
    q: float
    K: int
    sup_pieces: list
    sup_ratio: list  # max over samples of |sigma_k| / V_k
    fitted_constant: float
    decay_slope: float
    surrogates: list
    partial_sums: list
    increment_ratios: list
    noise_floor: float
    notes: list = field(default_factory=list)

    def ratio_after(self, k: int) -> float:
        tail = self.increment_ratios[k + 1:]
        return max(tail) if tail else math.nan


def symbol_pieces(values: np.ndarray, dxi: float, K: int) -> list:
    """sigma_k = psi_k(D) sigma for k = 0..K over the two frequency axes (n = 1)."""
    N = values.shape[0]
    eta = 2 * math.pi * sfft.fftfreq(N, d=dxi)
    r = np.sqrt(eta[:, None] ** 2 + eta[None, :] ** 2)
    hat = sfft.fft2(values)
    return [sfft.ifft2(hat * psi_k(r, k)) for k in range(K + 1)]


def _lookup(values: np.ndarray, grid: Grid):
    half = grid.N // 2

    def fn(a, b):
        i = np.rint(a[..., 0] / grid.dxi).astype(int) + half
        j = np.rint(b[..., 0] / grid.dxi).astype(int) + half
        return values[i, j]

    return fn


def V_k(V, xi, k: int, N: float = 6.0, Z: float = 40.0, dz: float = 0.25) -> np.ndarray:
    """int V(xi - 2^{-k} z) (1 + |z_1| + |z_2|)^{-N} dz by a midpoint rule on [-Z, Z]^2."""
    z = -Z + dz * (np.arange(int(2 * Z / dz)) + 0.5)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    ker = (1 + np.abs(Z1) + np.abs(Z2)) ** (-N) * dz * dz
    out = []
    for p in np.atleast_2d(xi):
        pts = np.stack([p[0] - Z1 / 2.0 ** k, p[1] - Z2 / 2.0 ** k], -1)
        out.append(float(np.sum(V(pts) * ker)))
    return np.array(out)


def exp_ghs(sigma: Symbol, q: float, K: int = 6, *, L: int = 128, N: int = 1024, band: float = 4.0,
            trials: int = 8, seed: int = 0, samples: int = 25, floor_rel: float = 1e-12) -> GHSReport:
    """Pieces sigma_k, the pointwise bound against V_k, their decay and per-piece operator surrogates.

    The surrogate for piece k is the max over shared random unit-L^2 pairs of
    ||T_{sigma_k}(f1, f2)||_{(L^2, l^1)}.
    """
    if not q < 4:
        raise ValueError(f"q={q} is not below 4")
    if not sigma.x_independent:
        raise ValueError("the decomposition experiment takes x-independent symbols")
    grid = Grid(1, L, N)
    xi = grid.freq_axis()
    A, B = np.meshgrid(xi, xi, indexing="ij")
    vals = sigma.freq(A[..., None], B[..., None])
    pieces = symbol_pieces(vals, grid.dxi, K)
    sup = [float(np.abs(p).max()) for p in pieces]

    # pointwise bound at interior sample points
    rng = np.random.default_rng([seed, 0])
    inner = 0.5 * math.pi / grid.h
    pts = rng.uniform(-inner / 2, inner / 2, size=(samples, 2))
    idx = np.rint(pts / grid.dxi).astype(int) + N // 2
    pts = (idx - N // 2) * grid.dxi
    V = lambda p: np.abs(sigma.freq(p[..., :1], p[..., 1:]))
    ratios = []
    for k, p in enumerate(pieces):
        vk = V_k(V, pts, k)
        ratios.append(float(np.max(np.abs(p[idx[:, 0], idx[:, 1]]) / vk)))

    floor = floor_rel * max(sup[0], 1e-300)
    live = [(k, v) for k, v in enumerate(sup) if k >= 1 and v > floor]
    decay = dyadic_fit(*zip(*live)).slope if len(live) >= 2 else -math.inf

    pairs = []
    prng = np.random.default_rng([seed, 1])
    for _ in range(trials):
        pairs.append((random_bandlimited(grid, band, prng), random_bandlimited(grid, band, prng)))
    surrogates = []
    for p in pieces:
        fn = _lookup(p, grid)
        surrogates.append(max(amalgam_norm(apply_xindep(fn, f1, f2), 2.0, 1.0) for f1, f2 in pairs))
    partial = np.cumsum(surrogates).tolist()
    sfloor = floor_rel * partial[-1]
    inc_ratios = [math.nan]
    for k in range(1, K + 1):
        if surrogates[k] <= sfloor:
            inc_ratios.append(0.0)
        elif surrogates[k - 1] <= sfloor:
            inc_ratios.append(math.inf)
        else:
            inc_ratios.append(surrogates[k] / surrogates[k - 1])
    return GHSReport(sigma.name, q, K, sup, ratios, max(ratios), decay, surrogates, partial, inc_ratios, sfloor)


def bandlimited_pieces(K: int = 6, L: int = 32, N: int = 256, seed: int = 0):
    """Pieces of a random trigonometric symbol whose spectrum lies in |eta| <= 2."""
    grid = Grid(1, L, N)
    step = 2 * math.pi / (N * grid.dxi)  # spectral grid spacing
    rng = np.random.default_rng(seed)
    xi = grid.freq_axis()
    A, B = np.meshgrid(xi, xi, indexing="ij")
    vals = np.zeros(A.shape, complex)
    m = int(2 / step)
    for _ in range(6):
        while True:
            a, b = rng.integers(-m, m + 1, size=2) * step
            if math.hypot(a, b) <= 2:
                break
        vals += (rng.normal() + 1j * rng.normal()) * np.exp(1j * (a * A + b * B))
    return vals, symbol_pieces(vals, grid.dxi, K)


# --------------------------------------------------------------------------
# the band-limited mixed-norm inequality


@dataclass
class BandlimitedBoundCase:
    R: tuple
    p1: float
    p2: float
    ratio: float


def _trig_symbol(R, rng, terms: int = 5) -> Symbol:
    freqs = np.column_stack([rng.uniform(-Ri, Ri, size=terms) for Ri in R])
    coef = rng.normal(size=terms) + 1j * rng.normal(size=terms)

    def fn(x, a, b):
        out = 0.0
        for (c0, c1, c2), c in zip(freqs, coef):
            out = out + c * np.exp(1j * (c0 * x[..., 0] + c1 * a[..., 0] + c2 * b[..., 0]))
        return out

    return Symbol(fn, 1, False, "trig")


def bandlimited_bound_matrix(cases: int = 20, seed: int = 0, W: Weight | None = None) -> list:
    """Ratios |int T(f1, f2) g| / (R0^{1/2} R1^{1/p1} R2^{1/p2} ||W^{-1} sigma||_{L2ul} ||f1|| ||f2|| ||g||_{(L2, l^r')})."""
    from bilinlab.lpcalc import l2ul_inner
    from bilinlab.weights import SumPower

    W = SumPower(-0.5) if W is None else W
    rng = np.random.default_rng(seed)
    grid = Grid(1, 8, 128)
    gx, gxi = Grid(1, 4, 64), Grid(1, 8, 64)
    out = []
    Rs = [1.0, 2.0, 4.0]
    ps = [(2.0, 2.0), (2.0, 4.0), (4.0, 4.0), (2.0, math.inf), (4.0, 2.0)]
    for c in range(cases):
        R = tuple(float(rng.choice(Rs)) for _ in range(3))
        p1, p2 = ps[c % len(ps)]
        rr = 1.0 / (1.0 / p1 + 1.0 / p2)
        rdual = math.inf if rr == 1 else rr / (rr - 1)
        sigma = _trig_symbol(R, rng)
        f1 = random_bandlimited(grid, 4.0, rng)
        f2 = random_bandlimited(grid, 4.0, rng)
        g = random_bandlimited(grid, 4.0, rng)
        T = apply_general(sigma, f1, f2)
        lhs = abs(np.sum(T.values * g.values) * grid.h)
        s = sample_symbol(sigma, gx, gxi)
        a, b = s.xi_mesh()
        wsym = l2ul_inner(s.values / W.evaluate(np.concatenate([a, b], -1))[None], s)
        scale = R[0] ** 0.5 * R[1] ** (1 / p1) * R[2] ** (1 / p2)
        rhs = scale * wsym * amalgam_norm(g, 2.0, rdual)
        out.append(BandlimitedBoundCase(R, p1, p2, float(lhs / rhs)))
    return out
