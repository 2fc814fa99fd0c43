"""Discrete bilinear pseudo-differential operators on a periodic grid.

T(f1, f2)(x) = (2 pi)^{-2n} sum over the frequency grid of
sigma(x, xi1, xi2) f1^(xi1) f2^(xi2) e^{i x.(xi1 + xi2)} dxi^{2n},
with f^ from ``grid_ft``. For sigma = 1 this is exactly the pointwise product
of the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from bilinlab.fieldgrid import Grid, GridFunction, amalgam_norm, grid_ft, grid_ift, lr_norm
from bilinlab.fitting import loglog_fit
from bilinlab.lpcalc import Symbol

GENERAL_MAX_POINTS = 1024


def _check_pair(f1: GridFunction, f2: GridFunction) -> Grid:
    if f1.grid != f2.grid:
        raise ValueError("f1 and f2 live on different grids")
    if f1.domain != "space" or f2.domain != "space":
        raise ValueError("operator inputs must be space samples")
    return f1.grid


def _support(F: GridFunction):
    """Indices (m - N/2 per axis) and values of the nonzero spectral samples."""
    g = F.grid
    idx = np.argwhere(F.values != 0)
    return idx - g.N // 2, F.values[tuple(idx.T)]


def _norm_const(g: Grid) -> float:
    return (g.dxi / (2 * math.pi)) ** (2 * g.n)


def apply_xindep(sigma, f1: GridFunction, f2: GridFunction, chunk: int = 4_000_000) -> GridFunction:
    """T_sigma for sigma(xi1, xi2) independent of x (a Symbol or a callable on (..., n) arrays).

    Pairs of spectral samples are grouped by m1 + m2, folded modulo N per axis,
    and one inverse FFT evaluates the diagonal at every grid point.
    """
    g = _check_pair(f1, f2)
    n = g.n
    fn = sigma.freq if isinstance(sigma, Symbol) else sigma
    m1, v1 = _support(grid_ft(f1))
    m2, v2 = _support(grid_ft(f2))
    acc = np.zeros(g.shape, dtype=complex)
    if len(v1) == 0 or len(v2) == 0:
        return GridFunction(g, acc)
    per = max(1, chunk // len(v2))
    for s in range(0, len(v1), per):
        a, va = m1[s:s + per], v1[s:s + per]
        vals = fn(a[:, None, :] * g.dxi, m2[None, :, :] * g.dxi)
        terms = np.broadcast_to(vals, (len(a), len(v2))) * va[:, None] * v2[None, :]
        tot = a[:, None, :] + m2[None, :, :]
        sign = 1 - 2 * (np.sum(tot, axis=-1) % 2)
        flat = np.ravel_multi_index(tuple(np.moveaxis(tot % g.N, -1, 0)), g.shape)
        acc += (np.bincount(flat.ravel(), (terms * sign).real.ravel(), minlength=acc.size)
                + 1j * np.bincount(flat.ravel(), (terms * sign).imag.ravel(), minlength=acc.size)
                ).reshape(g.shape)
    # e^{i x_j xi} = (-1)^s e^{2 pi i s j / N} for xi = s pi / L
    vals = _norm_const(g) * g.N ** n * sfft.ifftn(acc)
    return GridFunction(g, vals)


def apply_general(sigma, f1: GridFunction, f2: GridFunction, *, x_support: float | None = None,
                  chunk: int = 4_000_000) -> GridFunction:
    """Direct evaluation of the double frequency sum at each output point.

    ``sigma`` is a Symbol (x-dependent or not). Rows with |x| beyond
    ``x_support`` (or the symbol's own ``x_support``) are left at zero.
    """
    g = _check_pair(f1, f2)
    n = g.n
    x_support = sigma.x_support if x_support is None and isinstance(sigma, Symbol) else x_support
    if g.N ** n > GENERAL_MAX_POINTS and x_support is None:
        raise ValueError(f"direct evaluation refuses grids above {GENERAL_MAX_POINTS} points "
                         "without an x-support bound")
    m1, v1 = _support(grid_ft(f1))
    m2, v2 = _support(grid_ft(f2))
    xs = g.points().reshape(-1, n)
    rows = np.arange(len(xs))
    if x_support is not None:
        rows = rows[np.max(np.abs(xs), axis=1) <= x_support]
    out = np.zeros(len(xs), dtype=complex)
    if len(v1) == 0 or len(v2) == 0:
        return GridFunction(g, out.reshape(g.shape))
    xi1 = (m1 * g.dxi)[None, :, None, :]
    xi2 = (m2 * g.dxi)[None, None, :, :]
    coef = v1[:, None] * v2[None, :]
    per = max(1, chunk // (len(v1) * len(v2)))
    for s in range(0, len(rows), per):
        r = rows[s:s + per]
        x = xs[r][:, None, None, :]
        sig = np.broadcast_to(sigma(x, xi1, xi2), (len(r), len(v1), len(v2)))
        phase = np.exp(1j * np.sum(x * (xi1 + xi2), axis=-1))
        out[r] = np.einsum("rab,ab->r", sig * phase, coef)
    return GridFunction(g, _norm_const(g) * out.reshape(g.shape))


def apply(sigma: Symbol, f1: GridFunction, f2: GridFunction, **kw) -> GridFunction:
    if sigma.x_independent:
        return apply_xindep(sigma, f1, f2)
    return apply_general(sigma, f1, f2, **kw)


def quadrature_oracle(sigma, f1_hat, f2_hat, xs, *, n_freq: int = 128, half_width: float = 12.0) -> np.ndarray:
    """Dense midpoint quadrature of the defining double integral at points ``xs`` (n = 1).

    ``sigma(x, xi1, xi2)`` and the transforms ``f_hat(xi)`` are closed forms.
    """
    d = 2 * half_width / n_freq
    xi = -half_width + d * (np.arange(n_freq) + 0.5)
    A, B = np.meshgrid(xi, xi, indexing="ij")
    base = f1_hat(A) * f2_hat(B)
    out = []
    for x in np.atleast_1d(np.asarray(xs, float)):
        vals = sigma(np.full(A.shape + (1,), x), A[..., None], B[..., None])
        out.append(np.sum(vals * base * np.exp(1j * x * (A + B))) * d * d / (2 * math.pi) ** 2)
    return np.array(out)


# --------------------------------------------------------------------------
# random inputs and norm sweeps


def random_bandlimited(grid: Grid, band: float, rng: np.random.Generator) -> GridFunction:
    """Complex Gaussian spectrum masked to |xi_j| <= band, unit L^2 norm."""
    if band > math.pi / grid.h:
        raise ValueError(f"band {band} exceeds the Nyquist frequency {math.pi / grid.h:.4g}")
    shape = grid.shape
    spec = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    mask = np.ones(shape, bool)
    for ax in grid.freq_mesh():
        mask &= np.abs(ax) <= band
    f = grid_ift(GridFunction(grid, spec * mask, "frequency"))
    return f * (1.0 / lr_norm(f, 2))


def parse_target(text: str):
    """'lr:R' for L^R, 'amalgam:Q' or 'amalgam:Q1,Q2' for (L^2, l^Q...)."""
    head, _, body = text.partition(":")
    if head == "lr":
        return ("lr", float(body))
    if head == "amalgam":
        qs = [float(v) for v in body.split(",")]
        return ("amalgam", qs[0] if len(qs) == 1 else qs)
    raise ValueError(f"unknown target {text!r}; use lr:R or amalgam:Q[,Q2...]")


def target_norm(f: GridFunction, target) -> float:
    kind, arg = parse_target(target) if isinstance(target, str) else target
    if kind == "lr":
        return lr_norm(f, arg)
    return amalgam_norm(f, 2.0, arg)


@dataclass
class OperatorRatioSweep:
    symbol: str
    target: str
    bandwidths: list
    ratios: list
    trials: int
    seed: int
    slope: float
    residual: float
    label: str = "empirical lower envelope"
    notes: list = field(default_factory=list)

    def plot_data(self):
        return (self.bandwidths, self.ratios, None,
                dict(title=f"{self.symbol} -> {self.target}", xlabel="log2 bandwidth", ylabel="log2 ratio"))


def op_ratio_sweep(sigma: Symbol, target: str, bandwidth_exponents, trials: int = 16, seed: int = 0,
                   grid: Grid | None = None) -> OperatorRatioSweep:
    """Max over random unit-L^2 pairs of target-norm(T(f1, f2)) at bandwidths 2^k."""
    if trials < 8:
        raise ValueError("a sweep needs at least 8 trials")
    ks = [int(k) for k in bandwidth_exponents]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("bandwidth schedule must be strictly increasing")
    if grid is None:
        h = 2.0 ** -max(int(math.ceil(math.log2(2 ** max(ks) / math.pi))) + 1, 0)
        grid = Grid(sigma.n, 16, int(32 / h))
    ratios = []
    for k in ks:
        rng = np.random.default_rng([seed, k])
        best = 0.0
        for _ in range(trials):
            f1 = random_bandlimited(grid, 2.0 ** k, rng)
            f2 = random_bandlimited(grid, 2.0 ** k, rng)
            best = max(best, target_norm(apply(sigma, f1, f2), target))
        ratios.append(best)
    bands = [2.0 ** k for k in ks]
    fit = loglog_fit(bands, ratios)
    return OperatorRatioSweep(sigma.name, target if isinstance(target, str) else repr(target),
                              bands, ratios, trials, seed, fit.slope, fit.residual)
