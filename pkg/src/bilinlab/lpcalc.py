"""Littlewood-Paley pieces of symbols sigma(x, xi_1, xi_2) and Besov-type sums.

A sampled symbol is an array with 3n axes ordered (x_1..x_n, xi_1 axes,
xi_2 axes), each axis carrying a one-dimensional ``Grid``. Filters act on the
symbol's own spectrum: radially within each variable group (``delta_star``) or
axis by axis (``delta_vec``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft

from bilinlab.fieldgrid import Grid, cube_norms
from bilinlab.fitting import dyadic_fit
from bilinlab.weights import BracketPower, Constant, Weight

# --------------------------------------------------------------------------
# the cutoff and the partition


def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def phi(r):
    """Radial cutoff: 1 for r <= 1, 0 for r >= 2, smooth and monotone between."""
    r = np.abs(np.asarray(r, dtype=float))
    a, b = _g(2.0 - r), _g(r - 1.0)
    return a / (a + b)


def psi(r):
    return phi(r) - phi(2.0 * np.asarray(r, dtype=float))


def psi_k(r, k: int):
    """psi_0 = phi, psi_k = psi(. / 2^k) for k >= 1."""
    r = np.asarray(r, dtype=float)
    return phi(r) if k == 0 else psi(r / 2.0 ** k)


def smooth_bump(r, inner: float, outer: float):
    """1 for r <= inner, 0 for r >= outer, built from the same glue."""
    t = (np.abs(np.asarray(r, dtype=float)) - inner) / (outer - inner)
    return phi(1.0 + t)


def annulus(r, a: float, b: float, c: float, d: float):
    """Smooth radial profile equal to 1 on [b, c], supported in [a, d]."""
    r = np.abs(np.asarray(r, dtype=float))
    return smooth_bump(r, c, d) * (1.0 - smooth_bump(r, a, b))


def max_shell(grid: Grid) -> int:
    """Largest shell index resolved by the grid: floor(log2(pi/h)) - 1."""
    return int(math.floor(math.log2(math.pi / grid.h))) - 1


def spectral_axis(grid: Grid) -> np.ndarray:
    """Angular frequencies of a 1-D grid in FFT order."""
    return 2 * math.pi * sfft.fftfreq(grid.N, d=grid.h)


@dataclass
class PartitionOfUnity:
    d: int
    K: int
    grid: Grid
    pieces: np.ndarray  # (K+1, N, ..., N) samples of psi_k on the frequency grid

    def total(self) -> np.ndarray:
        return self.pieces.sum(axis=0)

    def radius(self) -> np.ndarray:
        xi = self.grid.freq_mesh()
        return np.sqrt(sum(x * x for x in xi))


def lp_partition(d: int, K: int, grid: Grid) -> PartitionOfUnity:
    """psi_0, ..., psi_K sampled on the (ascending) frequency grid of ``grid``."""
    if grid.n != d:
        raise ValueError("grid dimension must equal d")
    if math.pi / grid.h < 2.0 ** (K + 1):
        raise ValueError(f"K={K} needs Nyquist pi/h >= {2 ** (K + 1)}, grid has {math.pi / grid.h:.3g}")
    xi = grid.freq_mesh()
    r = np.sqrt(sum(x * x for x in xi))
    return PartitionOfUnity(d, K, grid, np.stack([psi_k(r, k) for k in range(K + 1)]))


# --------------------------------------------------------------------------
# symbols


@dataclass(frozen=True, eq=False)
class Symbol:
    """sigma(x, xi_1, xi_2); ``fn`` takes arrays of shape (..., n) and broadcasts.

    ``orders`` records asserted derivative bounds |d^alpha sigma| <= C W for
    |alpha_i| <= orders[i] (catalog entries only); ``x_support`` bounds |x| on
    the x-support when sigma vanishes outside it.
    """

    fn: Callable
    n: int = 1
    x_independent: bool = False
    name: str = "symbol"
    orders: tuple | None = None
    weight: Weight | None = None
    x_support: float | None = None

    def __call__(self, x, xi1, xi2):
        return self.fn(np.asarray(x, float), np.asarray(xi1, float), np.asarray(xi2, float))

    def freq(self, xi1, xi2):
        """Values of an x-independent symbol on (xi_1, xi_2)."""
        if not self.x_independent:
            raise ValueError(f"{self.name} depends on x")
        xi1 = np.asarray(xi1, float)
        return self.fn(np.zeros_like(xi1), xi1, np.asarray(xi2, float))


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=-1))


def const_symbol(c: float = 1.0, n: int = 1) -> Symbol:
    return Symbol(lambda x, a, b: np.full(np.broadcast_shapes(x.shape, a.shape, b.shape)[:-1], c + 0j),
                  n, True, f"const:{c}", (math.inf, math.inf, math.inf), Constant(abs(c) or 1.0, n))


def bracket_symbol(m: float, n: int = 1) -> Symbol:
    """<(xi_1, xi_2)>^m, every derivative bounded by the weight itself."""
    return Symbol(lambda x, a, b: (1.0 + np.sum(a * a, -1) + np.sum(b * b, -1)) ** (m / 2) + 0j,
                  n, True, f"bracket-power:{m}", (math.inf, 4, 4), BracketPower(m, n))


def gauss_symbol(n: int = 1) -> Symbol:
    return Symbol(lambda x, a, b: np.exp(-(np.sum(a * a, -1) + np.sum(b * b, -1)) / 2) + 0j,
                  n, True, "gauss", (math.inf, 4, 4), Constant(1.0, n))


def weight_symbol(W: Weight) -> Symbol:
    """A weight used as an x-independent symbol."""
    n = W.dim
    return Symbol(lambda x, a, b: W.evaluate(np.concatenate(np.broadcast_arrays(a, b), -1)) + 0j,
                  n, True, f"weight:{W.label}", None, W)


def modulated_symbol(m: float, n: int = 1) -> Symbol:
    """e^{i x_1} <(xi_1, xi_2)>^m: a single x-frequency."""
    return Symbol(lambda x, a, b: np.exp(1j * x[..., 0]) * (1 + np.sum(a * a, -1) + np.sum(b * b, -1)) ** (m / 2),
                  n, False, f"eix-bracket:{m}", (math.inf, 4, 4), BracketPower(m, n))


def separable_symbol(m1: Callable, m2: Callable, n: int = 1, name: str = "separable") -> Symbol:
    return Symbol(lambda x, a, b: m1(a) * m2(b) + 0j, n, True, name)


SYMBOL_GRAMMAR = """symbol mini-language:
  const:C              constant symbol
  bracket-power:M      <(xi1,xi2)>^M
  gauss                exp(-(|xi1|^2+|xi2|^2)/2)
  eix-bracket:M        exp(i x) <(xi1,xi2)>^M
  weight:SPEC          a weight spec used as an x-independent symbol, e.g. weight:step(sum-power:-0.5)"""


def parse_symbol(text: str, n: int = 1) -> Symbol:
    from bilinlab.weights import parse_weight

    head, _, body = text.strip().partition(":")
    try:
        if head == "const":
            return const_symbol(float(body), n)
        if head == "bracket-power":
            return bracket_symbol(float(body), n)
        if head == "gauss" and not body:
            return gauss_symbol(n)
        if head == "eix-bracket":
            return modulated_symbol(float(body), n)
        if head == "weight":
            return weight_symbol(parse_weight(body, n))
    except ValueError as exc:
        raise ValueError(f"cannot parse symbol {text!r}: {exc}\n{SYMBOL_GRAMMAR}") from None
    raise ValueError(f"cannot parse symbol {text!r}\n{SYMBOL_GRAMMAR}")


# --------------------------------------------------------------------------
# sampled symbols and dyadic filters


@dataclass
class SampledSymbol:
    values: np.ndarray
    grids: tuple  # (gx, g1, g2), 1-D grids for the three variable groups
    n: int = 1
    name: str = "sampled"

    @property
    def axis_grids(self) -> list:
        return [g for g in self.grids for _ in range(self.n)]

    def group_axes(self, i: int) -> tuple:
        return tuple(range(i * self.n, (i + 1) * self.n))

    def xi_mesh(self):
        """(xi_1, xi_2) meshes over the frequency axes, shape (N1.., N2..)."""
        n = self.n
        axes = [self.grids[1].axis()] * n + [self.grids[2].axis()] * n
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh[:n], -1), np.stack(mesh[n:], -1)


def sample_symbol(sigma: Symbol, gx: Grid, g1: Grid, g2: Grid | None = None) -> SampledSymbol:
    g2 = g1 if g2 is None else g2
    for g in (gx, g1, g2):
        if g.n != 1:
            raise ValueError("pass one-dimensional grids for each variable group")
    n = sigma.n
    axes = [gx.axis()] * n + [g1.axis()] * n + [g2.axis()] * n
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    shape = tuple(len(a) for a in axes)
    x = np.stack(np.broadcast_arrays(*mesh[:n]), -1) if n > 1 else mesh[0][..., None]
    a = np.stack(np.broadcast_arrays(*mesh[n:2 * n]), -1) if n > 1 else mesh[1][..., None]
    b = np.stack(np.broadcast_arrays(*mesh[2 * n:]), -1) if n > 1 else mesh[2][..., None]
    vals = np.broadcast_to(sigma(x, a, b), shape).astype(complex)
    return SampledSymbol(vals, (gx, g1, g2), n, sigma.name)


def _group_multiplier(s: SampledSymbol, i: int, k: int) -> np.ndarray:
    """psi_k(|eta|) over the n axes of group i, shaped to broadcast against the values."""
    n = s.n
    eta = spectral_axis(s.grids[i])
    mesh = np.meshgrid(*([eta] * n), indexing="ij", sparse=True)
    r = np.sqrt(sum(m * m for m in mesh))
    mult = psi_k(r, k)
    shape = [1] * (3 * n)
    for j, ax in enumerate(s.group_axes(i)):
        shape[ax] = len(eta)
    return mult.reshape(shape)


def _axis_multiplier(s: SampledSymbol, ax: int, k: int) -> np.ndarray:
    g = s.axis_grids[ax]
    shape = [1] * (3 * s.n)
    shape[ax] = g.N
    return psi_k(np.abs(spectral_axis(g)), k).reshape(shape)


class Spectrum:
    """Cached spectrum of a sampled symbol so many filters share one forward transform."""

    def __init__(self, s: SampledSymbol):
        self.s = s
        self.hat = sfft.fftn(s.values)

    def star(self, k) -> np.ndarray:
        mult = 1.0
        for i, ki in enumerate(k):
            mult = mult * _group_multiplier(self.s, i, int(ki))
        return sfft.ifftn(self.hat * mult)

    def vec(self, kvec) -> np.ndarray:
        kvec = list(kvec)
        if len(kvec) != 3 * self.s.n:
            raise ValueError(f"need {3 * self.s.n} indices")
        mult = 1.0
        for ax, ki in enumerate(kvec):
            mult = mult * _axis_multiplier(self.s, ax, int(ki))
        return sfft.ifftn(self.hat * mult)


def delta_star(s: SampledSymbol, k) -> SampledSymbol:
    """psi_{k0}(D_x) psi_{k1}(D_xi1) psi_{k2}(D_xi2) sigma."""
    return SampledSymbol(Spectrum(s).star(k), s.grids, s.n, f"star{tuple(k)}({s.name})")


def delta_vec(s: SampledSymbol, kvec) -> SampledSymbol:
    """Per-axis filters psi_{k_{i,j}}(D) on every one of the 3n axes."""
    return SampledSymbol(Spectrum(s).vec(kvec), s.grids, s.n, f"vec{tuple(kvec)}({s.name})")


def filter_direct(values: np.ndarray, grids: list, multipliers: list) -> np.ndarray:
    """Dense-matrix version of per-axis Fourier multipliers (an independent check on the FFT path)."""
    out = np.asarray(values, dtype=complex)
    for ax, (g, m) in enumerate(zip(grids, multipliers)):
        j = np.arange(g.N)
        eta = spectral_axis(g)
        F = np.exp(-2j * math.pi * np.outer(j, j) / g.N)
        op = (F.conj().T * m(np.abs(eta))) @ F / g.N
        out = np.moveaxis(np.tensordot(op, out, axes=([1], [ax])), 0, ax)
    return out


# --------------------------------------------------------------------------
# Besov-type sums


def _inv_weight(s: SampledSymbol, W: Weight | None) -> np.ndarray:
    if W is None:
        return np.ones(1)
    a, b = s.xi_mesh()
    w = W.evaluate(np.concatenate([a, b], axis=-1))
    if np.any(w <= 0):
        raise ValueError("the weight must be strictly positive on the grid")
    return (1.0 / w)[(None,) * s.n]


def _inner_mask(s: SampledSymbol, margin) -> list:
    margins = [margin] * 3 if np.isscalar(margin) else list(margin)
    masks = []
    for i, g in enumerate(s.grids):
        nu = np.arange(2 * g.L) - g.L
        keep = np.abs(nu) <= g.L - margins[i] if margins[i] else np.ones(2 * g.L, bool)
        if not keep.any():
            keep = nu == 0
        masks += [keep] * s.n
    return masks


def l2ul_inner(values: np.ndarray, s: SampledSymbol, margin=0) -> float:
    """L^2_ul over unit 3n-cubes, sup restricted to cubes at least ``margin`` away from the edge."""
    norms = cube_norms(values, s.axis_grids, 2.0)
    for ax, keep in enumerate(_inner_mask(s, margin)):
        norms = np.compress(keep, norms, axis=ax)
    return float(norms.max())


@dataclass
class BesovReport:
    symbol: str
    weight: str
    s: list
    K: list
    kind: str
    terms: dict
    partial_sums: list
    increments: list
    increment_ratios: list
    noise_floor: float
    notes: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.partial_sums[-1]

    def ratio_after(self, shell: int) -> float:
        """Largest increment ratio over shells beyond ``shell`` (0 once increments hit the noise floor)."""
        tail = self.increment_ratios[shell + 1:]
        return max(tail) if tail else math.nan


def _shells(terms: dict, K: int, floor_rel: float):
    shell = np.zeros(K + 1)
    for k, v in terms.items():
        shell[max(k)] += v
    partial = np.cumsum(shell)
    floor = floor_rel * max(partial[-1], 1e-300)
    ratios = [math.nan]
    for m in range(1, K + 1):
        if shell[m] <= floor:
            ratios.append(0.0)
        elif shell[m - 1] <= floor:
            ratios.append(math.inf)
        else:
            ratios.append(shell[m] / shell[m - 1])
    return partial.tolist(), shell.tolist(), ratios, floor


def default_K(s: SampledSymbol) -> list:
    return [max(max_shell(g), 0) for g in s.grids]


def besov_norm_star(s: SampledSymbol, W: Weight | None, svec=(0.0, 0.0, 0.0), K=None,
                    margin=0, floor_rel: float = 1e-12) -> BesovReport:
    """Partial sums of 2^{s.k} ||W^{-1} Delta*_k sigma||_{L^2_ul} grouped by shell max(k)."""
    svec = [float(v) for v in svec]
    if len(svec) != 3 or min(svec) < 0:
        raise ValueError("star smoothness is a triple of nonnegative numbers")
    Ks = default_K(s) if K is None else ([K] * 3 if np.isscalar(K) else list(K))
    spec = Spectrum(s)
    winv = _inv_weight(s, W)
    terms = {}
    for k in itertools.product(*(range(Ki + 1) for Ki in Ks)):
        piece = spec.star(k)
        terms[k] = 2.0 ** float(np.dot(svec, k)) * l2ul_inner(piece * winv, s, margin)
    partial, inc, ratios, floor = _shells(terms, max(Ks), floor_rel)
    return BesovReport(s.name, getattr(W, "label", "1"), svec, Ks, "star", terms, partial, inc, ratios, floor)


def besov_norm_vec(s: SampledSymbol, W: Weight | None, svec=None, K=None, margin=0,
                   floor_rel: float = 1e-12) -> BesovReport:
    """As ``besov_norm_star`` over vector indices k in N_0^{3n} with weights 2^{s.k}."""
    n = s.n
    svec = [0.0] * (3 * n) if svec is None else [float(v) for v in svec]
    if len(svec) != 3 * n or min(svec) < 0:
        raise ValueError(f"vector smoothness needs {3 * n} nonnegative entries")
    Kg = default_K(s) if K is None else ([K] * 3 if np.isscalar(K) else list(K))
    Ks = [Kg[i] for i in range(3) for _ in range(n)]
    spec = Spectrum(s)
    winv = _inv_weight(s, W)
    terms = {}
    for k in itertools.product(*(range(Ki + 1) for Ki in Ks)):
        terms[k] = 2.0 ** float(np.dot(svec, k)) * l2ul_inner(spec.vec(k) * winv, s, margin)
    partial, inc, ratios, floor = _shells(terms, max(Ks), floor_rel)
    return BesovReport(s.name, getattr(W, "label", "1"), svec, Ks, "vec", terms, partial, inc, ratios, floor)


@dataclass
class DecayReport:
    symbol: str
    orders: tuple
    shells: list  # per group: list of (k, value)
    slopes: list  # decay exponents (positive = decaying); inf when all shells vanish
    passed: list

    @property
    def ok(self) -> bool:
        return all(self.passed)


def derivative_decay_check(sigma: Symbol, s: SampledSymbol, W: Weight | None = None, orders=None,
                           margin=0, floor_rel: float = 1e-12, groups=(0, 1, 2)) -> DecayReport:
    """Decay rate of ||W^{-1} Delta*_{k e_i} sigma||_{L^2_ul} in k along each variable group.

    Passes group i when the fitted decay exponent is at least orders[i] - 0.5.
    Only catalog symbols with asserted derivative bounds are accepted.
    """
    if sigma.orders is None:
        raise ValueError(f"{sigma.name} carries no asserted derivative bounds")
    orders = tuple(sigma.orders if orders is None else orders)
    W = sigma.weight if W is None else W
    spec = Spectrum(s)
    winv = _inv_weight(s, W)
    base = l2ul_inner(spec.star((0, 0, 0)) * winv, s, margin)
    floor = floor_rel * max(base, 1e-300)
    shells, slopes, passed = [], [], []
    Ks = default_K(s)
    for i in range(3):
        if i not in groups:
            shells.append([])
            slopes.append(math.nan)
            passed.append(True)
            continue
        vals = []
        for k in range(1, Ks[i] + 1):
            idx = [0, 0, 0]
            idx[i] = k
            vals.append((k, l2ul_inner(spec.star(idx) * winv, s, margin)))
        shells.append(vals)
        live = [(k, v) for k, v in vals if v > floor]
        if len(live) < 2:
            slope = math.inf
        else:
            slope = -dyadic_fit(*zip(*live)).slope
        slopes.append(slope)
        need = orders[i] if orders[i] is not None else 0.0
        passed.append(slope >= need - 0.5 if math.isfinite(need) else slope == math.inf or slope > 8)
    return DecayReport(sigma.name, orders, shells, slopes, passed)


def inclusion_ratio(s: SampledSymbol, W: Weight | None, t: float, K=None, margin=0) -> float:
    """||sigma||_{vec, (t,...,t)} / ||sigma||_{star, (2t, 2t, 2t)} on one sampled symbol."""
    vec = besov_norm_vec(s, W, [t] * (3 * s.n), K, margin).total
    star = besov_norm_star(s, W, (2 * t, 2 * t, 2 * t), K, margin).total
    return vec / star if star > 0 else 0.0
