"""Weights V on Z^{2n} and W on R^{2n}.

Every weight exposes ``evaluate(points)`` where ``points`` has trailing axis
``point_dim`` (= 2n for the bilinear weights, whose first n coordinates are
nu_1 and last n are nu_2). Catalog forms evaluate at real points as well as at
lattice points.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp

from bilinlab.lattice import IndexBox, SeqFunction, seq_norm


def bracket(x, axis=-1):
    """<x> = (1 + |x|^2)^{1/2} over the trailing axis."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(1.0 + np.sum(x * x, axis=axis))


class Weight:
    """Base class; subclasses set ``dim`` (n) and implement ``evaluate``."""

    dim: int = 1

    @property
    def point_dim(self) -> int:
        return 2 * self.dim

    def evaluate(self, points) -> np.ndarray:
        raise NotImplementedError

    def log_evaluate(self, points) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.evaluate(points))

    def __call__(self, *coords) -> float:
        return float(self.evaluate(np.asarray(coords, dtype=float)))

    def _split(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.point_dim:
            raise ValueError(f"expected points with {self.point_dim} coordinates, got {pts.shape[-1]}")
        return pts[..., : self.dim], pts[..., self.dim:]

    @property
    def label(self) -> str:
        return repr(self)


def _fmt(x: float) -> str:
    return repr(float(x)) if float(x) != int(x) else str(int(x))


@dataclass(frozen=True)
class SumPower(Weight):
    """(1 + |nu_1| + |nu_2|)^m."""

    m: float
    dim: int = 1

    def evaluate(self, points):
        a, b = self._split(points)
        return (1.0 + np.linalg.norm(a, axis=-1) + np.linalg.norm(b, axis=-1)) ** self.m

    @property
    def label(self):
        return f"sum-power:{_fmt(self.m)}"


@dataclass(frozen=True)
class BracketPower(Weight):
    """<(xi_1, xi_2)>^m."""

    m: float
    dim: int = 1

    def evaluate(self, points):
        self._split(points)
        return bracket(points) ** self.m

    def log_evaluate(self, points):
        self._split(points)
        return 0.5 * self.m * np.log1p(np.sum(np.asarray(points, float) ** 2, axis=-1))

    @property
    def label(self):
        return f"bracket-power:{_fmt(self.m)}"


@dataclass(frozen=True)
class Split(Weight):
    """<xi_1>^{m1} <xi_2>^{m2}; with ``base='one-plus'`` uses (1 + |nu|) instead."""

    m1: float
    m2: float
    dim: int = 1
    base: str = "bracket"

    def evaluate(self, points):
        a, b = self._split(points)
        if self.base == "bracket":
            return bracket(a) ** self.m1 * bracket(b) ** self.m2
        return (1 + np.linalg.norm(a, axis=-1)) ** self.m1 * (1 + np.linalg.norm(b, axis=-1)) ** self.m2

    @property
    def label(self):
        return f"split:{_fmt(self.m1)},{_fmt(self.m2)}"


@dataclass(frozen=True)
class CoordProduct(Weight):
    """prod_j prod_i (1 + |nu_{i,j}|)^{-a_{i,j}}; ``exponents`` lists a_{1,.} then a_{2,.}."""

    exponents: tuple

    @property
    def dim(self):
        return len(self.exponents) // 2

    def evaluate(self, points):
        pts = np.abs(np.asarray(points, dtype=float))
        if pts.shape[-1] != len(self.exponents):
            raise ValueError("coordinate count does not match exponent count")
        return np.prod((1.0 + pts) ** (-np.asarray(self.exponents, float)), axis=-1)

    @property
    def label(self):
        return "coord:" + ",".join(_fmt(a) for a in self.exponents)


@dataclass(frozen=True)
class PowerProfile:
    """<nu>^m on Z^dim, a one-variable profile for the factor weights."""

    m: float
    dim: int = 1

    def evaluate(self, points):
        return bracket(points) ** self.m

    @property
    def label(self):
        return f"bracket:{_fmt(self.m)}"


@dataclass(frozen=True)
class Factor(Weight):
    """V_0(nu_1), V_0(nu_2) or V_0(nu_1 + nu_2) for ``which`` in left/right/sum."""

    profile: object
    which: str = "left"

    def __post_init__(self):
        if self.which not in ("left", "right", "sum"):
            raise ValueError(f"unknown factor position {self.which!r}")

    @property
    def dim(self):
        return self.profile.dim

    def evaluate(self, points):
        a, b = self._split(points)
        arg = {"left": a, "right": b, "sum": a + b}[self.which]
        return np.asarray(self.profile.evaluate(arg), dtype=float)

    @property
    def label(self):
        inner = getattr(self.profile, "label", None) or "table:<memory>"
        return f"{self.which}({inner})"


@dataclass(frozen=True)
class Constant(Weight):
    c: float = 1.0
    dim: int = 1

    def evaluate(self, points):
        self._split(points)
        return np.full(np.shape(points)[:-1], float(self.c))

    @property
    def label(self):
        return f"const:{_fmt(self.c)}"


@dataclass(frozen=True, eq=False)
class Table(Weight):
    """A finitely supported lattice weight; reads 0 off-support."""

    seq: SeqFunction
    source: str | None = None

    def __post_init__(self):
        if self.seq.dim % 2:
            raise ValueError("a table weight needs an even number of coordinates")

    @property
    def dim(self):
        return self.seq.dim // 2

    def evaluate(self, points):
        return self.seq.evaluate(points)

    @property
    def label(self):
        return f"table:{self.source or '<memory>'}"

    @classmethod
    def from_dict(cls, table: dict):
        return cls(SeqFunction.from_dict(table))

    @classmethod
    def indicator(cls, box1: IndexBox, box2: IndexBox, value: float = 1.0):
        """value on box1 x box2 (boxes on Z^n)."""
        p1, p2 = box1.points(), box2.points()
        pts = np.concatenate([np.repeat(p1, len(p2), axis=0), np.tile(p2, (len(p1), 1))], axis=1)
        return cls(SeqFunction(2 * box1.dim, pts, np.full(len(pts), value)))


@dataclass(frozen=True, eq=False)
class Tensor(Weight):
    """W((mu_1, mu_1'), (mu_2, mu_2')) = V(mu_1, mu_2) V'(mu_1', mu_2')."""

    first: Weight
    second: Weight

    @property
    def dim(self):
        return self.first.dim + self.second.dim

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        d, e = self.first.dim, self.second.dim
        if pts.shape[-1] != 2 * (d + e):
            raise ValueError("tensor weight evaluated at a point of the wrong dimension")
        nu1, nu2 = pts[..., : d + e], pts[..., d + e:]
        p = np.concatenate([nu1[..., :d], nu2[..., :d]], axis=-1)
        q = np.concatenate([nu1[..., d:], nu2[..., d:]], axis=-1)
        return self.first.evaluate(p) * self.second.evaluate(q)

    @property
    def label(self):
        return f"tensor({self.first.label};{self.second.label})"


SWAPS = ("swap1", "swap2")


@dataclass(frozen=True, eq=False)
class Transformed(Weight):
    """swap1: V(nu_1 + nu_2, -nu_2); swap2: V(-nu_1, nu_1 + nu_2). Both are involutions."""

    base: Weight
    variant: str

    def __post_init__(self):
        if self.variant not in SWAPS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def dim(self):
        return self.base.dim

    def evaluate(self, points):
        a, b = self._split(points)
        if self.variant == "swap1":
            moved = np.concatenate([a + b, -b], axis=-1)
        else:
            moved = np.concatenate([-a, a + b], axis=-1)
        return self.base.evaluate(moved)

    @property
    def seq(self) -> SeqFunction:
        """Support table of a transformed table weight (both maps are involutions)."""
        base = getattr(self.base, "seq", None)
        if base is None:
            raise AttributeError("seq")
        sup = base.support()
        n = self.dim
        a, b = sup[:, :n], sup[:, n:]
        moved = np.concatenate([a + b, -b] if self.variant == "swap1" else [-a, a + b], axis=1)
        return SeqFunction(2 * n, moved, self.base.evaluate(sup))

    @property
    def label(self):
        return f"{self.variant}({self.base.label})"


@dataclass(frozen=True, eq=False)
class StepExtended(Weight):
    """Piecewise constant extension of a lattice weight over the cubes nu + [-1/2, 1/2)^n."""

    base: Weight

    @property
    def dim(self):
        return self.base.dim

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        return self.base.evaluate(np.floor(pts + 0.5))

    @property
    def label(self):
        return f"step({self.base.label})"


@dataclass(frozen=True, eq=False)
class FunctionWeight(Weight):
    """An arbitrary positive function on R^d (d = ``ndim``); not serializable."""

    fn: Callable
    ndim: int
    name: str = "function"
    log_fn: Callable | None = None

    @property
    def point_dim(self):
        return self.ndim

    @property
    def dim(self):
        return max(self.ndim // 2, 1)

    def evaluate(self, points):
        return np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float)

    def log_evaluate(self, points):
        if self.log_fn is not None:
            return np.asarray(self.log_fn(np.asarray(points, dtype=float)), dtype=float)
        return super().log_evaluate(points)

    @property
    def label(self):
        return self.name


def weight_eval(spec: Weight, point) -> float:
    return float(spec.evaluate(np.asarray(point, dtype=float)))


def step_extend(V: Weight) -> StepExtended:
    return StepExtended(V)


def weight_transform(V: Weight, variant: str) -> Transformed:
    return Transformed(V, variant)


def weight_tensor(V: Weight, Vp: Weight) -> Tensor:
    return Tensor(V, Vp)


# --------------------------------------------------------------------------
# presets and the CLI mini-language


def weight_preset(name: str, n: int = 1, exponents=None) -> Weight:
    """Example weights with their parameter constraints enforced.

    ``name`` is one of ``"sum"`` ((1 + |nu_1| + |nu_2|)^{-n/2}), ``"product2"``
    ((1 + |nu_1|)^{-a_1} (1 + |nu_2|)^{-a_2}, a_1, a_2 > 0, a_1 + a_2 = n/2) or
    ``"product1"`` (coordinatewise, a_{1,j}, a_{2,j} > 0, a_{1,j} + a_{2,j} = 1/2).
    """
    if name == "sum":
        return SumPower(-n / 2, dim=n)
    if exponents is None:
        raise ValueError(f"preset {name!r} needs exponents")
    a = np.asarray(exponents, dtype=float)
    if np.any(a <= 0):
        raise ValueError("preset exponents must be positive")
    if name == "product2":
        if a.shape != (2,) or not math.isclose(a.sum(), n / 2):
            raise ValueError(f"product2 needs a_1 + a_2 = n/2 = {n / 2}")
        return Split(-a[0], -a[1], dim=n, base="one-plus")
    if name == "product1":
        if a.shape != (2, n) or not np.allclose(a.sum(axis=0), 0.5):
            raise ValueError("product1 needs a (2, n) array with a_{1,j} + a_{2,j} = 1/2")
        return CoordProduct(tuple(a[0]) + tuple(a[1]))
    raise ValueError(f"unknown preset {name!r}")


GRAMMAR = """weight mini-language:
  sum-power:M          (1+|nu1|+|nu2|)^M
  bracket-power:M      <(nu1,nu2)>^M
  split:M1,M2          <nu1>^M1 <nu2>^M2
  coord:A11,..,A1n,A21,..,A2n   prod (1+|nu_ij|)^-Aij
  const:C              constant C
  table:PATH.csv       finitely supported table (columns nu..., value)
  left(P) right(P) sum(P)   P(nu1), P(nu2), P(nu1+nu2) with P = bracket:M | table:PATH.csv
  tensor(SPEC;SPEC)    tensor product
  swap1(SPEC) swap2(SPEC)   V(nu1+nu2,-nu2), V(-nu1,nu1+nu2)
  step(SPEC)           piecewise-constant extension to R^2n"""


class WeightSyntaxError(ValueError):
    def __init__(self, text, reason):
        super().__init__(f"cannot parse weight {text!r}: {reason}\n{GRAMMAR}")


def _split_top(s: str, sep: str) -> list[str]:
    depth, parts, cur = 0, [], []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _numbers(text, body):
    try:
        return [float(x) for x in body.split(",")]
    except ValueError:
        raise WeightSyntaxError(text, f"bad number list {body!r}") from None


def _single(text, body) -> float:
    vals = _numbers(text, body)
    if len(vals) != 1:
        raise WeightSyntaxError(text, f"expected one number, got {body!r}")
    return vals[0]


def parse_profile(text: str, dim: int = 1):
    head, _, body = text.strip().partition(":")
    if head == "bracket":
        m = _single(text, body)
        return PowerProfile(m, dim)
    if head == "table":
        return SeqFunction.from_csv(body)
    raise WeightSyntaxError(text, "profiles are bracket:M or table:PATH")


def parse_weight(text: str, dim: int = 1) -> Weight:
    s = text.strip()
    call = re.fullmatch(r"([a-z0-9]+)\((.*)\)", s)
    if call:
        head, inner = call.groups()
        if head == "tensor":
            parts = _split_top(inner, ";")
            if len(parts) != 2:
                raise WeightSyntaxError(text, "tensor takes two specs separated by ';'")
            return Tensor(parse_weight(parts[0], dim), parse_weight(parts[1], dim))
        if head in SWAPS:
            return Transformed(parse_weight(inner, dim), head)
        if head == "step":
            return StepExtended(parse_weight(inner, dim))
        if head in ("left", "right", "sum"):
            return Factor(parse_profile(inner, dim), head)
        raise WeightSyntaxError(text, f"unknown combinator {head!r}")
    head, colon, body = s.partition(":")
    if not colon:
        raise WeightSyntaxError(text, "expected FORM:ARGS")
    if head == "sum-power":
        m = _single(text, body)
        return SumPower(m, dim)
    if head == "bracket-power":
        m = _single(text, body)
        return BracketPower(m, dim)
    if head == "split":
        vals = _numbers(text, body)
        if len(vals) != 2:
            raise WeightSyntaxError(text, "split takes two exponents")
        return Split(vals[0], vals[1], dim)
    if head == "coord":
        vals = _numbers(text, body)
        if len(vals) % 2:
            raise WeightSyntaxError(text, "coord takes 2n exponents")
        return CoordProduct(tuple(vals))
    if head == "const":
        c = _single(text, body)
        return Constant(c, dim)
    if head == "table":
        try:
            return Table(SeqFunction.from_csv(body), source=body)
        except OSError as exc:
            raise WeightSyntaxError(text, str(exc)) from None
    raise WeightSyntaxError(text, f"unknown form {head!r}")


# --------------------------------------------------------------------------
# weak l^4 and the moderate class


def weak_l4_norm(V: Weight, box: IndexBox) -> float:
    """l^{4,inf} quasi-norm of V restricted to a box on Z^{2n}."""
    if box.dim != V.point_dim:
        raise ValueError("box dimension must equal the weight's point dimension")
    return seq_norm(V.evaluate(box.points()), 4, weak=True)


def default_moderate_exponent(d: int) -> float:
    return 2.0 * d + 2.0


def kernel_mass(N: float, d: int) -> float:
    """Integral of <z>^{-N} over R^d."""
    return float(math.exp(0.5 * d * math.log(math.pi) + gammaln((N - d) / 2) - gammaln(N / 2)))


def kernel_padding(N: float, d: int, rel: float = 1e-6) -> float:
    """Radius P with mass of <z>^{-N} outside |z| > P below ``rel`` of the total."""
    surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    # tail <= surface * P^{d-N} / (N-d)
    target = rel * kernel_mass(N, d)
    return float((surface / ((N - d) * target)) ** (1.0 / (N - d)))


@dataclass
class ModerateReport:
    N: float
    radius: float
    h: float
    samples: np.ndarray
    ratios: np.ndarray
    log_spread: float
    threshold: float

    @property
    def min_ratio(self) -> float:
        return float(self.ratios.min())

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    @property
    def spread(self) -> float:
        return math.exp(self.log_spread) if self.log_spread < 700 else math.inf

    @property
    def passed(self) -> bool:
        return self.spread <= self.threshold


def moderate_check(F: Weight, N: float | None = None, radius: float = 4, h: float = 0.25,
                   sample_step: float = 1.0, threshold: float = 1e2, chunk: int = 2_000_000) -> ModerateReport:
    """Ratio statistics of (F^2 * <.>^{-N})(xi) / F(xi)^2 over a sampling box.

    The convolution is a Riemann sum with step ``h`` over the sampling box
    padded until the kernel tail is below 1e-6 of its mass. Sums run in the
    log domain so rapidly growing F do not overflow.
    """
    d = F.point_dim
    N = default_moderate_exponent(d) if N is None else float(N)
    if N <= d:
        raise ValueError(f"kernel exponent N={N} must exceed the dimension {d}")
    if h > 0.25:
        raise ValueError("quadrature step must be at most 1/4")
    pad = kernel_padding(N, d)
    axis = np.arange(-radius, radius + sample_step / 2, sample_step)
    samples = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), -1).reshape(-1, d)
    half = math.ceil((radius + pad) / h) * h
    qaxis = np.arange(-half, half + h / 2, h)
    quad = np.stack(np.meshgrid(*([qaxis] * d), indexing="ij"), -1).reshape(-1, d)

    log_f_samples = F.log_evaluate(samples)
    if not np.all(np.isfinite(log_f_samples)):
        raise ValueError("moderate class requires F > 0 at every sample")
    log_f2 = 2.0 * F.log_evaluate(quad)
    log_conv = np.empty(len(samples))
    per = max(1, chunk // len(quad))
    for start in range(0, len(samples), per):
        xi = samples[start:start + per]
        dist2 = np.sum((xi[:, None, :] - quad[None, :, :]) ** 2, axis=-1)
        log_conv[start:start + per] = logsumexp(log_f2[None, :] - 0.5 * N * np.log1p(dist2), axis=1)
    log_ratio = log_conv + d * math.log(h) - 2.0 * log_f_samples
    ratios = np.exp(np.clip(log_ratio, -700, 700))
    return ModerateReport(N, radius, h, samples, ratios,
                          float(log_ratio.max() - log_ratio.min()), threshold)


def sandwich_constant(F: Weight, N: float, xi, zeta) -> float:
    """Smallest C with F(xi)<zeta>^{-N/2} <= C F(xi+zeta) and F(xi+zeta) <= C F(xi)<zeta>^{N/2}."""
    xi, zeta = np.asarray(xi, float), np.asarray(zeta, float)
    log_f = F.log_evaluate(xi)
    log_g = F.log_evaluate(xi + zeta)
    log_b = 0.5 * N * np.log(bracket(zeta))
    return float(np.exp(np.max(np.maximum(log_f - log_b - log_g, log_g - log_f - log_b))))


# --------------------------------------------------------------------------
# the V* smoothing construction


def _shell_tail(N: float, D: int, pad: int, terms: int = 200_000) -> float:
    """Bound on sum over mu with |mu - xi|_inf > pad of <mu - xi>^{-2N} in Z^D."""
    j = np.arange(pad + 1, pad + 1 + terms, dtype=float)
    shell = 2.0 * D * (2 * j + 1) ** (D - 1)
    body = float(np.sum(shell * (1 + j * j) ** (-N)))
    # integral bound for what the truncated series leaves out
    J = j[-1]
    rest = 2.0 * D * 3 ** (D - 1) * J ** (D - 1 - 2 * N + 1) / (2 * N - D)
    return body + rest


@dataclass(eq=False)
class VStar(Weight):
    """V*(xi) = (sum_mu V(mu)^2 <xi - mu>^{-2N})^{1/2}, mu truncated near the evaluation points."""

    base: Weight
    N: float
    pad: int = 12
    vmax: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.base.dim

    def _lattice(self, radius: int):
        if radius not in self._cache:
            pts = IndexBox(self.point_dim, radius).points()
            v2 = self.base.evaluate(pts) ** 2
            keep = v2 > 0
            self._cache[radius] = (pts[keep].astype(float), v2[keep])
        return self._cache[radius]

    def tail_bound(self) -> float:
        seq = getattr(self.base, "seq", None)
        if seq is not None and (len(seq.support()) == 0 or np.abs(seq.support()).max() <= self.pad):
            return 0.0  # the truncation box already holds the whole support
        return self.vmax ** 2 * _shell_tail(self.N, self.point_dim, self.pad)

    def evaluate(self, points, chunk: int = 4_000_000):
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, self.point_dim)
        reach = int(math.ceil(np.max(np.abs(flat)))) if flat.size else 0
        mu, v2 = self._lattice(reach + self.pad)
        out = np.empty(len(flat))
        per = max(1, chunk // max(len(mu), 1))
        for s in range(0, len(flat), per):
            diff = flat[s:s + per, None, :] - mu[None, :, :]
            out[s:s + per] = (1.0 + np.sum(diff * diff, axis=-1)) ** (-self.N) @ v2
        return np.sqrt(out).reshape(pts.shape[:-1])

    @property
    def label(self):
        return f"vstar({self.base.label};N={_fmt(self.N)})"


@dataclass
class VStarResult:
    values: np.ndarray
    lattice_values: np.ndarray
    weight: VStar
    tail_bound: float
    retained_min: float


def v_star(V: Weight, N: float, points, rel_tail: float = 1e-8, max_pad: int = 64) -> VStarResult:
    """Evaluate V* at ``points`` with the lattice sum truncated so the omitted
    tail is below ``rel_tail`` of the smallest retained sum.

    ``lattice_values`` holds V itself at the points (meaningful at lattice points).
    """
    D = V.point_dim
    if N <= D:
        raise ValueError(f"V* needs N > 2d = {D}")
    pts = np.asarray(points, dtype=float).reshape(-1, D)
    reach = int(math.ceil(np.max(np.abs(pts)))) if pts.size else 0
    vmax = float(np.max(V.evaluate(IndexBox(D, reach + 4).points())))
    if vmax <= 0:
        raise ValueError("V vanishes on the truncation box; V* would be identically 0")
    pad = 4
    while True:
        star = VStar(V, N, pad=pad, vmax=vmax)
        vals = star.evaluate(pts)
        tail = star.tail_bound()
        retained = float(np.min(vals) ** 2)
        if tail < rel_tail * retained or pad >= max_pad:
            break
        pad *= 2
    return VStarResult(vals, V.evaluate(pts), star, tail, retained)
