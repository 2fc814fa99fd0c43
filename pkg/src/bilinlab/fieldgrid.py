"""Uniform periodic grids on [-L, L)^n, the continuous Fourier transform
f^(xi) = int e^{-i x.xi} f(x) dx sampled on them, and L^p / amalgam / L^2_ul norms.

Unit cubes are nu + Q with Q = [-1/2, 1/2)^n. A sample x belongs to the cube
floor(x + 1/2); indices are taken modulo 2L, so the two half cubes at -L and
L - 1/2 form one periodic cube.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

MAGIC = b"BILINGRID 1\n"


@dataclass(frozen=True)
class Grid:
    """Grid with N points per axis on [-L, L)^n, step h = 2L/N."""

    n: int = 1
    L: int = 16
    N: int = 512

    def __post_init__(self):
        if self.n < 1 or self.L < 1 or self.N < 2:
            raise ValueError("grid needs n >= 1, L >= 1, N >= 2")
        if self.N & (self.N - 1):
            raise ValueError(f"N={self.N} is not a power of two")
        if self.N % (2 * self.L):
            raise ValueError(f"step 2L/N = {2 * self.L}/{self.N} does not divide 1")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def per_unit(self) -> int:
        return self.N // (2 * self.L)

    @property
    def dxi(self) -> float:
        return math.pi / self.L

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    def freq_axis(self) -> np.ndarray:
        """Ascending frequencies (m - N/2) pi / L, covering [-pi/h, pi/h)."""
        return self.dxi * (np.arange(self.N) - self.N // 2)

    def mesh(self) -> list:
        return np.meshgrid(*([self.axis()] * self.n), indexing="ij")

    def freq_mesh(self) -> list:
        return np.meshgrid(*([self.freq_axis()] * self.n), indexing="ij")

    def points(self) -> np.ndarray:
        return np.stack(self.mesh(), axis=-1)

    def cube_index(self) -> np.ndarray:
        """Cube offset 0..2L-1 (nu = offset - L) of each sample along an axis."""
        return (np.floor(self.axis() + 0.5).astype(np.int64) + self.L) % (2 * self.L)

    def cube_matrix(self) -> np.ndarray:
        """0/1 matrix (2L, N) assigning samples to cubes along one axis."""
        M = np.zeros((2 * self.L, self.N))
        M[self.cube_index(), np.arange(self.N)] = 1.0
        return M


@dataclass
class GridFunction:
    """Samples on a grid; ``domain`` is "space" or "frequency"."""

    grid: Grid
    values: np.ndarray
    domain: str = "space"
    warnings: list = field(default_factory=list)
    # exact source spectrum of functions built by grid_ift, so sparse spectra stay sparse
    spectrum: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.domain not in ("space", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @classmethod
    def from_function(cls, grid: Grid, fn):
        """Sample ``fn(*coords)`` on the space grid."""
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.shape))

    @classmethod
    def from_spectrum(cls, grid: Grid, fn):
        """Frequency samples of ``fn(*xi)``."""
        return cls(grid, np.broadcast_to(fn(*grid.freq_mesh()), grid.shape), "frequency")

    @property
    def step(self) -> float:
        return self.grid.h if self.domain == "space" else self.grid.dxi

    def __add__(self, other):
        _same(self, other)
        return GridFunction(self.grid, self.values + other.values, self.domain)

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            _same(self, c)
            return GridFunction(self.grid, self.values * c.values, self.domain)
        spec = None if self.spectrum is None else self.spectrum * c
        return GridFunction(self.grid, self.values * c, self.domain, spectrum=spec)

    __rmul__ = __mul__

    def save(self, path) -> None:
        header = {"n": self.grid.n, "L": self.grid.L, "N": self.grid.N, "dtype": "complex128",
                  "axis_order": "C", "domain": self.domain}
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        buf.write(np.ascontiguousarray(self.values, dtype="<c16").tobytes())
        _atomic_bytes(path, buf.getvalue())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            if fh.readline() != MAGIC:
                raise ValueError(f"{path}: not a grid container")
            header = json.loads(fh.readline())
            raw = fh.read()
        grid = Grid(header["n"], header["L"], header["N"])
        vals = np.frombuffer(raw, dtype="<c16").reshape(grid.shape)
        return cls(grid, vals.copy(), header.get("domain", "space"))

    def to_csv(self, path) -> None:
        if self.grid.n != 1:
            raise ValueError("CSV export is for one-dimensional grids")
        axis = self.grid.axis() if self.domain == "space" else self.grid.freq_axis()
        lines = ["x,real,imag" if self.domain == "space" else "xi,real,imag"]
        lines += [f"{a!r},{v.real!r},{v.imag!r}" for a, v in zip(axis.tolist(), self.values.tolist())]
        _atomic_bytes(path, ("\n".join(lines) + "\n").encode())


def _atomic_bytes(path, data: bytes) -> None:
    from bilinlab.reports import atomic_write

    atomic_write(path, data)


def _same(f: GridFunction, g: GridFunction):
    if f.grid != g.grid or f.domain != g.domain:
        raise ValueError("grid functions live on different grids")


def _signs(grid: Grid):
    alt = (-1.0) ** np.arange(grid.N)
    full = alt
    for _ in range(grid.n - 1):
        full = np.multiply.outer(full, alt)
    return full


def grid_ft(f: GridFunction) -> GridFunction:
    """h^n-scaled DFT, exact samples of the transform of the periodic step-sampled f."""
    if f.domain != "space":
        raise ValueError("grid_ft expects space samples")
    g = f.grid
    if f.spectrum is not None:
        return GridFunction(g, f.spectrum.copy(), "frequency")
    # e^{-i x_j xi_m} = (-1)^{m'} e^{-2 pi i j m' / N} with m' = m - N/2
    spec = sfft.fftshift(sfft.fftn(f.values))
    return GridFunction(g, g.h ** g.n * _mshift(g) * spec, "frequency")


def _mshift(g: Grid):
    return _signs(g) * (-1.0) ** ((g.N // 2) * g.n)


def grid_ift(F: GridFunction) -> GridFunction:
    """Inverse of ``grid_ft``: (2 pi)^{-n} times the Riemann sum over frequencies."""
    if F.domain != "frequency":
        raise ValueError("grid_ift expects frequency samples")
    g = F.grid
    vals = sfft.ifftn(sfft.ifftshift(F.values * _mshift(g))) / g.h ** g.n
    return GridFunction(g, vals, "space", spectrum=F.values.copy())


def lr_norm(f: GridFunction, r: float) -> float:
    """(sum |f|^r h^n)^{1/r}; max |f| for r = inf."""
    if not r > 0:
        raise ValueError("r must be positive")
    a = np.abs(f.values)
    if math.isinf(r):
        return float(a.max())
    return float((np.sum(a ** r) * f.step ** f.grid.n) ** (1.0 / r))


def _lq(a: np.ndarray, q: float, axis: int) -> np.ndarray:
    if math.isinf(q):
        return a.max(axis=axis)
    return np.sum(a ** q, axis=axis) ** (1.0 / q)


def cube_norms(values: np.ndarray, grids: list, p: float) -> np.ndarray:
    """Per-cube L^p norms of a multi-axis sample array; ``grids[i]`` is the 1-D grid of axis i."""
    a = np.abs(np.asarray(values))
    if math.isinf(p):
        out = a
        for ax, g in enumerate(grids):
            idx = g.cube_index()
            moved = np.moveaxis(out, ax, 0)
            red = np.zeros((2 * g.L,) + moved.shape[1:])
            np.maximum.at(red, idx, moved)
            out = np.moveaxis(red, 0, ax)
        return out
    out = a ** p
    for ax, g in enumerate(grids):
        out = np.moveaxis(np.tensordot(g.cube_matrix(), out, axes=([1], [ax])), 0, ax)
    vol = math.prod(g.h for g in grids)
    return (out * vol) ** (1.0 / p)


def _axis_grids(grid: Grid) -> list:
    return [Grid(1, grid.L, grid.N)] * grid.n


def amalgam_norm(f: GridFunction, p: float, q) -> float:
    """(L^p, l^{q_1} ... l^{q_n}) norm: L^p on each cube, then l^{q_1} over nu_1
    (innermost) up to l^{q_n} over nu_n. A scalar q applies to every axis."""
    qs = [q] * f.grid.n if np.isscalar(q) else list(q)
    if len(qs) != f.grid.n:
        raise ValueError("need one q per axis")
    if not (1 <= p <= math.inf and all(1 <= x <= math.inf for x in qs)):
        raise ValueError("exponents must lie in [1, inf]")
    a = cube_norms(f.values, _axis_grids(f.grid), p)
    for qj in qs:
        a = _lq(a, qj, 0)
    return float(a)


def l2ul_norm(f: GridFunction) -> float:
    """sup over unit cubes of the local L^2 norm."""
    return float(cube_norms(f.values, _axis_grids(f.grid), 2.0).max())


def l2ul_multi(values: np.ndarray, grids: list) -> float:
    """L^2_ul over a product of 1-D grids (used for symbols on (x, xi_1, xi_2))."""
    return float(cube_norms(values, grids, 2.0).max())


def mixed_lp_norm(values: np.ndarray, steps, exponents) -> float:
    """Iterated L^{p_1}_{axis 0} ... L^{p_k}_{axis k-1} norm, axis 0 innermost."""
    a = np.abs(np.asarray(values))
    for h, p in zip(steps, exponents):
        a = a.max(axis=0) if math.isinf(p) else (np.sum(a ** p, axis=0) * h) ** (1.0 / p)
    return float(a)


def edge_ratio(f: GridFunction) -> float:
    """max |f| on the periodic boundary cube divided by the L^2 norm."""
    g = f.grid
    idx = g.cube_index() == 0
    mask = idx
    for _ in range(g.n - 1):
        mask = np.logical_or.outer(mask, idx)
    nrm = lr_norm(f, 2)
    return float(np.abs(f.values[mask]).max() / nrm) if nrm > 0 else 0.0


def check_wraparound(f: GridFunction, tol: float = 1e-6, warn: bool = False) -> bool:
    """True (and a note on ``f.warnings``) when f is not negligible on the boundary cube."""
    bad = edge_ratio(f) > tol
    if bad:
        msg = f"wraparound: boundary-cube amplitude exceeds {tol:g} of the L2 norm"
        f.warnings.append(msg)
        if warn:
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return bad
