"""Finitely supported sequences on the integer lattice Z^n and their norms."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class IndexBox:
    """The symmetric cube {-R, ..., R}^dim.

    Points are enumerated in lexicographic order, last coordinate fastest.
    """

    dim: int
    radius: int

    def __post_init__(self):
        if self.dim < 1 or self.radius < 0:
            raise ValueError(f"invalid box dim={self.dim} radius={self.radius}")

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    def __len__(self) -> int:
        return self.side ** self.dim

    def points(self) -> np.ndarray:
        axis = np.arange(-self.radius, self.radius + 1)
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class SeqFunction:
    """A finitely supported sequence on Z^dim.

    Values are nonnegative unless ``signed`` is set (random-sign experiments).
    Points outside the support read as zero.
    """

    dim: int
    points: np.ndarray
    values: np.ndarray
    signed: bool = False
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64).reshape(-1, self.dim)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if len(pts) != len(vals):
            raise ValueError("points and values differ in length")
        if not self.signed and np.any(vals < 0):
            raise ValueError("negative value in an unsigned sequence")
        index = {}
        for i, p in enumerate(map(tuple, pts)):
            if p in index:
                raise ValueError(f"duplicate point {p}")
            index[p] = i
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_dict(cls, table: dict, dim: int | None = None, signed: bool = False):
        keys = [k if isinstance(k, tuple) else (k,) for k in table]
        if dim is None:
            dim = len(keys[0]) if keys else 1
        return cls(dim, np.array(keys, dtype=np.int64).reshape(-1, dim),
                   np.array(list(table.values()), dtype=float), signed=signed)

    @classmethod
    def delta(cls, point, value: float = 1.0):
        point = tuple(np.atleast_1d(point))
        return cls(len(point), np.array([point]), np.array([value]))

    @classmethod
    def on_box(cls, box: IndexBox, fn=None, signed: bool = False):
        """Sample ``fn(points) -> values`` on a box; constant 1 when fn is None."""
        pts = box.points()
        vals = np.ones(len(pts)) if fn is None else np.asarray(fn(pts), dtype=float)
        return cls(box.dim, pts, vals, signed=signed)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, point) -> float:
        i = self._index.get(tuple(np.atleast_1d(point).tolist()))
        return 0.0 if i is None else float(self.values[i])

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points)
        flat = pts.reshape(-1, self.dim)
        out = np.zeros(len(flat))
        if np.issubdtype(flat.dtype, np.floating):
            integral = np.all(flat == np.round(flat), axis=1)
        else:
            integral = np.ones(len(flat), dtype=bool)
        for j, p in enumerate(flat):
            if integral[j]:
                i = self._index.get(tuple(int(c) for c in p))
                if i is not None:
                    out[j] = self.values[i]
        return out.reshape(pts.shape[:-1])

    def dense(self, box: IndexBox) -> np.ndarray:
        """Values on ``box`` in its lexicographic order."""
        return self.evaluate(box.points())

    def support(self) -> np.ndarray:
        return self.points[self.values != 0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([f"nu{i + 1}" for i in range(self.dim)] + ["value"])
            for p, v in zip(self.points, self.values):
                w.writerow([*map(int, p), repr(float(v))])

    @classmethod
    def from_csv(cls, path, signed: bool = False):
        with open(Path(path), newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][-1].strip() != "value":
            raise ValueError(f"{path}: missing header row ending in 'value'")
        dim = len(rows[0]) - 1
        body = [r for r in rows[1:] if r]
        pts = np.array([[int(c) for c in r[:dim]] for r in body], dtype=np.int64)
        vals = np.array([float(r[dim]) for r in body])
        return cls(dim, pts.reshape(-1, dim), vals, signed=signed)


def seq_norm(a, p: float = 2.0, weak: bool = False) -> float:
    """The l^p norm, or the weak quasi-norm l^{p,inf} when ``weak`` is set.

    The weak quasi-norm sup_t t * #{|a_k| > t}^{1/p} is realized just below one
    of the finitely many values |a_k|: sorting them in decreasing order gives
    max_j |a|_(j) * j^{1/p}.
    """
    vals = np.abs(a.values if isinstance(a, SeqFunction) else np.asarray(a, float).ravel())
    if weak:
        if not 1 <= p < math.inf:
            raise ValueError(f"weak exponent must lie in [1, inf), got {p}")
        if vals.size == 0:
            return 0.0
        srt = np.sort(vals)[::-1]
        return float(np.max(srt * np.arange(1, srt.size + 1) ** (1.0 / p)))
    if not 1 <= p <= math.inf:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    if vals.size == 0:
        return 0.0
    if p == math.inf:
        return float(vals.max())
    top = vals.max()
    if top == 0:
        return 0.0
    # scaled compensated sum keeps the brute-force oracles honest at 1e-12
    return float(top * math.fsum((vals / top) ** p) ** (1.0 / p))


def _weight_on_pairs(V, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    return np.asarray(V.evaluate(np.concatenate([p1, p2], axis=-1)), dtype=float)


def seq_add_convolve(V, B: SeqFunction, C: SeqFunction) -> SeqFunction:
    """k -> sum over nu1 + nu2 = k of V(nu1, nu2) B(nu1) C(nu2).

    ``V`` is anything with ``evaluate(points)`` on Z^{2n} (a SeqFunction on
    Z^{2n} or a weight).
    """
    if B.dim != C.dim:
        raise ValueError("B and C live on different lattices")
    n = B.dim
    bp, cp = B.support(), C.support()
    if len(bp) == 0 or len(cp) == 0:
        return SeqFunction(n, np.zeros((0, n), np.int64), np.zeros(0), signed=B.signed or C.signed)
    P1 = np.repeat(bp, len(cp), axis=0)
    P2 = np.tile(cp, (len(bp), 1))
    terms = (_weight_on_pairs(V, P1, P2)
             * np.repeat(B.evaluate(bp), len(cp))
             * np.tile(C.evaluate(cp), len(bp)))
    keys, inverse = np.unique(P1 + P2, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(keys) + 1))
    sums = np.array([math.fsum(terms[order[bounds[i]:bounds[i + 1]]]) for i in range(len(keys))])
    return SeqFunction(n, keys, sums, signed=bool(np.any(sums < 0)))


def lattice_iter(box: IndexBox):
    """Iterate box points as tuples in the documented order."""
    return itertools.product(range(-box.radius, box.radius + 1), repeat=box.dim)
