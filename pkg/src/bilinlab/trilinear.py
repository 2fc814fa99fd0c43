"""The lattice trilinear form sum V(nu1, nu2) A(nu1 + nu2) B(nu1) C(nu2).

``form_norm_alt`` estimates its norm over unit l^2 spheres by alternating
exact partial maximization; ``form_norm_oracle`` is an independent grid search
for tiny supports; ``certify_weight`` fits the growth of the per-radius norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from bilinlab.fitting import loglog_fit
from bilinlab.lattice import IndexBox, SeqFunction, seq_add_convolve


def trilinear_form(V, A: SeqFunction, B: SeqFunction, C: SeqFunction) -> float:
    """Exact value of the form, summed over support(B) x support(C)."""
    for name, s in (("A", A), ("B", B), ("C", C)):
        if np.any(s.values < 0):
            raise ValueError(f"{name} has negative entries")
    d = seq_add_convolve(V, B, C)
    return math.fsum(A.evaluate(d.points) * d.values)


# --------------------------------------------------------------------------
# dense layout shared by the estimators


@dataclass
class _Layout:
    b_points: np.ndarray
    c_points: np.ndarray
    a_points: np.ndarray
    V: np.ndarray  # (mB, mC)
    S: np.ndarray  # (mB, mC) index into a_points


def _as_points(pts, n):
    return np.asarray(pts, dtype=np.int64).reshape(-1, n)


def _layout(V, b_points, c_points) -> _Layout:
    n = V.dim
    bp, cp = _as_points(b_points, n), _as_points(c_points, n)
    P1 = np.repeat(bp, len(cp), axis=0)
    P2 = np.tile(cp, (len(bp), 1))
    vals = np.asarray(V.evaluate(np.concatenate([P1, P2], axis=1)), dtype=float)
    if np.any(vals < 0):
        raise ValueError("weight takes negative values on the box")
    ap, inv = np.unique(P1 + P2, axis=0, return_inverse=True)
    shape = (len(bp), len(cp))
    return _Layout(bp, cp, ap, vals.reshape(shape), inv.ravel().reshape(shape))


def _box_points(V, box: IndexBox | None, radius: int | None):
    if box is None:
        box = IndexBox(V.dim, 0 if radius is None else radius)
    if box.dim != V.dim:
        raise ValueError(f"box must live on Z^{V.dim}")
    return box.points()


# --------------------------------------------------------------------------
# alternating maximization


@dataclass
class AltResult:
    estimate: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    a_points: np.ndarray
    b_points: np.ndarray
    c_points: np.ndarray
    iterations: list
    residuals: list
    restart_values: list
    reseeds: int
    converged: bool
    degenerate: bool = False

    @property
    def residual(self) -> float:
        return float(max(self.residuals)) if self.residuals else 0.0


def _unit(x):
    nrm = np.linalg.norm(x)
    return x / nrm, nrm


def _run(L: _Layout, B, C, max_iters, tol, rng, trace=None):
    """One alternating run; returns (obj, A, B, C, iterations, residual, reseeds)."""
    nA = len(L.a_points)
    reseeds = 0
    prev = -1.0
    obj = 0.0
    A = np.zeros(nA)
    residual = math.inf
    for it in range(1, max_iters + 1):
        A = np.bincount(L.S.ravel(), (L.V * B[:, None] * C[None, :]).ravel(), minlength=nA)
        if not A.any():
            reseeds += 1
            B, _ = _unit(rng.random(len(B)) + 1e-3)
            C, _ = _unit(rng.random(len(C)) + 1e-3)
            continue
        A, _ = _unit(A)
        M = L.V * A[L.S]
        Bn = M @ C
        if not Bn.any():
            reseeds += 1
            B, _ = _unit(rng.random(len(B)) + 1e-3)
            continue
        B, _ = _unit(Bn)
        g = B @ M
        C, obj = _unit(g)
        if trace is not None:
            trace.append(obj)
        residual = abs(obj - prev) / obj
        if residual <= tol:
            return obj, A, B, C, it, residual, reseeds
        prev = obj
    return obj, A, B, C, max_iters, residual, reseeds


def form_norm_alt(V, box: IndexBox | None = None, *, radius: int | None = None,
                  b_points=None, c_points=None, restarts: int = 8, max_iters: int = 500,
                  tol: float = 1e-9, seed: int = 0, init=None, peak_start: bool = True,
                  trace: list | None = None) -> AltResult:
    """Lower bound for the form norm with B and C supported in ``box``.

    Restart 0 starts from uniform vectors, later restarts from seeded random
    nonnegative vectors. With ``peak_start`` one more run starts from point
    masses at the largest entry of V, so the estimate is never below max V.
    ``init`` = (B, C) adds one further warm start.
    ``trace`` collects the objective after every sweep of restart 0.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    bp = _box_points(V, box, radius) if b_points is None else b_points
    cp = _box_points(V, box, radius) if c_points is None else c_points
    L = _layout(V, bp, cp)
    mB, mC = L.V.shape
    empty = dict(a_points=L.a_points, b_points=L.b_points, c_points=L.c_points)
    if not L.V.any():
        z = np.zeros
        return AltResult(0.0, z(len(L.a_points)), z(mB), z(mC), iterations=[], residuals=[],
                         restart_values=[], reseeds=0, converged=True, degenerate=True, **empty)
    rng = np.random.default_rng(seed)
    starts = [(np.ones(mB), np.ones(mC))]
    starts += [(rng.random(mB), rng.random(mC)) for _ in range(restarts - 1)]
    if peak_start:
        i, j = np.unravel_index(np.argmax(L.V), L.V.shape)
        starts.append((np.eye(mB)[i], np.eye(mC)[j]))
    if init is not None:
        starts.append((np.asarray(init[0], float) + 0.0, np.asarray(init[1], float) + 0.0))
    best = None
    iters, resid, values, reseeds = [], [], [], 0
    for r, (B0, C0) in enumerate(starts):
        if not B0.any() or not C0.any():
            B0, C0 = np.ones(mB), np.ones(mC)
        run = _run(L, _unit(B0)[0], _unit(C0)[0], max_iters, tol, rng, trace if r == 0 else None)
        iters.append(run[4])
        resid.append(run[5])
        values.append(run[0])
        reseeds += run[6]
        if best is None or run[0] > best[0]:
            best = run
    obj, A, B, C = best[:4]
    return AltResult(float(obj), A, B, C, iterations=iters, residuals=resid, restart_values=values,
                     reseeds=reseeds, converged=all(r <= tol for r in resid), **empty)


# --------------------------------------------------------------------------
# brute-force oracle

ORACLE_MAX_BC = 5
ORACLE_MAX_A = 9


def oracle_supports(V, box: IndexBox | None = None):
    """B and C supports: the box if given, else the projections of a table weight's support."""
    if box is not None:
        pts = box.points()
        return pts, pts
    seq = getattr(V, "seq", None)
    if seq is None:
        raise ValueError("the oracle needs a box or a finitely supported table weight")
    sup = seq.support()
    n = V.dim
    return np.unique(sup[:, :n], axis=0), np.unique(sup[:, n:], axis=0)


def _sphere(angles):
    """Nonnegative unit vectors from spherical angles, shape (..., k) -> (..., k+1)."""
    k = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (k + 1,))
    s = np.ones(angles.shape[:-1])
    for i in range(k):
        out[..., i] = s * np.cos(angles[..., i])
        s = s * np.sin(angles[..., i])
    out[..., k] = s
    return out


def _top_singular(Ms):
    """Largest singular value of each matrix in a stack."""
    if Ms.shape[-1] > Ms.shape[-2]:
        Ms = np.swapaxes(Ms, -1, -2)
    G = np.swapaxes(Ms, -1, -2) @ Ms
    return np.sqrt(np.maximum(np.linalg.eigvalsh(G)[..., -1], 0.0))


def form_norm_oracle(V, box: IndexBox | None = None, *, coarse_step: float = 0.04,
                     fine_step: float = 0.002, keep: int = 8, chunk: int = 20000) -> float:
    """Grid search for the form norm on tiny supports.

    For fixed B the sup over unit A and C is the top singular value of the
    nonnegative matrix M_B[k, c] = V(k - c, c) B(k - c), so only B's sphere is
    searched: a coarse angular grid, then nested refinements around the best
    candidates down to ``fine_step`` radians.
    """
    bp, cp = oracle_supports(V, box)
    if len(bp) > ORACLE_MAX_BC or len(cp) > ORACLE_MAX_BC:
        raise ValueError(f"oracle refuses B/C supports larger than {ORACLE_MAX_BC}")
    L = _layout(V, bp, cp)
    if len(L.a_points) > ORACLE_MAX_A:
        raise ValueError(f"oracle refuses A supports larger than {ORACLE_MAX_A}")
    mB, mC = L.V.shape
    nA = len(L.a_points)
    # T[i, k, c] = V(b_i, c) when b_i + c = a_k
    T = np.zeros((mB, nA, mC))
    T[np.arange(mB)[:, None], L.S, np.arange(mC)[None, :]] = L.V

    def score(Bs):
        out = np.empty(len(Bs))
        for s in range(0, len(Bs), chunk):
            Ms = np.einsum("pi,ikc->pkc", Bs[s:s + chunk], T)
            out[s:s + chunk] = _top_singular(Ms)
        return out

    k = mB - 1
    if k == 0:
        return float(score(np.ones((1, 1)))[0])
    half_pi = math.pi / 2
    axis = np.linspace(0.0, half_pi, int(round(half_pi / coarse_step)) + 1)
    grid = np.array(list(itertools.product(axis, repeat=k)))
    vals = score(_sphere(grid))
    step = axis[1] - axis[0]
    while step > fine_step * (1 + 1e-9):
        new_step = max(step / 5, fine_step)
        top = grid[np.argsort(vals)[-keep:]]
        offs = np.arange(-math.ceil(step / new_step), math.ceil(step / new_step) + 1) * new_step
        local = np.array(list(itertools.product(offs, repeat=k)))
        cand = np.clip((top[:, None, :] + local[None, :, :]).reshape(-1, k), 0.0, half_pi)
        cvals = score(_sphere(cand))
        grid = np.concatenate([top, cand])
        vals = np.concatenate([np.sort(vals)[-keep:], cvals])
        step = new_step
    return float(vals.max())


# --------------------------------------------------------------------------
# certification by growth fitting


@dataclass
class TrilinearCertificate:
    weight: str
    radii: list
    norms: list
    restarts: list
    residuals: list
    iterations: list
    slope: float
    fit_residual: float
    verdict: str
    bounded_slope: float
    growing_slope: float
    converged: bool
    seeds: list
    tolerance: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def plot_data(self):
        fit = loglog_fit(self.radii, self.norms)
        return (self.radii, self.norms, (fit.slope, fit.intercept),
                dict(title=f"form norm {self.weight}", xlabel="log2 R", ylabel="log2 norm"))


def _pad_to(prev: AltResult, points: np.ndarray, which: str) -> np.ndarray:
    old_pts = prev.b_points if which == "B" else prev.c_points
    old = prev.B if which == "B" else prev.C
    lookup = {tuple(p): v for p, v in zip(old_pts.tolist(), old)}
    return np.array([lookup.get(tuple(p), 0.0) for p in points.tolist()])


def classify(radii, norms, bounded_slope=0.1, growing_slope=0.15):
    """(slope, residual, verdict) from per-radius norms."""
    fit = loglog_fit(radii, norms)
    inc = np.diff(np.asarray(norms, float))
    shrinking = len(inc) < 2 or inc[-1] <= inc[0] or np.all(inc <= 1e-9 * max(norms))
    if fit.slope < bounded_slope and shrinking:
        verdict = "bounded"
    elif fit.slope > growing_slope:
        verdict = "growing"
    else:
        verdict = "inconclusive"
    return fit.slope, fit.residual, verdict


def certify_weight(V, radii=(4, 8, 16, 32), *, restarts: int = 8, max_iters: int = 500,
                   tol: float = 1e-9, seed: int = 0, bounded_slope: float = 0.1,
                   growing_slope: float = 0.15, label: str | None = None) -> TrilinearCertificate:
    """Per-radius norm estimates, their log2-log2 slope and a verdict.

    Each radius is warm-started from the previous optimum, zero-padded, so the
    estimates are nondecreasing in R.
    """
    radii = sorted(int(r) for r in radii)
    if len(radii) < 3:
        raise ValueError("certification needs at least 3 radii")
    norms, iters, resids, seeds = [], [], [], []
    prev = None
    for i, R in enumerate(radii):
        pts = IndexBox(V.dim, R).points()
        init = None if prev is None else (_pad_to(prev, pts, "B"), _pad_to(prev, pts, "C"))
        s = seed + 7919 * i
        res = form_norm_alt(V, b_points=pts, c_points=pts, restarts=restarts,
                            max_iters=max_iters, tol=tol, seed=s, init=init)
        norms.append(res.estimate)
        iters.append(max(res.iterations, default=0))
        resids.append(res.residual)
        seeds.append(s)
        prev = res
    slope, fres, verdict = classify(radii, norms, bounded_slope, growing_slope)
    converged = all(r <= tol for r in resids)
    notes = [] if converged else ["some runs hit max_iters before reaching the tolerance"]
    return TrilinearCertificate(label or getattr(V, "label", repr(V)), radii, norms,
                                [restarts] * len(radii), resids, iters, slope, fres, verdict,
                                bounded_slope, growing_slope, converged, seeds, tol, notes)
