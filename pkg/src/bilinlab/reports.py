"""Report serialization: atomic file writes, versioned JSON, CSV and SVG plots."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA = 1


def atomic_write(path, data: bytes | str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, payload: dict, config: dict | None = None) -> dict:
    doc = {"schema": SCHEMA, **to_jsonable(payload)}
    if config is not None:
        doc["config"] = to_jsonable(config)
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def write_csv(path, header: list, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write(path, buf.getvalue())


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def loglog_svg(xs, ys, *, slope: float | None = None, intercept: float | None = None,
               title: str = "", xlabel: str = "log2 x", ylabel: str = "log2 y",
               log_x: bool = True) -> str:
    """Deterministic SVG of log2 y against log2 x (or x itself when ``log_x`` is off),
    with an optional fitted line y = slope * t + intercept in those coordinates."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if len(xs) < 2 or len(xs) != len(ys):
        raise ValueError("a plot needs at least two points")
    if np.any(ys <= 0) or (log_x and np.any(xs <= 0)):
        raise ValueError("log plot needs positive data")
    tx = np.log2(xs) if log_x else xs
    ty = np.log2(ys)
    W, H, m = 480, 320, 48
    x0, x1 = tx.min(), tx.max()
    lo, hi = ty.min(), ty.max()
    if slope is not None:
        fit = slope * np.array([x0, x1]) + intercept
        lo, hi = min(lo, fit.min()), max(hi, fit.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def px(t):
        return m + (t - x0) / (x1 - x0) * (W - 2 * m)

    def py(t):
        return H - m - (t - lo) / (hi - lo) * (H - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
           f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">{_esc(xlabel)}</text>',
           f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {H / 2})">{_esc(ylabel)}</text>',
           f'<text x="{W / 2}" y="24" text-anchor="middle" font-size="14">{_esc(title)}</text>']
    pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(tx, ty))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4"/>')
    for a, b in zip(tx, ty):
        out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="4" fill="#1f77b4"/>')
    if slope is not None:
        out.append(f'<line x1="{_fmt(px(x0))}" y1="{_fmt(py(slope * x0 + intercept))}" '
                   f'x2="{_fmt(px(x1))}" y2="{_fmt(py(slope * x1 + intercept))}" '
                   f'stroke="#d62728" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{W - m}" y="{m}" text-anchor="end" font-size="12">slope {slope:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(report, path) -> None:
    """Write the log-log plot of a report exposing ``plot_data()`` -> (xs, ys, fit, labels)."""
    xs, ys, fit, labels = report.plot_data()
    if len(xs) < 2:
        raise ValueError("report has fewer than two points; nothing to plot")
    svg = loglog_svg(xs, ys, slope=None if fit is None else fit[0],
                     intercept=None if fit is None else fit[1], **labels)
    atomic_write(path, svg)
