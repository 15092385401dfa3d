"""Deterministic CSV tables and SVG log-log plots.

CSV files are UTF-8 with a header row; floats use nine significant digits in
exponent notation, so identical inputs give byte-identical files.  Plots are
written as hand-built SVG so their bytes depend only on the data.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import ConfigurationError

__all__ = ["format_value", "write_csv", "emit_plot", "fit_line"]


def format_value(v) -> str:
    """Text form of one CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.8e}"
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write ``rows`` under ``header`` to ``path`` and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        if len(row) != len(header):
            raise ConfigurationError(f"row has {len(row)} cells, header has {len(header)}")
        writer.writerow([format_value(v) for v in row])
    path.write_bytes(buf.getvalue().encode("utf-8"))
    return path


def fit_line(x, y, *, xlog: bool = True, ylog: bool = True) -> dict:
    """Least-squares line in the plotted coordinates with slope standard error."""
    tx = np.log10(np.asarray(x, float)) if xlog else np.asarray(x, float)
    ty = np.log10(np.asarray(y, float)) if ylog else np.asarray(y, float)
    if tx.size < 2:
        raise ConfigurationError("a fit needs at least two points")
    A = np.column_stack([tx, np.ones_like(tx)])
    coef, *_ = np.linalg.lstsq(A, ty, rcond=None)
    resid = ty - A @ coef
    dof = tx.size - 2
    if dof > 0 and np.ptp(tx) > 0:
        se = math.sqrt(float(resid @ resid) / dof / float(np.sum((tx - tx.mean()) ** 2)))
    else:
        se = 0.0
    return {"slope": float(coef[0]), "intercept": float(coef[1]), "uncertainty": se}


# Layout of the plot area in SVG user units.
_W, _H = 640, 440
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 20, 40, 60


def _num(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, int(math.ceil((b - a) / 8)))
        return [(float(k), f"1e{k}") for k in range(a, b + 1, step) if lo - 1e-12 <= k <= hi + 1e-12]
    span = hi - lo
    raw = span / 6 if span > 0 else 1.0
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * max(1.0, abs(hi)):
        out.append((t, f"{t:.4g}"))
        t += step
    return out


def emit_plot(series, fit: Optional[Mapping], path, *, xlog: bool = True, ylog: bool = True,
              xlabel: str = "delta", ylabel: str = "value", name: str = "slope",
              title: str = "") -> Path:
    """Write a scatter plot with its fitted line as SVG.

    Parameters
    ----------
    series : tuple of array_like
        ``(x, y)`` data, at least two points, positive on log axes.
    fit : mapping or None
        ``slope`` and ``intercept`` of the line in plotted coordinates
        (base-10 logarithms on log axes).  Optional keys: ``value`` (the
        annotated number, default the slope) and ``uncertainty`` (shown
        after a plus-minus sign).  ``None`` fits the data with
        :func:`fit_line`.
    path : path-like
    xlog, ylog : bool
        Logarithmic axes.
    name : str
        Symbol used in the annotation, e.g. ``"β"``.

    Returns
    -------
    pathlib.Path

    Raises
    ------
    ConfigurationError
        With fewer than two points, or non-positive data on a log axis.
    """
    x = np.asarray(series[0], dtype=float).ravel()
    y = np.asarray(series[1], dtype=float).ravel()
    if x.size != y.size:
        raise ConfigurationError("x and y have different lengths")
    if x.size < 2:
        raise ConfigurationError("a plot needs at least two points")
    if (xlog and np.any(x <= 0)) or (ylog and np.any(y <= 0)):
        raise ConfigurationError("log axes need positive data")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ConfigurationError("plot data must be finite")
    if fit is None:
        fit = fit_line(x, y, xlog=xlog, ylog=ylog)
    tx = np.log10(x) if xlog else x
    ty = np.log10(y) if ylog else y
    slope, icpt = float(fit["slope"]), float(fit["intercept"])
    x0, x1 = float(tx.min()), float(tx.max())
    line_y = (slope * x0 + icpt, slope * x1 + icpt)
    y0 = min(float(ty.min()), *line_y)
    y1 = max(float(ty.max()), *line_y)
    padx = 0.05 * (x1 - x0 or 1.0)
    pady = 0.05 * (y1 - y0 or 1.0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(v):
        return _LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return _TOP + (y1 - v) / (y1 - y0) * ph

    value = float(fit.get("value", slope))
    unc = fit.get("uncertainty")
    note = f"{name}={value:.2f}" + (f"±{float(unc):.2f}" if unc is not None else "")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v, lab in _ticks(x0, x1, xlog):
        out.append(f'<line x1="{_num(px(v))}" y1="{_TOP + ph}" x2="{_num(px(v))}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_num(px(v))}" y="{_TOP + ph + 18}" text-anchor="middle">{lab}</text>')
    for v, lab in _ticks(y0, y1, ylog):
        out.append(f'<line x1="{_LEFT - 5}" y1="{_num(py(v))}" x2="{_LEFT}" y2="{_num(py(v))}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{_num(py(v) + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 15}" text-anchor="middle">{_escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{_TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {_TOP + ph / 2:.2f})">{_escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{_W / 2:.2f}" y="22" text-anchor="middle">{_escape(title)}</text>')
    for a, b in zip(tx, ty):
        out.append(f'<circle cx="{_num(px(a))}" cy="{_num(py(b))}" r="3" fill="steelblue"/>')
    lx0, lx1 = float(tx.min()), float(tx.max())
    out.append(f'<line x1="{_num(px(lx0))}" y1="{_num(py(line_y[0]))}" x2="{_num(px(lx1))}" '
               f'y2="{_num(py(line_y[1]))}" stroke="firebrick" stroke-width="1.5"/>')
    out.append(f'<text x="{_LEFT + 10}" y="{_TOP + 18}" fill="firebrick">{_escape(note)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(("\n".join(out) + "\n").encode("utf-8"))
    return path


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
