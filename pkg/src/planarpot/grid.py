"""Tensor-product grids, grid fields and contours.

Grids are cell-centred tensor products of two sorted coordinate arrays.
Spacing may be graded geometrically toward focus points, which lets a
single solve resolve distances to the boundary over many decades.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ._validation import as_point, check_positive
from .exceptions import ConfigurationError

__all__ = ["GridSpec", "TensorGrid", "GridField", "Contour"]


def _graded_axis(lo: float, hi: float, h: float, foci: Sequence[float], h_focus: float,
                 ratio: float, centered: bool) -> np.ndarray:
    """Nodes on ``(lo, hi)`` with spacing growing geometrically away from the foci."""
    foci = [min(max(f, lo), hi) for f in foci]

    def spacing(x):
        s = h
        for f in foci:
            s = min(s, h_focus + (ratio - 1.0) * abs(x - f))
        return s

    f0 = foci[0]
    right, left = [], []
    if centered:
        right.append(f0)
    x = f0 + (0.0 if centered else 0.5 * h_focus)
    if not centered:
        right.append(x)
    while True:
        x = x + spacing(x)
        if x >= hi:
            break
        right.append(x)
    x = f0 if centered else f0 - 0.5 * h_focus
    if not centered:
        left.append(x)
    while True:
        x = x - spacing(x)
        if x <= lo:
            break
        left.append(x)
    nodes = np.array(left[::-1] + right)
    return nodes[(nodes > lo) & (nodes < hi)]


@dataclass(frozen=True)
class GridSpec:
    """Description of a (possibly graded) solver grid.

    Parameters
    ----------
    h : float
        Bulk spacing.
    focus : tuple of complex
        Points toward which the spacing is refined.
    h_focus : float, optional
        Spacing at the focus points (defaults to ``h``, i.e. uniform).
    ratio : float
        Geometric growth factor of the spacing away from the foci.
    centered : bool
        Place nodes exactly at the first focus (used by geodesic meshes);
        solver grids keep foci at cell midpoints so no node sits on a
        boundary point.
    """

    h: float
    focus: Tuple[complex, ...] = ()
    h_focus: Optional[float] = None
    ratio: float = 1.15
    centered: bool = False

    def __post_init__(self):
        check_positive(self.h, "grid spacing")
        object.__setattr__(self, "focus", tuple(as_point(f) for f in self.focus))
        if self.h_focus is not None:
            check_positive(self.h_focus, "focus spacing")
            if self.h_focus > self.h:
                raise ConfigurationError("focus spacing must not exceed the bulk spacing")
        if not 1.0 < self.ratio <= 2.0:
            raise ConfigurationError("grading ratio must lie in (1, 2]")

    @classmethod
    def uniform(cls, h: float) -> "GridSpec":
        return cls(h)

    @classmethod
    def graded(cls, h: float, focus, h_focus: float, ratio: float = 1.15) -> "GridSpec":
        if np.ndim(focus) == 0:
            focus = (focus,)
        return cls(h, tuple(focus), h_focus, ratio)

    def build(self, bbox) -> "TensorGrid":
        x0, x1, y0, y1 = bbox
        if not self.focus or self.h_focus is None or self.h_focus == self.h:
            if self.centered and self.focus:
                f = self.focus[0]
                xs = _graded_axis(x0, x1, self.h, [f.real], self.h, 1.5, True)
                ys = _graded_axis(y0, y1, self.h, [f.imag], self.h, 1.5, True)
            else:
                nx = max(int(math.ceil((x1 - x0) / self.h - 1e-9)), 2)
                ny = max(int(math.ceil((y1 - y0) / self.h - 1e-9)), 2)
                xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
                ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
        else:
            xs = _graded_axis(x0, x1, self.h, [f.real for f in self.focus], self.h_focus, self.ratio, self.centered)
            ys = _graded_axis(y0, y1, self.h, [f.imag for f in self.focus], self.h_focus, self.ratio, self.centered)
        return TensorGrid(xs, ys)


class TensorGrid:
    """Nodes ``xs[i] + 1j * ys[j]`` of a tensor-product grid."""

    def __init__(self, xs, ys):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if self.xs.size < 2 or self.ys.size < 2:
            raise ConfigurationError("grid needs at least two nodes per axis")
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) <= 0):
            raise ConfigurationError("grid coordinates must be strictly increasing")
        self.wx = self._dual(self.xs)
        self.wy = self._dual(self.ys)

    @staticmethod
    def _dual(x):
        d = np.diff(x)
        w = np.empty_like(x)
        w[1:-1] = 0.5 * (d[1:] + d[:-1])
        w[0] = d[0]
        w[-1] = d[-1]
        return w

    @property
    def shape(self):
        return self.xs.size, self.ys.size

    @property
    def size(self) -> int:
        return self.xs.size * self.ys.size

    def nodes(self) -> np.ndarray:
        return self.xs[:, None] + 1j * self.ys[None, :]

    def cell_areas(self) -> np.ndarray:
        return self.wx[:, None] * self.wy[None, :]

    @property
    def h_min(self) -> float:
        return float(min(np.diff(self.xs).min(), np.diff(self.ys).min()))

    @property
    def h_max(self) -> float:
        return float(max(np.diff(self.xs).max(), np.diff(self.ys).max()))

    def locate(self, z):
        """Cell indices and bilinear weights for points ``z``.

        Returns ``(i, j, fx, fy, inside)`` where ``inside`` flags points
        within the node hull.
        """
        z = np.asarray(z)
        x, y = z.real, z.imag
        i = np.clip(np.searchsorted(self.xs, x) - 1, 0, self.xs.size - 2)
        j = np.clip(np.searchsorted(self.ys, y) - 1, 0, self.ys.size - 2)
        fx = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i])
        fy = (y - self.ys[j]) / (self.ys[j + 1] - self.ys[j])
        inside = (fx >= 0) & (fx <= 1) & (fy >= 0) & (fy <= 1)
        return i, j, fx, fy, inside

    def local_spacing(self, z) -> np.ndarray:
        i, j, _, _, _ = self.locate(np.asarray(z))
        return np.maximum(self.xs[i + 1] - self.xs[i], self.ys[j + 1] - self.ys[j])

    def interpolate(self, values: np.ndarray, z) -> np.ndarray:
        i, j, fx, fy, _ = self.locate(np.asarray(z))
        v00 = values[i, j]
        v10 = values[i + 1, j]
        v01 = values[i, j + 1]
        v11 = values[i + 1, j + 1]
        return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11

    def node_gradient(self, values: np.ndarray) -> np.ndarray:
        """Second-order central-difference gradient ``u_x + 1j u_y`` on nodes."""
        gx = np.gradient(values, self.xs, axis=0)
        gy = np.gradient(values, self.ys, axis=1)
        return gx + 1j * gy


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar field on a tensor grid.

    The field is ``singular(z) + regular`` where ``regular`` is stored on
    the nodes (bilinear in between) and ``singular`` is an optional analytic
    part such as ``log|z - w|``.  Exterior nodes hold extension values of the
    boundary data so interpolation near the boundary stays meaningful; the
    public ``values`` array replaces them by NaN.

    Attributes
    ----------
    grid : TensorGrid
    regular : ndarray, shape (nx, ny)
    interior : ndarray of bool
        Nodes where the discrete equation was solved.
    singular, singular_grad : callable or None
    residual : float
        Scaled residual of the linear solve.
    """

    grid: TensorGrid
    regular: np.ndarray
    interior: np.ndarray
    singular: Optional[Callable] = None
    singular_grad: Optional[Callable] = None
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.regular.setflags(write=False)
        self.interior.setflags(write=False)

    @property
    def h(self) -> float:
        return self.grid.h_max

    @property
    def values(self) -> np.ndarray:
        """Node values with NaN on exterior nodes."""
        v = self.node_values()
        return np.where(self.interior, v, np.nan)

    def node_values(self) -> np.ndarray:
        if self.singular is None:
            return np.array(self.regular)
        with np.errstate(divide="ignore"):
            s = self.singular(self.grid.nodes())
        return self.regular + s

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        out = self.grid.interpolate(self.regular, zz)
        if self.singular is not None:
            out = out + self.singular(zz)
        return float(out[0]) if scalar else out

    def gradient(self, z):
        """Gradient ``u_x + 1j u_y`` at points (analytic singular part plus interpolated regular part)."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        g = self.info.get("_grad_cache")
        if g is None:
            g = self.grid.node_gradient(self.regular)
            self.info["_grad_cache"] = g
        out = self.grid.interpolate(g, zz)
        if self.singular_grad is not None:
            out = out + self.singular_grad(zz)
        return out

    def interior_mask_near(self, z, layers: int = 1) -> np.ndarray:
        """True where the bilinear cell of ``z`` and ``layers`` rings of neighbours are interior."""
        i, j, _, _, inside = self.grid.locate(np.atleast_1d(np.asarray(z)))
        ok = inside.copy()
        nx, ny = self.interior.shape
        for di in range(-layers, layers + 2):
            for dj in range(-layers, layers + 2):
                ii = np.clip(i + di, 0, nx - 1)
                jj = np.clip(j + dj, 0, ny - 1)
                ok &= self.interior[ii, jj] & (i + di >= 0) & (i + di < nx) & (j + dj >= 0) & (j + dj < ny)
        return ok

    def to_rows(self):
        """Rows ``(x, y, value)`` for interior nodes, in grid order."""
        v = self.node_values()
        ii, jj = np.nonzero(self.interior)
        return np.column_stack([self.grid.xs[ii], self.grid.ys[jj], v[ii, jj]])


@dataclass(frozen=True)
class Contour:
    """Closed polyline; ``ccw`` marks counter-clockwise orientation."""

    vertices: Tuple[complex, ...]
    ccw: bool = True

    def __post_init__(self):
        v = tuple(as_point(p) for p in self.vertices)
        if len(v) < 8:
            raise ConfigurationError("a contour needs at least 8 vertices")
        object.__setattr__(self, "vertices", v)
        area = 0.5 * sum((a.conjugate() * b).imag for a, b in zip(v, v[1:] + v[:1]))
        if (area > 0) != self.ccw:
            raise ConfigurationError("contour orientation flag does not match its vertices")

    @classmethod
    def circle(cls, center, radius: float, n: int = 256) -> "Contour":
        c = as_point(center)
        th = 2 * np.pi * np.arange(n) / n
        return cls(tuple(c + radius * np.exp(1j * th)), True)

    def quadrature(self, order: int = 4):
        """Gauss points, weights (arclength) and outward unit normals."""
        v = np.asarray(self.vertices)
        a, b = v, np.roll(v, -1)
        g, w = np.polynomial.legendre.leggauss(order)
        g = 0.5 * (g + 1)
        w = 0.5 * w
        e = b - a
        L = np.abs(e)
        pts = a[:, None] + g[None, :] * e[:, None]
        wts = w[None, :] * L[:, None]
        tangent = e / L
        normal = -1j * tangent if self.ccw else 1j * tangent
        nrm = np.repeat(normal[:, None], order, axis=1)
        return pts.ravel(), wts.ravel(), nrm.ravel()
