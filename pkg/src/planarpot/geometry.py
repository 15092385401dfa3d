"""Planar domains, obstacle primitives, boundary traces and metric queries.

Points are represented as Python/numpy complex numbers throughout.  A
:class:`Domain` is an ambient disk or rectangle minus a tuple of obstacle
primitives; a :class:`CompactSet` is a finite union of primitives.  Every
object here is immutable and hashable so that solver factorizations can be
cached on it.

Primitives expose a small common protocol used by the other modules:

``distance(z)``
    Euclidean distance from ``z`` to the closed primitive.
``boundary_distance(z)``
    Distance from ``z`` to the topological boundary of the primitive.
``curves()``
    Curve pieces carrying the equilibrium measure (outer boundary for
    2-D pieces, the piece itself for 1-D pieces).
``edge_hits(p, d)``
    Parameter interval ``[lo, hi]`` of ``p + s d`` (``s`` in [0, 1]) lying in
    the closed primitive, NaN where the segment misses it.
``clip(a, t)``
    Intersection with the closed disk of radius ``t`` about ``a``.
``affine(shift, log2_scale)``
    Image under ``z -> (z - shift) / 2**log2_scale``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple, Union

import numpy as np
from scipy import ndimage

from ._validation import as_point, as_points, check_open_unit, check_positive
from .exceptions import ConfigurationError, DomainError, PreconditionError

__all__ = [
    "SegmentCurve", "ArcCurve",
    "Disk", "Segment", "IntervalFamily", "PointCloud", "CombTeeth", "Region",
    "AmbientDisk", "AmbientRect", "Domain", "CompactSet", "GridMask",
    "boundary_distance", "boundary_trace", "annulus_trace", "grid_mask",
    "sample_boundary", "circular_projection",
    "unit_disk", "slit_disk", "punctured_disk", "annulus", "square",
    "carleson_totik", "comb_domain",
]

# Scales below 2**LOG2_FLOAT_FLOOR are handled in log-space bookkeeping only.
LOG2_FLOAT_FLOOR = -1000.0
# Intervals whose float length underflows below this are dropped from
# discretizations; their logarithmic energy contribution is below 1/690.
_MIN_CURVE_LENGTH = 1e-300


def _cross(u, v):
    return (np.conj(u) * v).imag


def _segment_distance(z, a: complex, b: complex):
    e = b - a
    ee = abs(e) ** 2
    if ee == 0.0:
        return np.abs(z - a)
    s = np.clip(((np.conj(e) * (z - a)).real) / ee, 0.0, 1.0)
    return np.abs(z - (a + s * e))


def _segment_edge_hits(p, d, a: complex, b: complex):
    """Parameter interval of ``p + s d`` meeting the closed segment [a, b]."""
    p = np.asarray(p, dtype=complex)
    d = np.asarray(d, dtype=complex)
    e = b - a
    w = a - p
    denom = _cross(d, e)
    scale = np.abs(d) * abs(e)
    lo = np.full(p.shape, np.nan)
    hi = np.full(p.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _cross(w, e) / denom
        u = _cross(w, d) / denom
    tol = 1e-12
    ok = (np.abs(denom) > 1e-13 * scale) & (s >= -tol) & (s <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
    sc = np.clip(s, 0.0, 1.0)
    lo[ok] = sc[ok]
    hi[ok] = sc[ok]
    par = (np.abs(denom) <= 1e-13 * scale) & (np.abs(_cross(w, d)) <= 1e-12 * np.abs(d) * np.maximum(np.abs(w), abs(e)))
    if np.any(par):
        dd = np.abs(d[par]) ** 2
        ta = (np.conj(d[par]) * (a - p[par])).real / dd
        tb = (np.conj(d[par]) * (b - p[par])).real / dd
        l0 = np.maximum(np.minimum(ta, tb), 0.0)
        h0 = np.minimum(np.maximum(ta, tb), 1.0)
        good = l0 <= h0
        idx = np.flatnonzero(par)[good]
        lo[idx] = l0[good]
        hi[idx] = h0[good]
    return lo, hi


def _disk_edge_hits(p, d, c: complex, r: float):
    p = np.asarray(p, dtype=complex)
    d = np.asarray(d, dtype=complex)
    f = p - c
    A = np.abs(d) ** 2
    B = 2.0 * (np.conj(f) * d).real
    C = np.abs(f) ** 2 - r * r
    disc = B * B - 4 * A * C
    lo = np.full(p.shape, np.nan)
    hi = np.full(p.shape, np.nan)
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t1 = (-B - sq) / (2 * A)
    t2 = (-B + sq) / (2 * A)
    ok &= (t2 >= 0) & (t1 <= 1)
    lo[ok] = np.maximum(t1[ok], 0.0)
    hi[ok] = np.minimum(t2[ok], 1.0)
    return lo, hi


def _segment_meets_rect(a: complex, b: complex, x0, x1, y0, y1):
    """Vectorized Liang-Barsky test of a fixed segment against many rectangles."""
    dx, dy = (b - a).real, (b - a).imag
    t0 = np.zeros(np.shape(x0))
    t1 = np.ones(np.shape(x0))
    ok = np.ones(np.shape(x0), dtype=bool)
    for pcoef, q in ((-dx, a.real - x0), (dx, x1 - a.real), (-dy, a.imag - y0), (dy, y1 - a.imag)):
        if pcoef == 0:
            ok &= q >= 0
        else:
            r = q / pcoef
            if pcoef < 0:
                t0 = np.maximum(t0, r)
            else:
                t1 = np.minimum(t1, r)
    return ok & (t0 <= t1)


# ---------------------------------------------------------------------------
# Curves: the pieces that carry equilibrium measures.


@dataclass(frozen=True)
class SegmentCurve:
    a: complex
    b: complex

    @property
    def length(self) -> float:
        return abs(self.b - self.a)

    def at(self, u):
        return self.a + np.asarray(u) * (self.b - self.a)

    def is_straight(self) -> bool:
        return True


@dataclass(frozen=True)
class ArcCurve:
    """Counter-clockwise circular arc from angle ``theta0`` to ``theta1``."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    @property
    def length(self) -> float:
        return self.radius * (self.theta1 - self.theta0)

    def at(self, u):
        th = self.theta0 + np.asarray(u) * (self.theta1 - self.theta0)
        return self.center + self.radius * np.exp(1j * th)

    def is_straight(self) -> bool:
        return False


def _kept_runs(pred: Callable[[np.ndarray], np.ndarray], curve, periodic: bool, samples: int = 4097):
    """Sub-intervals ``[u0, u1]`` of the curve parameter where ``pred`` holds.

    Transitions are located by sampling and refined by bisection.
    """
    u = np.linspace(0.0, 1.0, samples)
    flags = pred(curve.at(u))
    if flags.all():
        return [(0.0, 1.0)]
    if not flags.any():
        return []

    def refine(ua, ub, fa):
        for _ in range(60):
            um = 0.5 * (ua + ub)
            if bool(pred(curve.at(np.array([um])))[0]) == fa:
                ua = um
            else:
                ub = um
        return 0.5 * (ua + ub)

    runs = []
    start = 0.0 if flags[0] else None
    for k in range(1, samples):
        if flags[k] != flags[k - 1]:
            x = refine(u[k - 1], u[k], bool(flags[k - 1]))
            if flags[k]:
                start = x
            else:
                runs.append((start, x))
                start = None
    if start is not None:
        runs.append((start, 1.0))
    if periodic and len(runs) > 1 and runs[0][0] == 0.0 and runs[-1][1] == 1.0:
        first = runs.pop(0)
        last = runs.pop()
        runs.append((last[0], 1.0 + first[1]))
    return [r for r in runs if r[1] > r[0]]


# ---------------------------------------------------------------------------
# Obstacle primitives.


@dataclass(frozen=True)
class Disk:
    """Closed disk."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        check_positive(self.radius, "disk radius")
        object.__setattr__(self, "radius", float(self.radius))

    polar = False

    def contains(self, z, tol: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius + tol

    def distance(self, z):
        return np.maximum(np.abs(np.asarray(z) - self.center) - self.radius, 0.0)

    def boundary_distance(self, z):
        return np.abs(np.abs(np.asarray(z) - self.center) - self.radius)

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    def curves(self):
        return [ArcCurve(self.center, self.radius, 0.0, 2 * math.pi)]

    def measure(self) -> float:
        return 2 * math.pi * self.radius

    def special_points(self):
        return []

    def thin_pieces(self):
        return []

    def edge_hits(self, p, d):
        return _disk_edge_hits(p, d, self.center, self.radius)

    def meets_rect(self, x0, x1, y0, y1):
        cx = np.clip(self.center.real, x0, x1)
        cy = np.clip(self.center.imag, y0, y1)
        return np.hypot(cx - self.center.real, cy - self.center.imag) <= self.radius

    def clip(self, a: complex, t: float):
        dist = abs(self.center - a)
        if dist >= self.radius + t:
            return []
        if dist + self.radius <= t:
            return [self]
        if dist + t <= self.radius:
            return [Disk(a, t)]
        return [Region((("disk_in", self.center, self.radius), ("disk_in", a, t)))]

    def affine(self, shift: complex, log2_scale: float):
        s = 2.0 ** log2_scale
        return Disk((self.center - shift) / s, self.radius / s)

    def to_dict(self):
        return {"type": "disk", "center": [self.center.real, self.center.imag], "radius": self.radius}


@dataclass(frozen=True)
class Segment:
    """Closed straight segment from ``a`` to ``b``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "b", as_point(self.b))
        if self.a == self.b:
            raise ConfigurationError("segment endpoints must be distinct")

    polar = False

    def contains(self, z, tol: float = 0.0):
        return _segment_distance(np.asarray(z), self.a, self.b) <= tol

    def distance(self, z):
        return _segment_distance(np.asarray(z), self.a, self.b)

    boundary_distance = distance

    def bbox(self):
        return (min(self.a.real, self.b.real), max(self.a.real, self.b.real),
                min(self.a.imag, self.b.imag), max(self.a.imag, self.b.imag))

    def curves(self):
        return [SegmentCurve(self.a, self.b)]

    def measure(self) -> float:
        return abs(self.b - self.a)

    def special_points(self):
        return [self.a, self.b]

    def thin_pieces(self):
        return [(self.a, self.b, math.log(abs(self.b - self.a) / 4))]

    def edge_hits(self, p, d):
        return _segment_edge_hits(p, d, self.a, self.b)

    def meets_rect(self, x0, x1, y0, y1):
        return _segment_meets_rect(self.a, self.b, x0, x1, y0, y1)

    def clip(self, a: complex, t: float):
        e = self.b - self.a
        L = abs(e)
        v = (a - self.a) / (e / L)
        q = abs(v.imag)
        if q > t:
            return []
        half = math.sqrt(max(t * t - q * q, 0.0))
        s0, s1 = max(v.real - half, 0.0), min(v.real + half, L)
        if s1 < s0:
            return []
        if s0 == 0.0 and s1 == L:
            return [self]
        p0, p1 = self.a + e * (s0 / L), self.a + e * (s1 / L)
        if p0 == p1:
            return [PointCloud((p0,))]
        return [Segment(p0, p1)]

    def affine(self, shift: complex, log2_scale: float):
        s = 2.0 ** log2_scale
        return Segment((self.a - shift) / s, (self.b - shift) / s)

    def to_dict(self):
        return {"type": "segment", "a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}


@dataclass(frozen=True)
class IntervalFamily:
    """Disjoint closed intervals on a ray, stored by base-2 logarithms.

    The set is ``{origin + s * direction : 2**l <= s <= 2**r}`` over the
    stored pairs ``(l, r)``.  Keeping logarithms makes intervals such as
    ``[2**-2048, 2**-1024]`` representable; ``l = -inf`` means the interval
    starts at the origin.
    """

    origin: complex
    direction: complex
    log2_bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", as_point(self.origin))
        d = as_point(self.direction)
        if d == 0:
            raise ConfigurationError("interval family direction must be non-zero")
        object.__setattr__(self, "direction", d / abs(d))
        bounds = tuple(sorted((float(l), float(r)) for l, r in self.log2_bounds))
        for l, r in bounds:
            if not l < r or math.isnan(r) or r == math.inf:
                raise ConfigurationError(f"interval bounds must satisfy left < right, got 2**{l}, 2**{r}")
        for (l0, r0), (l1, r1) in zip(bounds, bounds[1:]):
            if r0 >= l1:
                raise ConfigurationError("intervals of a family must be pairwise disjoint")
        object.__setattr__(self, "log2_bounds", bounds)

    @classmethod
    def from_intervals(cls, intervals, origin=0j, direction=1.0):
        """Build from plain ``(left, right)`` positions along the ray (``left >= 0``)."""
        bounds = []
        for l, r in intervals:
            if l < 0 or r <= l:
                raise ConfigurationError(f"invalid interval ({l}, {r}); need 0 <= left < right")
            bounds.append((math.log2(l) if l > 0 else -math.inf, math.log2(r)))
        return cls(origin, direction, tuple(bounds))

    polar = False

    def _float_segments(self):
        out = []
        for l, r in self.log2_bounds:
            s0 = 0.0 if l == -math.inf else 2.0 ** max(l, -1074.0)
            s1 = 2.0 ** max(r, -1074.0)
            out.append((self.origin + s0 * self.direction, self.origin + s1 * self.direction, s1 - s0))
        return out

    def contains(self, z, tol: float = 0.0):
        return self.distance(z) <= tol

    def distance(self, z):
        z = np.asarray(z)
        out = np.full(z.shape, np.inf)
        for a, b, _ in self._float_segments():
            if a == b:
                out = np.minimum(out, np.abs(z - a))
            else:
                out = np.minimum(out, _segment_distance(z, a, b))
        return out

    boundary_distance = distance

    def bbox(self):
        pts = [p for a, b, _ in self._float_segments() for p in (a, b)]
        xs = [p.real for p in pts]
        ys = [p.imag for p in pts]
        return min(xs), max(xs), min(ys), max(ys)

    def curves(self):
        return [SegmentCurve(a, b) for a, b, L in self._float_segments() if L > _MIN_CURVE_LENGTH]

    def measure(self) -> float:
        return sum(L for _, _, L in self._float_segments())

    def special_points(self):
        pts = []
        for a, b, _ in self._float_segments():
            pts.extend([a, b])
        return pts

    def thin_pieces(self):
        out = []
        for (l, r), (a, b, L) in zip(self.log2_bounds, self._float_segments()):
            # log of the length computed in log-space so tiny intervals stay non-polar
            if l == -math.inf:
                log_len = r * math.log(2)
            else:
                log_len = r * math.log(2) + math.log1p(-(2.0 ** (l - r)))
            out.append((a, b, log_len - math.log(4)))
        return out

    def edge_hits(self, p, d):
        lo = np.full(np.shape(p), np.nan)
        hi = np.full(np.shape(p), np.nan)
        for a, b, _ in self._float_segments():
            if a == b:
                continue
            l1, h1 = _segment_edge_hits(p, d, a, b)
            lo = np.fmin(lo, l1)
            hi = np.fmax(hi, h1)
        return lo, hi

    def meets_rect(self, x0, x1, y0, y1):
        out = np.zeros(np.shape(x0), dtype=bool)
        for a, b, _ in self._float_segments():
            out |= _segment_meets_rect(a, b, x0, x1, y0, y1)
        return out

    def clip(self, a: complex, t: float = None, log2_t: float = None):
        """Clip to the closed disk about ``a``; radius given directly or as log2."""
        if log2_t is None:
            log2_t = math.log2(t)
        v = (a - self.origin) / self.direction
        p, q = v.real, abs(v.imag)
        keep, points = [], []
        if p == 0.0 and q == 0.0:
            for l, r in self.log2_bounds:
                if l > log2_t:
                    continue
                if l == log2_t:
                    points.append(self.origin + 2.0 ** l * self.direction)
                    continue
                keep.append((l, min(r, log2_t)))
        else:
            if log2_t < LOG2_FLOAT_FLOOR:
                raise ConfigurationError("scales below 2**-1000 are only supported at the ray origin")
            t = 2.0 ** log2_t
            if q > t:
                return []
            half = math.sqrt(max(t * t - q * q, 0.0))
            s0, s1 = p - half, p + half
            for l, r in self.log2_bounds:
                left = 0.0 if l == -math.inf else 2.0 ** l
                right = 2.0 ** r
                if right < s0 or left > s1:
                    continue
                nl = l if left >= s0 else math.log2(s0) if s0 > 0 else -math.inf
                nr = r if right <= s1 else math.log2(s1)
                if nr > nl:
                    keep.append((nl, nr))
                elif nr == nl:
                    points.append(self.origin + 2.0 ** nl * self.direction)
        out = []
        if keep:
            out.append(IntervalFamily(self.origin, self.direction, tuple(keep)))
        if points:
            out.append(PointCloud(tuple(points)))
        return out

    def affine(self, shift: complex, log2_scale: float):
        s = 2.0 ** log2_scale
        return IntervalFamily((self.origin - shift) / s, self.direction,
                              tuple((l - log2_scale, r - log2_scale) for l, r in self.log2_bounds))

    def to_dict(self):
        return {"type": "intervals", "origin": [self.origin.real, self.origin.imag],
                "direction": [self.direction.real, self.direction.imag],
                "log2_intervals": [[l, r] for l, r in self.log2_bounds]}


@dataclass(frozen=True)
class PointCloud:
    """Finite point set (polar: zero capacity, invisible to Dirichlet problems)."""

    points: Tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(as_point(p) for p in self.points)
        if not pts:
            raise ConfigurationError("point cloud must contain at least one point")
        object.__setattr__(self, "points", pts)

    polar = True

    def contains(self, z, tol: float = 0.0):
        return self.distance(z) <= tol

    def distance(self, z):
        z = np.asarray(z)
        return np.min(np.abs(z[..., None] - np.asarray(self.points)), axis=-1)

    boundary_distance = distance

    def bbox(self):
        xs = [p.real for p in self.points]
        ys = [p.imag for p in self.points]
        return min(xs), max(xs), min(ys), max(ys)

    def curves(self):
        return []

    def measure(self) -> float:
        return 0.0

    def special_points(self):
        return list(self.points)

    def thin_pieces(self):
        return []

    def edge_hits(self, p, d):
        # polar sets are invisible to Dirichlet problems
        nan = np.full(np.shape(p), np.nan)
        return nan, nan.copy()

    def meets_rect(self, x0, x1, y0, y1):
        out = np.zeros(np.shape(x0), dtype=bool)
        for p in self.points:
            out |= (x0 <= p.real) & (p.real <= x1) & (y0 <= p.imag) & (p.imag <= y1)
        return out

    def clip(self, a: complex, t: float):
        pts = tuple(p for p in self.points if abs(p - a) <= t)
        return [PointCloud(pts)] if pts else []

    def affine(self, shift: complex, log2_scale: float):
        s = 2.0 ** log2_scale
        return PointCloud(tuple((p - shift) / s for p in self.points))

    def to_dict(self):
        return {"type": "points", "points": [[p.real, p.imag] for p in self.points]}


@dataclass(frozen=True)
class CombTeeth:
    """Teeth perpendicular to a ray, accumulating at its origin.

    Tooth ``k = 1..depth`` sits at ``origin + lam**k * direction`` and has
    total length ``length_scale * lam**(gamma*k)``, centred on the ray.
    """

    origin: complex
    direction: complex
    lam: float
    gamma: float
    depth: int
    length_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "origin", as_point(self.origin))
        d = as_point(self.direction)
        if d == 0:
            raise ConfigurationError("comb direction must be non-zero")
        object.__setattr__(self, "direction", d / abs(d))
        check_open_unit(self.lam, "comb lambda")
        if not float(self.gamma) >= 1.0:
            raise ConfigurationError(f"comb gamma must be >= 1, got {self.gamma}")
        if int(self.depth) < 1:
            raise ConfigurationError("comb depth must be at least 1")
        check_positive(self.length_scale, "comb length scale")
        object.__setattr__(self, "depth", int(self.depth))

    polar = False

    def teeth(self):
        out = []
        for k in range(1, self.depth + 1):
            c = self.origin + self.lam ** k * self.direction
            half = 0.5 * self.length_scale * self.lam ** (self.gamma * k)
            out.append(Segment(c - 1j * self.direction * half, c + 1j * self.direction * half))
        return out

    def contains(self, z, tol: float = 0.0):
        return self.distance(z) <= tol

    def distance(self, z):
        z = np.asarray(z)
        out = np.full(z.shape, np.inf)
        for s in self.teeth():
            out = np.minimum(out, s.distance(z))
        return out

    boundary_distance = distance

    def bbox(self):
        boxes = [s.bbox() for s in self.teeth()]
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))

    def curves(self):
        return [c for s in self.teeth() for c in s.curves()]

    def measure(self) -> float:
        return sum(s.measure() for s in self.teeth())

    def special_points(self):
        return [p for s in self.teeth() for p in s.special_points()]

    def thin_pieces(self):
        return [p for s in self.teeth() for p in s.thin_pieces()]

    def edge_hits(self, p, d):
        lo = np.full(np.shape(p), np.nan)
        hi = np.full(np.shape(p), np.nan)
        for s in self.teeth():
            l1, h1 = s.edge_hits(p, d)
            lo = np.fmin(lo, l1)
            hi = np.fmax(hi, h1)
        return lo, hi

    def meets_rect(self, x0, x1, y0, y1):
        out = np.zeros(np.shape(x0), dtype=bool)
        for s in self.teeth():
            out |= s.meets_rect(x0, x1, y0, y1)
        return out

    def clip(self, a: complex, t: float):
        return [p for s in self.teeth() for p in s.clip(a, t)]

    def affine(self, shift: complex, log2_scale: float):
        return _Segments(tuple(t.affine(shift, log2_scale) for t in self.teeth()))

    def to_dict(self):
        return {"type": "comb", "origin": [self.origin.real, self.origin.imag],
                "direction": [self.direction.real, self.direction.imag], "lam": self.lam,
                "gamma": self.gamma, "depth": self.depth, "length_scale": self.length_scale}


@dataclass(frozen=True)
class _Segments:
    """Union of segments; the image of comb teeth under a similarity."""

    segments: Tuple[Segment, ...]
    polar = False

    def distance(self, z):
        z = np.asarray(z)
        out = np.full(z.shape, np.inf)
        for s in self.segments:
            out = np.minimum(out, s.distance(z))
        return out

    boundary_distance = distance

    def contains(self, z, tol: float = 0.0):
        return self.distance(z) <= tol

    def bbox(self):
        boxes = [s.bbox() for s in self.segments]
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))

    def curves(self):
        return [c for s in self.segments for c in s.curves()]

    def measure(self):
        return sum(s.measure() for s in self.segments)

    def special_points(self):
        return [p for s in self.segments for p in s.special_points()]

    def thin_pieces(self):
        return [p for s in self.segments for p in s.thin_pieces()]

    def edge_hits(self, p, d):
        lo = np.full(np.shape(p), np.nan)
        hi = np.full(np.shape(p), np.nan)
        for s in self.segments:
            l1, h1 = s.edge_hits(p, d)
            lo = np.fmin(lo, l1)
            hi = np.fmax(hi, h1)
        return lo, hi

    def meets_rect(self, x0, x1, y0, y1):
        out = np.zeros(np.shape(x0), dtype=bool)
        for s in self.segments:
            out |= s.meets_rect(x0, x1, y0, y1)
        return out

    def clip(self, a, t):
        return [p for s in self.segments for p in s.clip(a, t)]

    def affine(self, shift, log2_scale):
        return _Segments(tuple(s.affine(shift, log2_scale) for s in self.segments))


def _constraint_holds(con, z, tol):
    kind = con[0]
    if kind == "disk_in":
        return np.abs(z - con[1]) <= con[2] + tol
    if kind == "disk_out":
        return np.abs(z - con[1]) >= con[2] - tol
    if kind == "rect_out":
        x0, x1, y0, y1 = con[1:]
        return ~((z.real > x0 + tol) & (z.real < x1 - tol) & (z.imag > y0 + tol) & (z.imag < y1 - tol))
    raise ConfigurationError(f"unknown region constraint {kind!r}")


def _constraint_curves(con):
    kind = con[0]
    if kind in ("disk_in", "disk_out"):
        return [(ArcCurve(con[1], con[2], 0.0, 2 * math.pi), True)]
    x0, x1, y0, y1 = con[1:]
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    return [(SegmentCurve(corners[i], corners[(i + 1) % 4]), False) for i in range(4)]


def _affine_constraint(con, shift, s):
    kind = con[0]
    if kind in ("disk_in", "disk_out"):
        return (kind, (con[1] - shift) / s, con[2] / s)
    x0, x1, y0, y1 = con[1:]
    return (kind, (x0 - shift.real) / s, (x1 - shift.real) / s, (y0 - shift.imag) / s, (y1 - shift.imag) / s)


@dataclass(frozen=True)
class Region:
    """Intersection of closed disks, closed disk exteriors and rectangle exteriors.

    Used for clipped disks and for the parts of the ambient complement that
    fall inside a trace disk.  Constraints are tuples
    ``("disk_in", c, r)``, ``("disk_out", c, r)`` or
    ``("rect_out", x0, x1, y0, y1)``.
    """

    constraints: Tuple[tuple, ...]
    polar = False

    def contains(self, z, tol: float = 0.0):
        z = np.asarray(z)
        out = np.ones(z.shape, dtype=bool)
        for con in self.constraints:
            out &= _constraint_holds(con, z, tol)
        return out

    def curves(self):
        return list(self._curves)

    @functools.cached_property
    def _curves(self):
        out = []
        scale = max(abs(c[2]) if c[0] != "rect_out" else max(abs(v) for v in c[1:]) for c in self.constraints)
        tol = 1e-13 * max(scale, 1e-300)
        for i, con in enumerate(self.constraints):
            others = [c for j, c in enumerate(self.constraints) if j != i]

            def pred(z, others=others):
                ok = np.ones(z.shape, dtype=bool)
                for c in others:
                    ok &= _constraint_holds(c, z, tol)
                return ok

            for curve, periodic in _constraint_curves(con):
                for u0, u1 in _kept_runs(pred, curve, periodic):
                    if isinstance(curve, ArcCurve):
                        span = curve.theta1 - curve.theta0
                        piece = ArcCurve(curve.center, curve.radius,
                                         curve.theta0 + u0 * span, curve.theta0 + u1 * span)
                    else:
                        piece = SegmentCurve(curve.at(u0), curve.at(u1))
                    if piece.length > 0:
                        out.append(piece)
        return tuple(out)

    def _samples(self):
        pts = [c.at(np.linspace(0, 1, 65)) for c in self.curves()]
        return np.concatenate(pts) if pts else np.zeros(0, complex)

    def distance(self, z):
        z = np.asarray(z)
        inside = self.contains(z)
        pts = self._samples()
        d = np.min(np.abs(z[..., None] - pts), axis=-1) if pts.size else np.full(z.shape, np.inf)
        return np.where(inside, 0.0, d)

    def boundary_distance(self, z):
        z = np.asarray(z)
        pts = self._samples()
        return np.min(np.abs(z[..., None] - pts), axis=-1)

    def bbox(self):
        pts = self._samples()
        return pts.real.min(), pts.real.max(), pts.imag.min(), pts.imag.max()

    def measure(self) -> float:
        return sum(c.length for c in self.curves())

    def special_points(self):
        return []

    def thin_pieces(self):
        return []

    def edge_hits(self, p, d):
        raise NotImplementedError("regions are only used for capacity discretizations")

    def clip(self, a: complex, t: float):
        reg = Region(self.constraints + (("disk_in", a, t),))
        return [reg] if reg.curves() else []

    def affine(self, shift: complex, log2_scale: float):
        s = 2.0 ** log2_scale
        return Region(tuple(_affine_constraint(c, shift, s) for c in self.constraints))


Primitive = Union[Disk, Segment, IntervalFamily, PointCloud, CombTeeth, Region]


# ---------------------------------------------------------------------------
# Ambient regions and domains.


@dataclass(frozen=True)
class AmbientDisk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        check_positive(self.radius, "ambient radius")
        object.__setattr__(self, "radius", float(self.radius))

    def inside(self, z, tol: float = 0.0):
        return np.abs(np.asarray(z) - self.center) < self.radius - tol

    def boundary_distance(self, z):
        return np.abs(self.radius - np.abs(np.asarray(z) - self.center))

    def bbox(self):
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r

    @property
    def diameter(self) -> float:
        return 2 * self.radius

    def exit_param(self, p, d):
        """Parameter at which ``p + s d`` (``p`` inside) leaves the disk."""
        f = p - self.center
        A = np.abs(d) ** 2
        B = 2.0 * (np.conj(f) * d).real
        C = np.abs(f) ** 2 - self.radius ** 2
        disc = np.maximum(B * B - 4 * A * C, 0.0)
        return (-B + np.sqrt(disc)) / (2 * A)

    def cell_inside(self, x0, x1, y0, y1):
        fx = np.maximum(np.abs(x0 - self.center.real), np.abs(x1 - self.center.real))
        fy = np.maximum(np.abs(y0 - self.center.imag), np.abs(y1 - self.center.imag))
        return np.hypot(fx, fy) <= self.radius

    def complement_constraint(self):
        return ("disk_out", self.center, self.radius)

    def curves(self):
        return [ArcCurve(self.center, self.radius, 0.0, 2 * math.pi)]

    def to_dict(self):
        return {"type": "disk", "center": [self.center.real, self.center.imag], "radius": self.radius}


@dataclass(frozen=True)
class AmbientRect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        for name in ("xmin", "xmax", "ymin", "ymax"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ConfigurationError("rectangle needs xmin < xmax and ymin < ymax")

    def inside(self, z, tol: float = 0.0):
        z = np.asarray(z)
        return ((z.real > self.xmin + tol) & (z.real < self.xmax - tol)
                & (z.imag > self.ymin + tol) & (z.imag < self.ymax - tol))

    def boundary_distance(self, z):
        z = np.asarray(z)
        x, y = z.real, z.imag
        inside = self.inside(z)
        din = np.minimum(np.minimum(x - self.xmin, self.xmax - x), np.minimum(y - self.ymin, self.ymax - y))
        dx = np.maximum(np.maximum(self.xmin - x, x - self.xmax), 0.0)
        dy = np.maximum(np.maximum(self.ymin - y, y - self.ymax), 0.0)
        return np.where(inside, din, np.hypot(dx, dy))

    def bbox(self):
        return self.xmin, self.xmax, self.ymin, self.ymax

    @property
    def diameter(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)

    def exit_param(self, p, d):
        with np.errstate(divide="ignore", invalid="ignore"):
            tx = np.where(d.real > 0, (self.xmax - p.real) / d.real,
                          np.where(d.real < 0, (self.xmin - p.real) / d.real, np.inf))
            ty = np.where(d.imag > 0, (self.ymax - p.imag) / d.imag,
                          np.where(d.imag < 0, (self.ymin - p.imag) / d.imag, np.inf))
        return np.minimum(tx, ty)

    def cell_inside(self, x0, x1, y0, y1):
        return (x0 >= self.xmin) & (x1 <= self.xmax) & (y0 >= self.ymin) & (y1 <= self.ymax)

    def complement_constraint(self):
        return ("rect_out", self.xmin, self.xmax, self.ymin, self.ymax)

    def curves(self):
        c = [complex(self.xmin, self.ymin), complex(self.xmax, self.ymin),
             complex(self.xmax, self.ymax), complex(self.xmin, self.ymax)]
        return [SegmentCurve(c[i], c[(i + 1) % 4]) for i in range(4)]

    def to_dict(self):
        return {"type": "rect", "xmin": self.xmin, "xmax": self.xmax, "ymin": self.ymin, "ymax": self.ymax}


Ambient = Union[AmbientDisk, AmbientRect]


@dataclass(frozen=True)
class Domain:
    """Bounded planar domain: ambient region minus obstacle primitives.

    Parameters
    ----------
    ambient : AmbientDisk or AmbientRect
    obstacles : tuple of primitives
        Closed sets removed from the ambient region.
    base_point : complex
        Fixed interior point; the domain is the component containing it.
    validate : bool
        Run the flood-fill connectivity check (default True).
    """

    ambient: Ambient
    obstacles: Tuple[Primitive, ...] = ()
    base_point: complex = 0j
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "base_point", as_point(self.base_point))
        if self.validate:
            self._validate()

    @property
    def diameter(self) -> float:
        return self.ambient.diameter

    def _validate(self):
        z0 = self.base_point
        if not bool(self.ambient.inside(z0)):
            raise DomainError(f"base point {z0} is not interior to the ambient region")
        for k, ob in enumerate(self.obstacles):
            if float(ob.distance(np.array([z0]))[0]) <= 0.0:
                raise DomainError(f"base point {z0} lies on obstacle {k}")
            x0, x1, y0, y1 = ob.bbox()
            corners = np.array([complex(x0, y0), complex(x1, y1), complex(x0, y1), complex(x1, y0)])
            samples = np.concatenate([c.at(np.linspace(0, 1, 33)) for c in ob.curves()] or [corners[:0]])
            pts = samples if samples.size else np.array(ob.special_points(), dtype=complex)
            tol = 1e-9 * self.diameter
            if pts.size and not np.all(self.ambient.inside(pts, -tol) | (self.ambient.boundary_distance(pts) <= tol)):
                raise DomainError(f"obstacle {k} is not contained in the closed ambient region")
        # flood fill on a validation grid
        x0, x1, y0, y1 = self.ambient.bbox()
        h = self.diameter / 512
        xs = np.arange(x0 + h / 2, x1, h)
        ys = np.arange(y0 + h / 2, y1, h)
        Z = xs[:, None] + 1j * ys[None, :]
        free = self.ambient.inside(Z)
        for ob in self.obstacles:
            if isinstance(ob, Disk):
                free &= ~ob.contains(Z)
        labels, _ = ndimage.label(free)
        i = int(np.clip(np.searchsorted(xs, z0.real), 0, len(xs) - 1))
        j = int(np.clip(np.searchsorted(ys, z0.imag), 0, len(ys) - 1))
        near = labels[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
        if not np.any(near > 0):
            raise DomainError("the component of the base point is empty on the validation grid")

    # -- queries ---------------------------------------------------------
    def features(self):
        """Ambient followed by obstacles, for per-feature boundary data."""
        return (self.ambient,) + self.obstacles

    def contains(self, z, tol: float = 0.0):
        """Membership in the open set ambient minus closed obstacles."""
        z = np.asarray(z)
        out = self.ambient.inside(z, tol)
        for ob in self.obstacles:
            if not ob.polar or tol >= 0:
                out &= ob.distance(z) > tol
        return out

    def scaled(self, s: float, about: complex = 0j) -> "Domain":
        """Image under ``z -> about + s (z - about)``."""
        log2s = math.log2(s)
        shift = about - about / s

        def img(p):
            return p.affine(shift, -log2s) if not isinstance(p, CombTeeth) else CombTeeth(
                about + s * (p.origin - about), p.direction, p.lam, p.gamma, p.depth, p.length_scale * s)

        amb = self.ambient
        if isinstance(amb, AmbientDisk):
            amb = AmbientDisk(about + s * (amb.center - about), amb.radius * s)
        else:
            lo = about + s * (complex(amb.xmin, amb.ymin) - about)
            hi = about + s * (complex(amb.xmax, amb.ymax) - about)
            amb = AmbientRect(lo.real, hi.real, lo.imag, hi.imag)
        return Domain(amb, tuple(img(p) for p in self.obstacles), about + s * (self.base_point - about))

    def to_dict(self):
        return {"ambient": self.ambient.to_dict(), "obstacles": [o.to_dict() for o in self.obstacles],
                "base_point": [self.base_point.real, self.base_point.imag]}

    def has_holes(self) -> bool:
        """True if some obstacle is a bounded complementary component.

        An obstacle counts as a hole when it does not touch the ambient
        boundary.  Chains of mutually touching obstacles are not traced.
        """
        tol = 1e-9 * self.diameter
        for ob in self.obstacles:
            pts = np.array(ob.special_points() or [c.at(0.25) for c in ob.curves()], dtype=complex)
            if ob.curves():
                pts = np.concatenate([pts, np.concatenate([c.at(np.linspace(0, 1, 257)) for c in ob.curves()])])
            if np.min(self.ambient.boundary_distance(pts)) > tol:
                return True
        return False


@dataclass(frozen=True)
class CompactSet:
    """Finite union of primitives.

    ``CompactSet(())`` is the empty set, which is polar.
    """

    primitives: Tuple[Primitive, ...]

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))

    @property
    def is_polar(self) -> bool:
        return all(p.polar for p in self.primitives) or not any(c.length > 0 for p in self.primitives for c in p.curves())

    def curves(self):
        return [c for p in self.primitives for c in p.curves()]

    def bbox(self):
        boxes = [p.bbox() for p in self.primitives]
        return (min(b[0] for b in boxes), max(b[1] for b in boxes),
                min(b[2] for b in boxes), max(b[3] for b in boxes))

    @property
    def bounding_radius(self) -> float:
        x0, x1, y0, y1 = self.bbox()
        return 0.5 * math.hypot(x1 - x0, y1 - y0)

    @property
    def center(self) -> complex:
        x0, x1, y0, y1 = self.bbox()
        return complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))

    def distance(self, z):
        z = np.asarray(z)
        out = np.full(z.shape, np.inf)
        for p in self.primitives:
            out = np.minimum(out, p.distance(z))
        return out

    def affine(self, shift: complex, log2_scale: float) -> "CompactSet":
        return CompactSet(tuple(p.affine(shift, log2_scale) for p in self.primitives))

    def scaled(self, s: float) -> "CompactSet":
        return self.affine(0j, -math.log2(s))

    def union(self, other: "CompactSet") -> "CompactSet":
        return CompactSet(self.primitives + other.primitives)

    def measure(self) -> float:
        return sum(p.measure() for p in self.primitives)


# ---------------------------------------------------------------------------
# Operations.


def boundary_distance(domain: Domain, z):
    """Exact distance from ``z`` to the nearest boundary feature.

    Parameters
    ----------
    domain : Domain
    z : complex or array of complex
        Points inside the ambient region.

    Returns
    -------
    float or ndarray
    """
    scalar = np.ndim(z) == 0 and not isinstance(z, (list, tuple))
    zz = as_points(z) if not scalar else np.array([as_point(z)])
    tol = 1e-12 * domain.diameter
    if not np.all(domain.ambient.inside(zz, -tol)):
        raise DomainError("boundary_distance needs points inside the ambient region")
    out = domain.ambient.boundary_distance(zz)
    for ob in domain.obstacles:
        out = np.minimum(out, ob.boundary_distance(zz))
    return float(out[0]) if scalar else out


def default_boundary_tolerance(domain: Domain) -> float:
    """Half the verification grid spacing (diameter / 2048)."""
    return domain.diameter / 2048


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


def boundary_trace(domain: Domain, a, t: float = None, *, log2_t: float = None,
                   normalize: bool = False, tol: float = None, inner: float = None) -> CompactSet:
    """Closed disk of radius ``t`` about a boundary point, minus the domain.

    Parameters
    ----------
    domain : Domain
    a : complex
        Boundary point (checked analytically within ``tol``).
    t : float, optional
        Radius.  Give ``log2_t`` instead for scales below float range.
    normalize : bool
        Return ``(K - a) / t`` instead of ``K``; clipping then happens in
        normalized coordinates so tiny scales do not underflow.
    inner : float, optional
        If given, intersect with ``|z - a| >= inner * t`` (annular trace).

    Returns
    -------
    CompactSet
    """
    a = as_point(a)
    if log2_t is None:
        log2_t = math.log2(check_positive(t, "trace radius"))
    if tol is None:
        tol = default_boundary_tolerance(domain)
    dist = float(np.min([domain.ambient.boundary_distance(np.array([a]))[0]]
                        + [float(ob.boundary_distance(np.array([a]))[0]) for ob in domain.obstacles]))
    if dist > tol:
        raise PreconditionError(f"point {a} is {dist:.3e} from the boundary (tolerance {tol:.3e})")
    return _trace(domain, a, log2_t, normalize, inner)


def _trace(domain: Domain, a: complex, log2_t: float, normalize: bool, inner=None) -> CompactSet:
    pieces = []
    tiny = log2_t < LOG2_FLOAT_FLOOR
    t = 0.0 if tiny else 2.0 ** log2_t
    shift, l2s = (a, log2_t) if normalize else (0j, 0.0)
    for ob in domain.obstacles:
        d = float(ob.distance(np.array([a]))[0])
        if _log2(d) > log2_t:
            continue
        if isinstance(ob, IntervalFamily):
            clipped = ob.clip(a, log2_t=log2_t) if tiny or normalize else ob.clip(a, t)
            pieces.extend(p.affine(shift, l2s) if normalize else p for p in clipped)
            continue
        if tiny:
            if isinstance(ob, PointCloud):
                if any(p == a for p in ob.points):
                    pieces.append(PointCloud((0j,) if normalize else (a,)))
                continue
            raise ConfigurationError("scales below 2**-1000 are supported for interval families and points only")
        if normalize and not isinstance(ob, Region):
            # clip in normalized coordinates to keep magnitudes O(1)
            img = ob.affine(a, log2_t) if not isinstance(ob, CombTeeth) else _Segments(
                tuple(s.affine(a, log2_t) for s in ob.teeth() if _log2(float(s.distance(np.array([a]))[0])) <= log2_t))
            pieces.extend(img.clip(0j, 1.0))
        else:
            clipped = ob.clip(a, t)
            pieces.extend(p.affine(shift, l2s) if normalize else p for p in clipped)
    amb_d = float(domain.ambient.boundary_distance(np.array([a]))[0]) if bool(domain.ambient.inside(a)) else 0.0
    if _log2(amb_d) < log2_t:
        if tiny:
            raise ConfigurationError("scales below 2**-1000 near the ambient boundary are not supported")
        con = domain.ambient.complement_constraint()
        if normalize:
            con = _affine_constraint(con, a, t)
            reg = Region((con, ("disk_in", 0j, 1.0)))
        else:
            reg = Region((con, ("disk_in", a, t)))
        if reg.curves():
            pieces.append(reg)
    if inner is not None and inner > 0:
        c0, r0 = (0j, inner) if normalize else (a, inner * t)
        pieces = _remove_open_disk(pieces, c0, r0)
    return CompactSet(tuple(pieces))


def _remove_open_disk(pieces, c0: complex, r0: float):
    """Intersect primitives with ``|z - c0| >= r0``."""
    out = []
    for p in pieces:
        if isinstance(p, Region):
            reg = Region(p.constraints + (("disk_out", c0, r0),))
            if reg.curves():
                out.append(reg)
        elif isinstance(p, Disk):
            if abs(p.center - c0) + p.radius <= r0:
                continue
            reg = Region((("disk_in", p.center, p.radius), ("disk_out", c0, r0)))
            if reg.curves():
                out.append(reg)
        elif isinstance(p, Segment):
            out.extend(_segment_outside_disk(p, c0, r0))
        elif isinstance(p, IntervalFamily):
            for l, r in p.log2_bounds:
                seg_a = p.origin + (0.0 if l == -math.inf else 2.0 ** l) * p.direction
                seg_b = p.origin + 2.0 ** r * p.direction
                if seg_a == seg_b:
                    continue
                out.extend(_segment_outside_disk(Segment(seg_a, seg_b), c0, r0))
        elif isinstance(p, PointCloud):
            pts = tuple(q for q in p.points if abs(q - c0) >= r0)
            if pts:
                out.append(PointCloud(pts))
        elif isinstance(p, _Segments):
            for s in p.segments:
                out.extend(_segment_outside_disk(s, c0, r0))
    return out


def _segment_outside_disk(seg: Segment, c0: complex, r0: float):
    e = seg.b - seg.a
    L = abs(e)
    v = (c0 - seg.a) / (e / L)
    q = abs(v.imag)
    if q >= r0:
        return [seg]
    half = math.sqrt(r0 * r0 - q * q)
    out = []
    lo, hi = v.real - half, v.real + half
    if lo > 0:
        out.append(Segment(seg.a, seg.a + e * min(lo, L) / L))
    if hi < L:
        out.append(Segment(seg.a + e * max(hi, 0.0) / L, seg.b))
    return [s for s in out if s.a != s.b]


def annulus_trace(domain: Domain, a, r_out: float, r_in: float, *, normalize: bool = True,
                  check_boundary: bool = False) -> CompactSet:
    """Intersection of the closed annulus ``r_in <= |z - a| <= r_out`` with the complement.

    With ``normalize`` the set is returned in coordinates ``(z - a) / r_out``.
    ``a`` need not be a boundary point (Zwonek sums use interior centers).
    """
    a = as_point(a)
    if not 0 <= r_in < r_out:
        raise ConfigurationError("annulus needs 0 <= r_in < r_out")
    if check_boundary:
        boundary_trace(domain, a, r_out)
    return _trace(domain, a, math.log2(r_out), normalize, inner=r_in / r_out)


def disk_trace(domain: Domain, z, radius: float, *, normalize: bool = True) -> CompactSet:
    """``closed disk(z, radius)`` minus the domain, for arbitrary centers."""
    return _trace(domain, as_point(z), math.log2(check_positive(radius, "radius")), normalize)


@dataclass(frozen=True)
class GridMask:
    """Cell mask of a uniform grid anchored at the ambient bounding box."""

    x0: float
    y0: float
    h: float
    mask: np.ndarray = field(compare=False)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def interior_cells(self):
        return np.argwhere(self.mask)

    def centers(self):
        nx, ny = self.mask.shape
        xs = self.x0 + (np.arange(nx) + 0.5) * self.h
        ys = self.y0 + (np.arange(ny) + 0.5) * self.h
        return xs[:, None] + 1j * ys[None, :]


def grid_mask(domain: Domain, h: float) -> GridMask:
    """Interior cells of a uniform grid of spacing ``h``.

    A cell is interior when the closed cell lies in the closed ambient region
    and meets no obstacle.  Cells are anchored at the lower-left corner of the
    ambient bounding box.

    Raises
    ------
    ConfigurationError
        If ``h`` exceeds a quarter of the ambient diameter or no interior
        cell is connected to the base point.
    """
    h = check_positive(h, "grid spacing")
    if h > domain.diameter / 4:
        raise ConfigurationError(f"grid spacing {h} is coarser than diameter/4 = {domain.diameter / 4}")
    x0, x1, y0, y1 = domain.ambient.bbox()
    nx = int(math.ceil((x1 - x0) / h - 1e-9))
    ny = int(math.ceil((y1 - y0) / h - 1e-9))
    cx0 = x0 + np.arange(nx) * h
    cy0 = y0 + np.arange(ny) * h
    X0, Y0 = np.meshgrid(cx0, cy0, indexing="ij")
    X1, Y1 = X0 + h, Y0 + h
    mask = domain.ambient.cell_inside(X0, X1, Y0, Y1)
    for ob in domain.obstacles:
        mask &= ~ob.meets_rect(X0, X1, Y0, Y1)
    if not mask.any():
        raise ConfigurationError("grid mask has no interior cells")
    return GridMask(x0, y0, h, mask)


def sample_boundary(domain: Domain, n: int = 64, *, include_special: bool = True) -> np.ndarray:
    """Deterministic arclength-uniform sample of the boundary.

    Points ``s_k = (k + 1/2) L / n`` along the concatenated boundary curves
    (ambient first, then obstacles in order).  With ``include_special``,
    endpoints of segments and intervals and isolated points are appended
    (deduplicated, order preserved).
    """
    if n < 1:
        raise ConfigurationError("boundary sample needs at least one point")
    curves = list(domain.ambient.curves())
    for ob in domain.obstacles:
        curves.extend(ob.curves())
    lengths = np.array([c.length for c in curves])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = (np.arange(n) + 0.5) * cum[-1] / n
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(curves) - 1)
    pts = [complex(curves[i].at((sk - cum[i]) / lengths[i])) for sk, i in zip(s, idx)]
    if include_special:
        seen = set(pts)
        for ob in domain.obstacles:
            for p in ob.special_points():
                p = complex(p)
                if p not in seen:
                    seen.add(p)
                    pts.append(p)
    return np.array(pts, dtype=complex)


def circular_projection(K: CompactSet) -> CompactSet:
    """Image of ``K`` under ``w -> |w|`` for segments and disks.

    Each connected primitive maps onto a radial interval on the positive
    real axis; overlapping intervals are merged.
    """
    spans = []
    for p in K.primitives:
        if isinstance(p, Segment):
            lo = float(p.distance(np.array([0j]))[0])
            hi = max(abs(p.a), abs(p.b))
        elif isinstance(p, Disk):
            lo = max(abs(p.center) - p.radius, 0.0)
            hi = abs(p.center) + p.radius
        elif isinstance(p, Region):
            pts = p._samples()
            lo = float(p.distance(np.array([0j]))[0])
            hi = float(np.abs(pts).max())
        else:
            raise ConfigurationError(f"circular projection not implemented for {type(p).__name__}")
        spans.append((lo, hi))
    spans.sort()
    merged = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return CompactSet(tuple(Segment(lo, hi) for lo, hi in merged if hi > lo))


# ---------------------------------------------------------------------------
# Reference domain families.


def unit_disk() -> Domain:
    return Domain(AmbientDisk(0j, 1.0), (), 0j)


def slit_disk(base_point=-0.5) -> Domain:
    """Unit disk minus the segment [0, 1]; the slit tip is at 0."""
    return Domain(AmbientDisk(0j, 1.0), (Segment(0j, 1 + 0j),), base_point)


def punctured_disk() -> Domain:
    return Domain(AmbientDisk(0j, 1.0), (PointCloud((0j,)),), 0.5)


def annulus(inner: float = 0.5) -> Domain:
    return Domain(AmbientDisk(0j, 1.0), (Disk(0j, inner),), 0.5 * (1 + inner))


def square(half_side: float = 1.0) -> Domain:
    s = half_side
    return Domain(AmbientRect(-s, s, -s, s), (), 0j)


def carleson_totik(kmax: int = 4) -> Domain:
    """Unit disk minus ``{0}`` and the intervals ``[2**-2**(2k+1), 2**-2**(2k)]``, k = 1..kmax."""
    bounds = tuple((-(2.0 ** (2 * k + 1)), -(2.0 ** (2 * k))) for k in range(1, kmax + 1))
    fam = IntervalFamily(0j, 1.0, bounds)
    return Domain(AmbientDisk(0j, 1.0), (PointCloud((0j,)), fam), -0.5)


def comb_domain(lam: float = 0.5, gamma: float = 2.0, depth: int = 40, length_scale: float = 0.5) -> Domain:
    """Unit disk minus comb teeth accumulating at 0, plus the point 0 itself."""
    teeth = CombTeeth(0j, 1.0, lam, gamma, depth, length_scale)
    return Domain(AmbientDisk(0j, 1.0), (teeth, PointCloud((0j,))), -0.5)
