"""Bergman kernels, metrics and distances of planar domains.

A :class:`BergmanModel` orthonormalizes a holomorphic basis in the
``L^2`` inner product of a cell quadrature over the domain.  The basis is
generated as Krylov chains: monomials are built by repeated multiplication
by ``(z - c)/R``, poles in holes by multiplication by ``R/(z - p)``, and
branch terms at slit tips by multiplication by ``s**2`` starting from
``1/s`` with ``s = sqrt((z - tip)/(direction R))``.  Every new vector is
orthogonalized against all previous ones (two Gram-Schmidt passes) and the
recurrence coefficients are stored, so the orthonormal functions can be
re-evaluated at any point.  The diagonal kernel is ``sum |q_k(z)|**2``.

For domains with a closed-form Riemann map the :class:`ConformalBergmanKernel`
evaluates the kernel, metric and distance exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_point, as_points, check_int, check_positive
from .exceptions import ConfigurationError, DomainError, PreconditionError
from .geometry import (
    AmbientDisk, Disk, Domain, PointCloud, Segment,
    boundary_distance, disk_trace, grid_mask,
)

__all__ = [
    "BasisSpec", "BergmanModel", "ConformalBergmanKernel", "build_bergman_model",
    "kernel_diag", "bergman_metric", "bergman_distance", "check_sc_bound",
    "green_to_kernel_bound", "zwonek_bound", "cap_condition_kernel_check",
    "BergmanKernel", "disk_map", "slit_disk_map",
]

_SUBSAMPLE = 8
_DROP_TOL = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    """Holomorphic basis description.

    Parameters
    ----------
    degree : int
        Highest monomial power of ``(z - center)/scale``.
    center, scale : complex, float
        Normalization of the monomials and poles.
    poles : tuple of (complex, int)
        Pole location (inside a hole) and highest pole order.
    branches : tuple of (complex, complex, int)
        Slit tip, unit direction from the tip along the slit, and the
        highest odd power of ``s``; ``s**-1`` is always included.
    """

    degree: int
    center: complex = 0j
    scale: float = 1.0
    poles: Tuple[Tuple[complex, int], ...] = ()
    branches: Tuple[Tuple[complex, complex, int], ...] = ()

    def __post_init__(self):
        check_int(self.degree, "basis degree", 0)
        check_positive(self.scale, "basis scale")
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "poles", tuple((as_point(p), check_int(m, "pole order", 1))
                                                for p, m in self.poles))
        br = []
        for tip, d, J in self.branches:
            d = as_point(d)
            if d == 0:
                raise ConfigurationError("branch direction must be non-zero")
            br.append((as_point(tip), d / abs(d), check_int(J, "branch order", 1)))
        object.__setattr__(self, "branches", tuple(br))

    @property
    def size(self) -> int:
        return (self.degree + 1 + sum(m for _, m in self.poles)
                + sum(J // 2 + 2 for _, _, J in self.branches))

    @classmethod
    def for_domain(cls, domain: Domain, degree: int, pole_order: Optional[int] = None,
                   branch_order: Optional[int] = None) -> "BasisSpec":
        """Default basis: monomials, poles at hole centres, branches at attached slit tips.

        Raises
        ------
        ConfigurationError
            For obstacles that are neither disks, points, nor segments with
            one end on the ambient boundary.
        """
        x0, x1, y0, y1 = domain.ambient.bbox()
        center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        scale = 0.5 * math.hypot(x1 - x0, y1 - y0)
        if isinstance(domain.ambient, AmbientDisk):
            center, scale = domain.ambient.center, domain.ambient.radius
        M = pole_order if pole_order is not None else max(degree // 2, 1)
        J = branch_order if branch_order is not None else degree
        poles, branches = [], []
        tol = 1e-9 * domain.diameter
        for ob in domain.obstacles:
            if isinstance(ob, PointCloud):
                continue  # removable for square-integrable holomorphic functions
            if isinstance(ob, Disk):
                if float(domain.ambient.boundary_distance(np.array([ob.center]))[0]) > ob.radius + tol:
                    poles.append((ob.center, M))
                continue
            if isinstance(ob, Segment):
                da = float(domain.ambient.boundary_distance(np.array([ob.a]))[0])
                db = float(domain.ambient.boundary_distance(np.array([ob.b]))[0])
                if db <= tol < da:
                    branches.append((ob.a, ob.b - ob.a, J))
                    continue
                if da <= tol < db:
                    branches.append((ob.b, ob.a - ob.b, J))
                    continue
            raise ConfigurationError(
                f"no default basis for obstacle {type(ob).__name__}; pass an explicit BasisSpec")
        return cls(degree, center, scale, tuple(poles), tuple(branches))


def _branch_s(z, tip, direction, scale):
    """``sqrt((z - tip)/(direction scale))`` with argument in [0, 2 pi)."""
    w = (np.asarray(z) - tip) / (direction * scale)
    th = np.mod(np.angle(w), 2 * np.pi)
    return np.sqrt(np.abs(w)) * np.exp(0.5j * th)


def _chains(spec: BasisSpec):
    """Krylov chains as (seed, seed', multiplier, multiplier', length) callables."""
    c, R = spec.center, spec.scale
    out = [(lambda z: np.ones_like(z), lambda z: np.zeros_like(z),
            lambda z: (z - c) / R, lambda z: np.full_like(z, 1.0 / R), spec.degree + 1)]
    for p, M in spec.poles:
        out.append((lambda z, p=p: R / (z - p), lambda z, p=p: -R / (z - p) ** 2,
                    lambda z, p=p: R / (z - p), lambda z, p=p: -R / (z - p) ** 2, M))
    for tip, d, J in spec.branches:
        def seed(z, tip=tip, d=d):
            return 1.0 / _branch_s(z, tip, d, R)

        def dseed(z, tip=tip, d=d):
            s = _branch_s(z, tip, d, R)
            return -0.5 / s ** 3 / (d * R)

        out.append((seed, dseed, lambda z, tip=tip, d=d: (z - tip) / (d * R),
                    lambda z, d=d: np.full_like(z, 1.0 / (d * R)), J // 2 + 2))
    return out


@dataclass(frozen=True, eq=False)
class Quadrature:
    points: np.ndarray
    weights: np.ndarray
    interior_cells: int
    h: float


def domain_quadrature(domain: Domain, h: float, subsample: int = _SUBSAMPLE) -> Quadrature:
    """Cell-midpoint quadrature; cells meeting the boundary are supersampled."""
    gm = grid_mask(domain, h)
    C = gm.centers()
    inner = gm.mask
    pts = [C[inner].ravel()]
    wts = [np.full(int(inner.sum()), h * h)]
    near = ~inner
    cand = C[near]
    # cells within one spacing of the ambient region
    amb = domain.ambient
    keep = amb.inside(cand, -h) | (amb.boundary_distance(cand) <= h)
    cand = cand[keep]
    off = (np.arange(subsample) + 0.5) / subsample - 0.5
    sub = (off[:, None] + 1j * off[None, :]).ravel() * h
    for start in range(0, cand.size, 4096):
        P = (cand[start:start + 4096, None] + sub[None, :]).ravel()
        ok = domain.contains(P)
        pts.append(P[ok])
        wts.append(np.full(int(ok.sum()), (h / subsample) ** 2))
    return Quadrature(np.concatenate(pts), np.concatenate(wts), int(inner.sum()), h)


class BergmanModel:
    """Orthonormal basis of a Bergman space truncation.

    Attributes
    ----------
    domain : Domain
    spec : BasisSpec
    quadrature : Quadrature
    steps : list
        Recurrence record: ``(chain, source, coefficients, norm)`` per kept vector.
    condition : float
        Ratio of largest to smallest pre-normalization norm of the kept
        vectors relative to their unorthogonalized size (a conditioning proxy).
    dropped : int
        Basis vectors dropped as numerically dependent.
    """

    def __init__(self, domain: Domain, spec: BasisSpec, quadrature: Quadrature):
        self.domain = domain
        self.spec = spec
        self.quadrature = quadrature
        self._chains = _chains(spec)
        self._build()

    def _build(self):
        Z = self.quadrature.points
        sw = np.sqrt(self.quadrature.weights)
        Q = np.empty((Z.size, self.spec.size), dtype=complex)
        steps = []
        ratios = []
        dropped = 0
        k = 0
        for ci, (seed, _, mult, _, length) in enumerate(self._chains):
            src = None
            for step in range(length):
                if step == 0:
                    v = seed(Z) * sw
                else:
                    v = mult(Z) * Q[:, src]
                before = np.linalg.norm(v)
                coef = np.zeros(k, dtype=complex)
                for _ in range(2):
                    if k:
                        cpart = Q[:, :k].conj().T @ v
                        v = v - Q[:, :k] @ cpart
                        coef += cpart
                nv = np.linalg.norm(v)
                if not np.isfinite(nv) or nv <= _DROP_TOL ** 0.5 * before or nv == 0:
                    dropped += length - step
                    break
                Q[:, k] = v / nv
                steps.append((ci, step, src, coef, nv))
                ratios.append(nv / before)
                src = k
                k += 1
        self.steps = steps
        self.n_basis = k
        self.dropped = dropped
        self.condition = float(1.0 / min(ratios)) if ratios else math.inf
        self._Qnodes = None

    def basis_values(self, z, derivative: bool = False):
        """Orthonormal functions (and optionally derivatives) at points ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        V = np.empty((z.size, self.n_basis), dtype=complex)
        D = np.empty_like(V) if derivative else None
        for k, (ci, step, src, coef, nv) in enumerate(self.steps):
            seed, dseed, mult, dmult, _ = self._chains[ci]
            if step == 0:
                v = seed(z)
                dv = dseed(z) if derivative else None
            else:
                v = mult(z) * V[:, src]
                dv = dmult(z) * V[:, src] + mult(z) * D[:, src] if derivative else None
            if k:
                v = v - V[:, :k] @ coef
                if derivative:
                    dv = dv - D[:, :k] @ coef
            V[:, k] = v / nv
            if derivative:
                D[:, k] = dv / nv
        return (V, D) if derivative else V

    def kernel(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.size)
        for s in range(0, z.size, 2048):
            V = self.basis_values(z[s:s + 2048])
            out[s:s + 2048] = np.sum(np.abs(V) ** 2, axis=1)
        return out

    def metric_squared_analytic(self, z):
        """``d^2/dz dzbar log K`` from basis derivatives."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.size)
        for s in range(0, z.size, 2048):
            V, D = self.basis_values(z[s:s + 2048], derivative=True)
            K = np.sum(np.abs(V) ** 2, axis=1)
            Kd = np.sum(np.abs(D) ** 2, axis=1)
            cross = np.sum(D * V.conj(), axis=1)
            out[s:s + 2048] = (Kd * K - np.abs(cross) ** 2) / K ** 2
        return out

    def gram_diagonal(self, functions):
        """Quadrature norms ``sum w |f|^2`` of given functions (diagnostics)."""
        Z = self.quadrature.points
        w = self.quadrature.weights
        return np.array([float(np.sum(w * np.abs(f(Z)) ** 2)) for f in functions])


def build_bergman_model(domain: Domain, spec: Optional[BasisSpec] = None, h: Optional[float] = None,
                        *, degree: int = 40) -> BergmanModel:
    """Build a Bergman model on a cell quadrature of spacing ``h``.

    Raises
    ------
    ConfigurationError
        If the quadrature has fewer than 10**4 interior cells.
    """
    if spec is None:
        spec = BasisSpec.for_domain(domain, degree)
    h = domain.diameter / 256 if h is None else check_positive(h, "quadrature spacing")
    quad = domain_quadrature(domain, h)
    if quad.interior_cells < 10_000:
        raise ConfigurationError(f"quadrature has {quad.interior_cells} interior cells; need at least 10^4")
    return BergmanModel(domain, spec, quad)


def _check_interior(domain, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(domain.contains(z)):
        raise DomainError("kernel evaluation needs interior points")
    return z


def kernel_diag(model, z):
    """Diagonal Bergman kernel ``K(z)`` (scalar in, scalar out)."""
    scalar = np.ndim(z) == 0
    zz = _check_interior(model.domain, z)
    out = model.kernel(zz)
    return float(out[0]) if scalar else out


def bergman_metric(model, z, *, step: Optional[float] = None, method: str = "fd"):
    """Bergman metric density ``b(z)`` with ``b**2 = d^2/dz dzbar log K``.

    ``method="fd"`` uses the five-point Laplacian of ``log K`` with step
    ``min(1e-2 * diameter, delta / 20)``; ``"analytic"`` differentiates the
    basis (or uses the closed form for conformal models).
    """
    scalar = np.ndim(z) == 0
    zz = _check_interior(model.domain, z)
    delta = boundary_distance(model.domain, zz)
    if method == "analytic":
        b2 = model.metric_squared_analytic(zz)
    elif method == "fd":
        hm = np.minimum(1e-2 * model.domain.diameter, delta / 20) if step is None else np.full(zz.shape, step)
        if np.any(4 * hm > delta):
            raise PreconditionError("metric step needs 4 steps of clearance from the boundary")
        L0 = np.log(model.kernel(zz))
        acc = -4 * L0
        for dz in (1, -1, 1j, -1j):
            acc = acc + np.log(model.kernel(zz + dz * hm))
        b2 = 0.25 * acc / hm ** 2
    else:
        raise ConfigurationError(f"unknown metric method {method!r}")
    b = np.sqrt(np.maximum(b2, 0.0))
    return float(b[0]) if scalar else b


def _axis_with(lo, hi, h, focus, h_focus, ratio, fixed):
    """Graded axis with nodes exactly at the fixed coordinates."""
    from .grid import _graded_axis

    xs = _graded_axis(lo, hi, h, [focus], h_focus, ratio, True)
    xs = list(xs)
    for f in fixed:
        k = int(np.argmin(np.abs(np.asarray(xs) - f)))
        if abs(xs[k] - f) > 1e-14 * max(1.0, abs(f)):
            if k not in (0, len(xs) - 1) and abs(xs[k] - focus) > 0:
                xs[k] = f
            else:
                xs.append(f)
    return np.unique(np.asarray(xs))


def bergman_distance(model, z0, z, *, h: Optional[float] = None, h_focus: Optional[float] = None,
                     ratio: float = 1.1, connectivity: int = 8, metric_method: str = "analytic"):
    """Geodesic distance of the metric ``b |dz|`` by Dijkstra on a graded grid graph.

    Edge weights use Simpson's rule ``len (b_p + 4 b_mid + b_q) / 6``.
    Edges leaving the domain are removed.  The grid has nodes exactly at
    ``z0`` and ``z`` and is refined toward whichever of the two is closer
    to the boundary.  The graph and the Dijkstra source depend only on the
    unordered pair, so the result is exactly symmetric.

    Raises
    ------
    PreconditionError
        If the two points are not connected in the grid graph.
    """
    dom = model.domain
    z0, z = as_point(z0), as_point(z)
    _check_interior(dom, np.array([z0, z]))
    x0, x1, y0, y1 = dom.ambient.bbox()
    h = dom.diameter / 64 if h is None else h
    ends = sorted([z0, z], key=lambda p: (float(boundary_distance(dom, np.array([p]))[0]), p.real, p.imag))
    focus, other = ends
    dz = float(boundary_distance(dom, np.array([focus]))[0])
    h_focus = min(dz / 8, h) if h_focus is None else h_focus
    fixed_x, fixed_y = sorted([z0.real, z.real]), sorted([z0.imag, z.imag])
    xs = _axis_with(x0, x1, h, focus.real, h_focus, ratio, fixed_x)
    ys = _axis_with(y0, y1, h, focus.imag, h_focus, ratio, fixed_y)
    Z = xs[:, None] + 1j * ys[None, :]
    nx, ny = Z.shape
    inside = dom.contains(Z)
    idx = np.arange(nx * ny).reshape(nx, ny)
    moves = [(1, 0), (0, 1), (1, 1), (1, -1)]
    if connectivity == 16:
        moves += [(2, 1), (1, 2), (2, -1), (1, -2)]
    elif connectivity != 8:
        raise ConfigurationError("connectivity must be 8 or 16")
    P_all, Q_all = [], []
    for di, dj in moves:
        i0, i1 = max(0, -di), nx - max(0, di)
        j0, j1 = max(0, -dj), ny - max(0, dj)
        p = idx[i0:i1, j0:j1].ravel()
        q = idx[i0 + di:i1 + di, j0 + dj:j1 + dj].ravel()
        P_all.append(p)
        Q_all.append(q)
    p = np.concatenate(P_all)
    q = np.concatenate(Q_all)
    Zf, inf = Z.ravel(), inside.ravel()
    ok = inf[p] & inf[q]
    p, q = p[ok], q[ok]
    a, b = Zf[p], Zf[q]
    mid = 0.5 * (a + b)
    ok = dom.contains(mid)
    d = b - a
    for ob in dom.obstacles:
        if ob.polar:
            continue
        lo, _ = ob.edge_hits(a, d)
        ok &= ~(np.isfinite(lo) & (lo >= 0) & (lo <= 1))
    p, q, a, b, mid = p[ok], q[ok], a[ok], b[ok], mid[ok]
    used = np.unique(np.concatenate([p, q]))
    bn = np.zeros(Zf.size)
    bn[used] = bergman_metric(model, Zf[used], method=metric_method)
    bm = bergman_metric(model, mid, method=metric_method)
    w = np.abs(b - a) * (bn[p] + 4 * bm + bn[q]) / 6
    G = sparse.coo_matrix((w, (p, q)), shape=(Zf.size, Zf.size)).tocsr()
    i0 = int(np.argmin(np.abs(Zf - focus)))
    i1 = int(np.argmin(np.abs(Zf - other)))
    dist = csgraph.dijkstra(G, directed=False, indices=i0)
    out = float(dist[i1])
    if not math.isfinite(out):
        raise PreconditionError("points are not connected in the geodesic grid graph")
    return out


# ---------------------------------------------------------------------------
# Closed-form conformal models.


@dataclass(frozen=True)
class RiemannMap:
    """Conformal map onto the unit disk with its derivative."""

    name: str
    domain: Domain
    fn: callable = field(compare=False)
    deriv: callable = field(compare=False)


def disk_map(center=0j, radius: float = 1.0) -> RiemannMap:
    c = as_point(center)
    dom = Domain(AmbientDisk(c, radius), (), c)
    return RiemannMap("disk", dom, lambda z: (np.asarray(z) - c) / radius,
                      lambda z: np.full(np.shape(z), 1.0 / radius, dtype=complex))


def slit_disk_map(base_point=-0.5) -> RiemannMap:
    """Unit disk minus the segment [0, 1] onto the unit disk.

    ``s = sqrt(z)`` (argument in [0, 2 pi)) maps onto the upper half-disk,
    ``u = (1 + s)/(1 - s)`` onto the first quadrant, ``v = u**2`` onto the
    upper half-plane and ``(v - i)/(v + i)`` onto the disk.
    """
    from .geometry import slit_disk

    def parts(z):
        z = np.asarray(z, dtype=complex)
        th = np.mod(np.angle(z), 2 * np.pi)
        s = np.sqrt(np.abs(z)) * np.exp(0.5j * th)
        u = (1 + s) / (1 - s)
        v = u * u
        return s, u, v

    def fn(z):
        _, _, v = parts(z)
        return (v - 1j) / (v + 1j)

    def deriv(z):
        s, u, v = parts(z)
        return (2j / (v + 1j) ** 2) * (2 * u) * (2 / (1 - s) ** 2) * (1 / (2 * s))

    return RiemannMap("slit_disk", slit_disk(base_point), fn, deriv)


class ConformalBergmanKernel:
    """Bergman kernel, metric and distance through a closed-form Riemann map.

    ``K = |F'|^2 / (pi (1 - |F|^2)^2)``, ``b = sqrt(2) |F'| / (1 - |F|^2)`` and
    ``d_B(z0, z) = sqrt(2) artanh |(F(z) - F(z0)) / (1 - conj(F(z0)) F(z))|``.
    """

    def __init__(self, riemann_map: RiemannMap):
        self.map = riemann_map
        self.domain = riemann_map.domain

    def kernel(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        F = self.map.fn(z)
        return np.abs(self.map.deriv(z)) ** 2 / (np.pi * (1 - np.abs(F) ** 2) ** 2)

    def metric_squared_analytic(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        F = self.map.fn(z)
        return 2 * np.abs(self.map.deriv(z)) ** 2 / (1 - np.abs(F) ** 2) ** 2

    def distance(self, z0, z):
        a = self.map.fn(np.atleast_1d(np.asarray(z0, dtype=complex)))
        b = self.map.fn(np.atleast_1d(np.asarray(z, dtype=complex)))
        rho = np.abs((b - a) / (1 - np.conj(a) * b))
        out = math.sqrt(2) * np.arctanh(rho)
        return float(out[0]) if out.size == 1 else out


# ---------------------------------------------------------------------------
# Lower-bound checks.


def check_sc_bound(model, samples):
    """Minimum over samples of ``16 pi K(z) delta(z)**2``.

    Raises
    ------
    PreconditionError
        If the domain has a hole.
    """
    if model.domain.has_holes():
        raise PreconditionError("the kernel lower bound needs a simply connected domain")
    z = _check_interior(model.domain, as_points(samples))
    d = boundary_distance(model.domain, z)
    ratio = 16 * math.pi * model.kernel(z) * d ** 2
    return float(ratio.min()), ratio


def green_to_kernel_bound(model, z, c: float = 1.0, grid=None):
    """``K(z)`` times the area of the sublevel set ``{g(., z) <= -c}``.

    The area counts grid cells (dual cell areas of nodes) where the grid
    Green function is at most ``-c``.

    Returns
    -------
    product, area : float
    """
    from .potential import green_function

    z = as_point(z)
    check_positive(c, "sublevel constant")
    g = green_function(model.domain, z, grid)
    vals = g.values
    area = float(np.sum(np.where(np.isfinite(vals) & (vals <= -c), g.grid.cell_areas(), 0.0)))
    return float(model.kernel(np.array([z]))[0]) * area, area


def zwonek_bound(model, z, alpha: float):
    """``K(z)`` and ``(alpha delta)^-2 / (-log cap(B(z, alpha delta) minus domain))``.

    Raises
    ------
    PreconditionError
        If ``alpha delta(z) > 1/2``.
    """
    from .capacity import log_capacity

    z = as_point(z)
    d = float(boundary_distance(model.domain, np.array([z]))[0])
    rad = alpha * d
    if rad > 0.5:
        raise PreconditionError(f"alpha * delta = {rad:.3g} exceeds 1/2")
    lc = log_capacity(disk_trace(model.domain, z, rad, normalize=False), 256).log_cap
    rhs = 0.0 if lc == -math.inf else rad ** -2 / (-lc)
    return float(model.kernel(np.array([z]))[0]), rhs


@dataclass(frozen=True)
class CapConditionReport:
    """Per-sample capacity hypothesis flags and scaled kernel values."""

    points: np.ndarray
    delta: np.ndarray
    log_cap: np.ndarray
    hypothesis: np.ndarray
    scaled_kernel: np.ndarray

    @property
    def constant(self) -> float:
        """Smallest ``K delta^2`` among hypothesis-passing samples."""
        sel = self.hypothesis
        return float(self.scaled_kernel[sel].min()) if sel.any() else math.nan


def cap_condition_kernel_check(model, alpha: float, eps: float, samples) -> CapConditionReport:
    """Test ``cap(B(z, alpha delta) minus domain) >= eps delta`` and report ``K delta^2``."""
    from .capacity import log_capacity

    if not alpha > 1:
        raise ConfigurationError("alpha must exceed 1")
    z = _check_interior(model.domain, as_points(samples))
    d = boundary_distance(model.domain, z)
    lc = np.array([log_capacity(disk_trace(model.domain, zz, alpha * dd, normalize=False), 128).log_cap
                   for zz, dd in zip(z, d)])
    hyp = lc >= np.log(eps * d)
    return CapConditionReport(z, d, lc, hyp, model.kernel(z) * d ** 2)


class BergmanKernel(BaseEstimator):
    """Estimator that fits a :class:`BergmanModel` to a domain.

    Parameters
    ----------
    degree : int
    pole_order, branch_order : int, optional
    h : float, optional
        Quadrature spacing (defaults to diameter / 256).

    Attributes
    ----------
    model_ : BergmanModel
    n_basis_ : int
    """

    def __init__(self, degree: int = 40, pole_order=None, branch_order=None, h=None):
        self.degree = degree
        self.pole_order = pole_order
        self.branch_order = branch_order
        self.h = h

    def fit(self, domain: Domain, y=None):
        spec = BasisSpec.for_domain(domain, self.degree, self.pole_order, self.branch_order)
        self.model_ = build_bergman_model(domain, spec, self.h)
        self.n_basis_ = self.model_.n_basis
        return self

    def kernel(self, z):
        check_is_fitted(self, "model_")
        return kernel_diag(self.model_, z)

    def metric(self, z, method: str = "fd"):
        check_is_fitted(self, "model_")
        return bergman_metric(self.model_, z, method=method)

    def distance(self, z0, z, **kwargs):
        check_is_fitted(self, "model_")
        return bergman_distance(self.model_, z0, z, **kwargs)
