"""Logarithmic, Green and Dirichlet capacities and equilibrium measures.

The logarithmic energy is discretized with piecewise-constant densities on
boundary cells.  Matrix entries between distant cells use cell midpoints;
pairs of nearby cells are averaged with tensor Gauss-Legendre quadrature,
and the self term is the exact cell average ``log s - 3/2`` of a straight
cell of length ``s``.  The maximal energy over the probability simplex is
found by an active-set KKT solve with a projected-gradient fallback.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int
from .exceptions import ConfigurationError, NumericError, PolarSetError, PreconditionError
from .geometry import CompactSet, Domain, boundary_distance

__all__ = [
    "Discretization", "DiscreteMeasure", "CapacityReport", "DirichletCapacity",
    "discretize_compact", "log_kernel_matrix", "maximize_energy",
    "equilibrium_measure", "log_capacity", "transfinite_diameter",
    "green_energy", "green_capacity", "dirichlet_capacity",
    "EquilibriumMeasure", "FeketePoints",
]

_GAUSS_ORDER = 16
# Half-integer so equispaced cells never sit exactly on the near-field threshold.
_NEAR_FACTOR = 3.5


@dataclass(frozen=True, eq=False)
class Discretization:
    """Boundary cells of a compact set.

    Attributes
    ----------
    centers : ndarray of complex
        Cell midpoints (on the curve).
    lengths : ndarray
        Cell arclengths (local spacings).
    nodes : ndarray, shape (n, q)
        Gauss points on each cell.
    """

    centers: np.ndarray
    lengths: np.ndarray
    nodes: np.ndarray
    gauss_weights: np.ndarray

    def __len__(self):
        return self.centers.size

    def affine_image(self, shift: complex, scale: float) -> "Discretization":
        """Cells of ``shift + scale * K``."""
        return Discretization(shift + scale * self.centers, scale * self.lengths,
                              shift + scale * self.nodes, self.gauss_weights)


_SINGLE_CELL_LENGTH = 1e-10


def discretize_compact(K: CompactSet, n: int, min_per_curve: int = 4) -> Discretization:
    """Split the curves carrying the equilibrium measure of ``K`` into cells.

    Parameters
    ----------
    K : CompactSet
    n : int
        Target number of cells (at least 8); curves receive cells in
        proportion to arclength with at least ``min_per_curve`` each.

    Raises
    ------
    PolarSetError
        If ``K`` has no curve of positive length.
    """
    n = check_int(n, "n", 8)
    curves = [c for c in K.curves() if c.length > 0]
    if not curves or K.is_polar:
        raise PolarSetError("set is polar (no curve of positive length)")
    lengths = np.array([c.length for c in curves])
    total = lengths.sum()
    counts = np.maximum(min_per_curve, np.ceil(n * lengths / total - 1e-9).astype(int))
    if len(curves) == 1:
        counts[:] = n
    # Sub-cells of very short curves would have centres indistinguishable in
    # floating point; such curves are represented by a single cell.
    counts[lengths < _SINGLE_CELL_LENGTH] = 1
    g, gw = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    g = 0.5 * (g + 1)
    gw = 0.5 * gw
    centers, cell_len, nodes = [], [], []
    for c, m, L in zip(curves, counts, lengths):
        u0 = np.arange(m) / m
        du = 1.0 / m
        centers.append(c.at(u0 + 0.5 * du))
        cell_len.append(np.full(m, L / m))
        nodes.append(c.at(u0[:, None] + g[None, :] * du))
    return Discretization(np.concatenate(centers), np.concatenate(cell_len), np.vstack(nodes), gw)


def log_kernel_matrix(disc: Discretization) -> np.ndarray:
    """Cell-averaged matrix of ``log|x - y|``."""
    x = disc.centers
    s = disc.lengths
    with np.errstate(divide="ignore"):
        M = np.log(np.abs(x[:, None] - x[None, :]))
    tree = cKDTree(np.column_stack([x.real, x.imag]))
    pairs = tree.query_pairs(_NEAR_FACTOR * float(s.max()), output_type="ndarray")
    if pairs.size:
        i, j = pairs[:, 0], pairs[:, 1]
        D = np.abs(x[i] - x[j])
        near = D < _NEAR_FACTOR * np.maximum(s[i], s[j])
        i, j = i[near], j[near]
        w = disc.gauss_weights
        for start in range(0, i.size, 4096):
            ii, jj = i[start:start + 4096], j[start:start + 4096]
            P = disc.nodes[ii]
            Q = disc.nodes[jj]
            with np.errstate(divide="ignore"):
                L = np.log(np.abs(P[:, :, None] - Q[:, None, :]))
            val = np.einsum("a,pab,b->p", w, L, w)
            M[ii, jj] = val
            M[jj, ii] = val
    np.fill_diagonal(M, np.log(s) - 1.5)
    return M


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _kkt_residual(M, w):
    g = M @ w
    I = float(w @ g)
    pos = w > 0
    r_active = np.max(np.abs(g[pos] - I)) if pos.any() else 0.0
    r_inactive = np.max(np.maximum(g[~pos] - I, 0.0)) if (~pos).any() else 0.0
    return max(r_active, r_inactive), I


def maximize_energy(M: np.ndarray, tol: float = 1e-8, max_iter: int = 5000):
    """Maximize ``w @ M @ w`` over the probability simplex.

    ``M`` must be negative definite on zero-sum vectors (true for the
    logarithmic and Green kernels), so the problem is concave and its KKT
    points are global maxima.

    Returns
    -------
    weights : ndarray
    value : float
    residual : float
        KKT residual of the returned weights.
    """
    M = 0.5 * (M + M.T)
    n = M.shape[0]
    active = np.ones(n, dtype=bool)
    w = np.zeros(n)
    for _ in range(n):
        idx = np.flatnonzero(active)
        try:
            y = linalg.solve(M[np.ix_(idx, idx)], np.ones(idx.size), assume_a="sym")
        except (linalg.LinAlgError, ValueError):
            break
        tot = y.sum()
        if not np.isfinite(tot) or tot == 0:
            break
        wa = y / tot
        if np.all(wa >= 0):
            w = np.zeros(n)
            w[idx] = wa
            g = M @ w
            I = float(w @ g)
            viol = (~active) & (g > I + tol)
            if not viol.any():
                res, I = _kkt_residual(M, w)
                if res <= tol:
                    return w, I, res
                break
            active |= viol
        else:
            drop = idx[wa < 0]
            active[drop] = False
            if not active.any():
                break
    # projected gradient ascent with Armijo backtracking
    w = np.full(n, 1.0 / n)
    f = float(w @ M @ w)
    step = 1.0 / max(np.abs(M).sum(axis=1).max(), 1e-300)
    for _ in range(max_iter):
        res, f = _kkt_residual(M, w)
        if res <= tol:
            return w, f, res
        g = 2 * M @ w
        t = step * 4
        while True:
            wn = _project_simplex(w + t * g)
            fn = float(wn @ M @ wn)
            if fn >= f + 1e-4 * g @ (wn - w) or t < 1e-16:
                break
            t *= 0.5
        w = wn
    res, f = _kkt_residual(M, w)
    raise NumericError("energy maximization did not reach the KKT tolerance", res)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure on cell midpoints.

    Attributes
    ----------
    support : ndarray of complex
    weights : ndarray
        Non-negative, summing to one.
    spacings : ndarray
        Local cell lengths.
    cells : Discretization, optional
        Cell geometry; when present, potentials near the support are
        cell-averaged instead of point evaluations.
    energy : float
        Logarithmic energy ``sum w_i w_j log|x_i - x_j|`` (cell-averaged).
    """

    support: np.ndarray
    weights: np.ndarray
    spacings: np.ndarray
    cells: Optional[Discretization] = None
    energy: float = float("nan")

    def __post_init__(self):
        if not (self.support.shape == self.weights.shape == self.spacings.shape):
            raise ConfigurationError("support, weights and spacings must have equal length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigurationError("weights must be non-negative and sum to one")

    @classmethod
    def point_mass(cls, z: complex, spacing: float = 1e-3) -> "DiscreteMeasure":
        return cls(np.array([complex(z)]), np.array([1.0]), np.array([spacing]))

    def log_potential(self, z) -> np.ndarray:
        """``sum_j w_j * mean_{cell j} log|z - y|`` at points ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, dtype=float)
        flat = z.ravel()
        res = np.empty(flat.size)
        x, w = self.support, self.weights
        for start in range(0, flat.size, 8192):
            zz = flat[start:start + 8192]
            with np.errstate(divide="ignore"):
                L = np.log(np.abs(zz[:, None] - x[None, :]))
            if self.cells is not None:
                # coincident midpoints are replaced by the cell average below
                L[np.isneginf(L)] = 0.0
            res[start:start + 8192] = L @ w
        if self.cells is not None:
            s = self.spacings
            tree = cKDTree(np.column_stack([flat.real, flat.imag]))
            gw = self.cells.gauss_weights
            for j in np.flatnonzero(w > 0):
                near = tree.query_ball_point([x[j].real, x[j].imag], _NEAR_FACTOR * s[j])
                if not near:
                    continue
                near = np.asarray(near)
                with np.errstate(divide="ignore"):
                    avg = np.log(np.abs(flat[near, None] - self.cells.nodes[j][None, :])) @ gw
                    pt = np.log(np.abs(flat[near] - x[j]))
                pt[np.isneginf(pt)] = 0.0
                res[near] += w[j] * (avg - pt)
        out.ravel()[:] = res
        return out.reshape(z.shape)

    def log_potential_gradient(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        flat = z.ravel()
        res = np.empty(flat.size, dtype=complex)
        for start in range(0, flat.size, 8192):
            d = flat[start:start + 8192, None] - self.support[None, :]
            res[start:start + 8192] = (d / np.abs(d) ** 2) @ self.weights
        return res.reshape(z.shape)


@dataclass(frozen=True)
class CapacityReport:
    """Logarithmic capacity estimate.

    ``cap = 0`` is represented by ``log_cap = -inf``.
    """

    log_cap: float
    cap: float
    method: str
    point_count: int
    err_estimate: float

    @classmethod
    def polar(cls, method: str = "energy") -> "CapacityReport":
        return cls(-math.inf, 0.0, method, 0, 0.0)


def _normalize(K: CompactSet):
    """Shift/scale so ``K`` has bounding radius in ``(1/2, 1]`` about the origin.

    Sets whose bounding box centre is within one bounding radius of the
    origin are only scaled, so structure at tiny scales near the origin
    (traces normalized about a boundary point) is not lost to rounding.
    The scale is a power of two, so ``K`` and ``2**k K`` normalize to
    bit-identical sets and their capacities differ by exactly ``2**k``.
    """
    c = K.center
    r = K.bounding_radius
    if r <= 0:
        raise PolarSetError("set is a single point")
    if abs(c) <= r:
        x0, x1, y0, y1 = K.bbox()
        r = max(abs(complex(x, y)) for x in (x0, x1) for y in (y0, y1))
        c = 0j
    log2_r = math.ceil(math.log2(r))
    return K.affine(c, log2_r), c, 2.0 ** log2_r


def _energy_solve(K_norm: CompactSet, n: int):
    disc = discretize_compact(K_norm, n)
    M = log_kernel_matrix(disc)
    w, I, res = maximize_energy(M)
    return disc, M, w, I, res


def equilibrium_measure(K: CompactSet, n: int = 256) -> DiscreteMeasure:
    """Discrete equilibrium measure of ``K`` on ``n`` boundary cells.

    Raises
    ------
    PolarSetError
        If ``K`` is polar.
    """
    if K.is_polar:
        raise PolarSetError("polar sets carry no equilibrium measure")
    Kn, c, r = _normalize(K)
    disc, M, w, I, res = _energy_solve(Kn, n)
    cells = disc.affine_image(c, r)
    return DiscreteMeasure(cells.centers, w, cells.lengths, cells, I + math.log(r))


def log_capacity(K: CompactSet, n: int = 256, method: str = "energy") -> CapacityReport:
    """Logarithmic capacity of ``K``.

    Computed at normalized scale and rescaled with ``cap(sK) = s cap(K)``.
    ``method="fekete"`` uses transfinite diameters at ``n, n/2, n/4``
    extrapolated in ``(log n)/n`` and ``1/n``.  The error estimate is the
    change from the half-resolution computation.
    """
    if method not in ("energy", "fekete"):
        raise ConfigurationError(f"unknown capacity method {method!r}")
    if not K.primitives or K.is_polar:
        return CapacityReport.polar(method)
    Kn, c, r = _normalize(K)
    logr = math.log(r)
    if method == "energy":
        _, _, _, I, _ = _energy_solve(Kn, n)
        _, _, _, I2, _ = _energy_solve(Kn, max(n // 2, 8))
        lc = I + logr
        return CapacityReport(lc, math.exp(lc), "energy", n, abs(I - I2))
    ns = np.array([n, n // 2, n // 4])
    logs = np.array([math.log(_fekete(Kn, int(m))[1]) for m in ns])
    A = np.column_stack([np.ones(3), np.log(ns) / ns, 1.0 / ns])
    coef = np.linalg.solve(A, logs)
    A2 = A[:2, :2]
    coef2 = np.linalg.solve(A2, logs[:2])
    lc = coef[0] + logr
    return CapacityReport(lc, math.exp(lc), "fekete", n, abs(coef[0] - coef2[0]))


def _fekete(K_norm: CompactSet, n: int, oversample: int = 8, max_sweeps: int = 50):
    """Greedy exchange on candidate points; returns (points, d_n)."""
    n = check_int(n, "n", 2)
    disc = discretize_compact(K_norm, max(oversample * n, 1024))
    cand = disc.centers
    m = cand.size
    sel = np.round(np.linspace(0, m, n, endpoint=False)).astype(int)
    selected = np.zeros(m, dtype=bool)
    selected[sel] = True

    def logrow(k):
        d = np.abs(cand - cand[k])
        with np.errstate(divide="ignore"):
            out = np.log(d)
        out[d == 0] = 0.0
        return out

    score = np.zeros(m)
    for k in sel:
        score += logrow(k)
    for _ in range(max_sweeps):
        improved = False
        for pos in range(n):
            s = sel[pos]
            row = logrow(s)
            gain = score - row - score[s]
            gain[selected] = -np.inf
            c = int(np.argmax(gain))
            if gain[c] > 1e-12 * max(1.0, abs(score[s])):
                score += logrow(c) - row
                selected[s] = False
                selected[c] = True
                sel[pos] = c
                improved = True
        if not improved:
            break
    pts = cand[sel]
    T = 0.5 * score[sel].sum()
    return pts, math.exp(2 * T / (n * (n - 1)))


def transfinite_diameter(K: CompactSet, n: int = 64) -> float:
    """Fekete-exchange estimate ``d_n`` of the transfinite diameter.

    Returns the raw ``n``-point value (no extrapolation); ``0`` for polar sets.
    """
    if not K.primitives or K.is_polar:
        return 0.0
    Kn, c, r = _normalize(K)
    return r * _fekete(Kn, n)[1]


# ---------------------------------------------------------------------------
# Estimators.


class EquilibriumMeasure(BaseEstimator):
    """Estimator wrapper around :func:`equilibrium_measure`.

    Parameters
    ----------
    n_points : int
        Number of boundary cells.

    Attributes
    ----------
    support_, weights_, spacings_ : ndarray
    log_capacity_, capacity_ : float
    measure_ : DiscreteMeasure
    """

    def __init__(self, n_points: int = 256):
        self.n_points = n_points

    def fit(self, K: CompactSet, y=None):
        mu = equilibrium_measure(K, self.n_points)
        self.measure_ = mu
        self.support_ = mu.support
        self.weights_ = mu.weights
        self.spacings_ = mu.spacings
        self.log_capacity_ = mu.energy
        self.capacity_ = math.exp(mu.energy)
        return self

    def potential(self, z):
        """Logarithmic potential of the fitted measure."""
        check_is_fitted(self, "measure_")
        return self.measure_.log_potential(z)


class FeketePoints(BaseEstimator):
    """Approximate Fekete points by greedy exchange.

    Attributes
    ----------
    points_ : ndarray of complex
    transfinite_diameter_ : float
    """

    def __init__(self, n_points: int = 64, oversample: int = 8, max_sweeps: int = 50):
        self.n_points = n_points
        self.oversample = oversample
        self.max_sweeps = max_sweeps

    def fit(self, K: CompactSet, y=None):
        if K.is_polar:
            raise PolarSetError("polar sets have no Fekete points")
        Kn, c, r = _normalize(K)
        pts, d = _fekete(Kn, self.n_points, self.oversample, self.max_sweeps)
        self.points_ = c + r * pts
        self.transfinite_diameter_ = r * d
        return self


# ---------------------------------------------------------------------------
# Capacities relative to a domain.


def _check_clearance(K: CompactSet, domain: Domain, clearance: float):
    pts = [c.at(np.linspace(0, 1, 65)) for c in K.curves()]
    pts = np.concatenate(pts) if pts else np.zeros(0, complex)
    special = np.array([p for prim in K.primitives for p in prim.special_points()], dtype=complex)
    pts = np.concatenate([pts, special])
    if pts.size == 0:
        return
    if not np.all(domain.contains(pts)):
        raise PreconditionError("compact set is not contained in the domain")
    d = boundary_distance(domain, pts)
    if float(np.min(d)) < clearance:
        raise PreconditionError(f"compact set is {np.min(d):.3e} from the boundary; need {clearance:.3e}")


@dataclass(frozen=True, eq=False)
class GreenEnergyResult:
    log_green_capacity: float
    weights: np.ndarray
    cells: Discretization
    green_matrix: np.ndarray
    log_matrix: np.ndarray
    log_capacity: float
    diameter: float
    distance: float


def green_energy(K: CompactSet, domain: Domain, grid=None, n: int = 128) -> GreenEnergyResult:
    """Maximize the discrete Green energy on the cells of ``K``.

    The Green matrix is ``L + H`` with ``L`` the logarithmic matrix used by
    :func:`log_capacity` and ``H`` the grid regular part of the Green
    function between cell midpoints, so the bounds
    ``log cap - log R <= log cap_g <= log cap - log d`` hold exactly at the
    discrete level (``R`` the domain diameter, ``d = dist(K, boundary)``).
    """
    from .potential import compact_boundary_distance, default_grid, green_regular_matrix

    if K.is_polar:
        raise PolarSetError("polar sets have Green capacity 0")
    grid = default_grid(domain, grid)
    h = grid.h
    _check_clearance(K, domain, 4 * h)
    Kn, c, r = _normalize(K)
    disc_n = discretize_compact(Kn, n)
    Ln = log_kernel_matrix(disc_n)
    _, Il, _ = maximize_energy(Ln)
    cells = disc_n.affine_image(c, r)
    L = Ln + math.log(r)
    H = green_regular_matrix(domain, cells.centers, grid)
    G = L + 0.5 * (H + H.T)
    w, I, _ = maximize_energy(G)
    return GreenEnergyResult(I, w, cells, G, L, Il + math.log(r), domain.diameter,
                             compact_boundary_distance(K, domain))


def green_capacity(K: CompactSet, domain: Domain, grid=None, n: int = 128) -> float:
    """Green capacity ``exp(I(mu))`` of ``K`` relative to ``domain``.

    Parameters
    ----------
    grid : GridSpec or float, optional
        Solver grid (a float is a uniform spacing).  Defaults to
        ``diameter / 256``.
    """
    if not K.primitives or K.is_polar:
        return 0.0
    return math.exp(green_energy(K, domain, grid, n).log_green_capacity)


@dataclass(frozen=True)
class DirichletCapacity:
    """Dirichlet capacity by two routes.

    ``value`` is the bridge route ``-2 pi / log cap_g``; ``energy`` is the
    discrete Dirichlet energy of the grid capacity potential.
    """

    value: float
    energy: float
    gap: float

    def __float__(self):
        return self.value


def dirichlet_capacity(K: CompactSet, domain: Domain, grid=None, n: int = 128) -> DirichletCapacity:
    """Dirichlet capacity ``C_d(K, domain)`` (bridge and energy routes)."""
    from .potential import capacity_potential

    if not K.primitives or K.is_polar:
        return DirichletCapacity(0.0, 0.0, 0.0)
    lg = math.log(green_capacity(K, domain, grid, n))
    bridge = -2 * math.pi / lg
    phi = capacity_potential(K, domain, grid)
    energy = phi.info["energy"]
    return DirichletCapacity(bridge, energy, abs(energy - bridge) / bridge)
