"""Capacity densities, Wiener and Zwonek sums, decay fits and distance growth.

Capacities of boundary traces at scale ``t = L * lam**n`` are always computed
on the renormalized set ``(K_t(a) - a) / t`` and compared in log space, so
scales far below floating-point range (as in the Carleson-Totik family) are
handled exactly and results are invariant under a global rescaling of the
domain together with the reference length ``L``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_point, as_points, check_int, check_open_unit, check_positive
from .capacity import log_capacity
from .exceptions import ConfigurationError, PreconditionError
from .geometry import (
    Domain, annulus_trace, boundary_distance, boundary_trace, sample_boundary,
)
from .grid import GridSpec

__all__ = [
    "DensityProfile", "DecayFit", "WeakStrongDensity", "ChainResult", "DistanceFit",
    "scaled_trace_log_capacity", "wiener_sum", "zwonek_sum", "density_profile",
    "density_gamma_profile", "weak_strong_density", "fit_decay", "fit_green_decay",
    "approach_samples", "chain_lower_bound", "distance_growth_check",
    "green_band_inclusion", "holder_modulus_constant",
    "DecayRegressor", "CapacityDensity",
]

_CAP_POINTS = 96


@functools.lru_cache(maxsize=65536)
def _scaled_log_cap(domain: Domain, a: complex, log2_t: float, n_points: int) -> float:
    K = boundary_trace(domain, a, log2_t=log2_t, normalize=True)
    return log_capacity(K, n_points).log_cap


def scaled_trace_log_capacity(domain: Domain, a, n: int, lam: float, reference_length: float = 1.0,
                              n_points: int = _CAP_POINTS) -> float:
    """``log cap((K_t(a) - a) / t)`` for ``t = reference_length * lam**n``."""
    log2_t = math.log2(reference_length) + n * math.log2(lam)
    return _scaled_log_cap(domain, as_point(a), log2_t, n_points)


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Qualifying scales and density sequence at one boundary point.

    Attributes
    ----------
    a : complex
    eps, lam : float
    gamma : float or None
        ``None`` for the counting density; otherwise the harmonic-sum
        density with threshold ``eps * lam**(gamma n)``.
    n_max : int
    qualifies : ndarray of bool
        Entry ``n - 1`` flags scale ``n``.
    log_caps : ndarray
        Scale-normalized log capacities per scale.
    density : ndarray
        ``d_n`` for ``n = 1..n_max`` (NaN for ``n = 1`` in the harmonic form).
    """

    a: complex
    eps: float
    lam: float
    gamma: Optional[float]
    n_max: int
    qualifies: np.ndarray
    log_caps: np.ndarray
    density: np.ndarray

    @property
    def qualifying_set(self):
        return {int(n) for n in np.flatnonzero(self.qualifies) + 1}

    @property
    def estimate(self) -> float:
        """Minimum of ``d_n`` over the tail window ``[n_max/2, n_max]``."""
        return _tail_min(self.density)

    def rows(self):
        """CSV rows ``(a_re, a_im, n, qualifies, log_cap_scaled, d_n)``."""
        return [(self.a.real, self.a.imag, n + 1, int(self.qualifies[n]), self.log_caps[n], self.density[n])
                for n in range(self.n_max)]


def _tail_min(d: np.ndarray) -> float:
    n_max = d.size
    lo = max(n_max // 2, 2)
    tail = d[lo - 1:]
    tail = tail[np.isfinite(tail)]
    return float(tail.min()) if tail.size else math.nan


def _counting_density(q: np.ndarray) -> np.ndarray:
    n = np.arange(1, q.size + 1)
    return np.cumsum(q) / n


def _harmonic_density(q: np.ndarray) -> np.ndarray:
    n = np.arange(1, q.size + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.cumsum(q / n) / np.log(n)
    d[0] = np.nan
    return d


def _profile(domain, a, eps, lam, n_max, gamma, reference_length, n_points):
    a = as_point(a)
    check_positive(eps, "epsilon")
    check_open_unit(lam, "lambda")
    n_max = check_int(n_max, "n_max", 1)
    boundary_trace(domain, a, reference_length)  # boundary membership check
    g = 1.0 if gamma is None else float(gamma)
    logs = np.array([scaled_trace_log_capacity(domain, a, n, lam, reference_length, n_points)
                     for n in range(1, n_max + 1)])
    n = np.arange(1, n_max + 1)
    threshold = math.log(eps) + (g - 1.0) * n * math.log(lam)
    q = logs >= threshold
    dens = _counting_density(q) if gamma is None else _harmonic_density(q)
    return DensityProfile(a, float(eps), float(lam), None if gamma is None else g, n_max, q, logs, dens)


def density_profile(domain: Domain, a, eps: float = 2.0 ** -12, lam: float = 0.5, n_max: int = 24, *,
                    reference_length: float = 1.0, n_points: int = _CAP_POINTS) -> DensityProfile:
    """Scales ``n`` with ``cap(K_{lam^n}(a)) >= eps lam^n`` and the counting density."""
    return _profile(domain, a, eps, lam, n_max, None, reference_length, n_points)


def density_gamma_profile(domain: Domain, a, eps: float, lam: float, gamma: float, n_max: int = 24, *,
                          reference_length: float = 1.0, n_points: int = _CAP_POINTS) -> DensityProfile:
    """Scales with ``cap(K_{lam^n}(a)) >= eps lam^(gamma n)``; harmonic-sum density."""
    if not float(gamma) >= 1.0:
        raise ConfigurationError("gamma must be at least 1")
    return _profile(domain, a, eps, lam, n_max, gamma, reference_length, n_points)


@dataclass(frozen=True, eq=False)
class WeakStrongDensity:
    """Weak (infimum of counts) and strong (intersection) density estimates."""

    weak: float
    strong: float
    weak_sequence: np.ndarray
    strong_sequence: np.ndarray
    profiles: tuple


def weak_strong_density(domain: Domain, samples=None, eps: float = 2.0 ** -12, lam: float = 0.5,
                        n_max: int = 24, gamma: Optional[float] = None, *, n_samples: int = 64,
                        reference_length: float = 1.0, n_points: int = _CAP_POINTS) -> WeakStrongDensity:
    """Density estimates over a finite boundary sample.

    The weak sequence uses ``min_a |N_a cap [1, n]|`` per ``n``; the strong
    sequence counts the scales qualifying at every sampled point.

    Raises
    ------
    ConfigurationError
        If the sample is empty.
    """
    pts = sample_boundary(domain, n_samples) if samples is None else as_points(samples)
    if pts.size == 0:
        raise ConfigurationError("boundary sample is empty")
    profiles = tuple(_profile(domain, a, eps, lam, n_max, gamma, reference_length, n_points) for a in pts)
    Q = np.array([p.qualifies for p in profiles])
    n = np.arange(1, n_max + 1)
    if gamma is None:
        weak = np.min(np.cumsum(Q, axis=1), axis=0) / n
        strong = _counting_density(np.all(Q, axis=0))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            weak = np.min(np.cumsum(Q / n, axis=1), axis=0) / np.log(n)
        weak[0] = np.nan
        strong = _harmonic_density(np.all(Q, axis=0))
    return WeakStrongDensity(_tail_min(weak), _tail_min(strong), weak, strong, profiles)


def _annulus_log_cap(domain, center, k, n_points):
    K = annulus_trace(domain, center, 2.0 ** -k, 2.0 ** (-k - 1), normalize=True)
    if not K.primitives or K.is_polar:
        return -math.inf
    return log_capacity(K, n_points).log_cap - k * math.log(2)


def wiener_sum(domain: Domain, n: int, a=0j, *, n_points: int = _CAP_POINTS) -> np.ndarray:
    """Partial sums of ``k / log(1/cap(A_k minus domain))``, ``k = 1..n``.

    ``A_k`` is the closed annulus ``2^-(k+1) <= |z - a| <= 2^-k``; polar
    intersections contribute zero.
    """
    n = check_int(n, "truncation", 1)
    a = as_point(a)
    boundary_trace(domain, a, 0.5)
    terms = []
    for k in range(1, n + 1):
        lc = _annulus_log_cap(domain, a, k, n_points)
        terms.append(0.0 if lc == -math.inf else k / (-lc))
    return np.cumsum(terms)


def zwonek_sum(domain: Domain, z, n: int, *, n_points: int = _CAP_POINTS, terms: bool = False):
    """``sum_{k=1..n} 2^(2k) / log(1/cap(A_k(z) minus domain))`` with annuli about ``z``."""
    n = check_int(n, "truncation", 1)
    z = as_point(z)
    out = []
    for k in range(1, n + 1):
        lc = _annulus_log_cap(domain, z, k, n_points)
        out.append(0.0 if lc == -math.inf else 4.0 ** k / (-lc))
    out = np.asarray(out)
    return (float(out.sum()), out) if terms else float(out.sum())


# ---------------------------------------------------------------------------
# Decay fits.


@dataclass(frozen=True, eq=False)
class DecayFit:
    """Least-squares decay law fit.

    ``model="power"`` fits ``log v = beta log delta + c``;
    ``model="logpower"`` fits ``log v = -beta log(-log delta) + c``.
    """

    model: str
    exponent: float
    intercept: float
    r2: float
    delta_range: tuple
    deltas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def _design(model, deltas):
    if model == "power":
        return np.log(deltas)
    if model == "logpower":
        if np.any(deltas >= 1):
            raise ConfigurationError("logpower fits need delta < 1")
        return -np.log(-np.log(deltas))
    raise ConfigurationError(f"unknown decay model {model!r}")


def fit_decay(deltas, values, model: str = "power", *, min_samples: int = 12,
              min_decades: float = 2.0) -> DecayFit:
    """Fit a decay law to positive values sampled at boundary distances."""
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    if deltas.size < min_samples:
        raise PreconditionError(f"decay fit needs at least {min_samples} samples")
    if np.any(deltas <= 0) or np.any(values <= 0):
        raise PreconditionError("decay fit needs positive distances and values")
    if math.log10(deltas.max() / deltas.min()) < min_decades - 1e-9:
        raise PreconditionError(f"samples must span at least {min_decades} decades of delta")
    x = _design(model, deltas)
    y = np.log(values)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = float(1 - np.sum(resid ** 2) / ss) if ss > 0 else 1.0
    return DecayFit(model, float(coef[0]), float(coef[1]), r2, (float(deltas.min()), float(deltas.max())),
                    deltas, values)


def approach_samples(a, direction, deltas) -> np.ndarray:
    """Points ``a + delta * direction`` (unit direction into the domain)."""
    a = as_point(a)
    d = as_point(direction)
    return a + np.asarray(deltas, dtype=float) * d / abs(d)


def fit_green_decay(domain: Domain, z0, samples, model: str = "power", grid=None) -> DecayFit:
    """Fit ``-g(z, z0)`` against ``delta(z)`` at the sample points."""
    from .potential import green_function

    pts = as_points(samples)
    g = green_function(domain, z0, grid)
    vals = -g(pts)
    deltas = boundary_distance(domain, pts)
    return fit_decay(deltas, vals, model)


class DecayRegressor(RegressorMixin, BaseEstimator):
    """Scikit-learn style regressor for decay laws ``v ~ delta**beta`` or ``(-log delta)**-beta``.

    ``X`` is a column of boundary distances, ``y`` the positive values.
    """

    def __init__(self, model: str = "power", min_samples: int = 12, min_decades: float = 2.0):
        self.model = model
        self.min_samples = min_samples
        self.min_decades = min_decades

    def fit(self, X, y):
        X = np.asarray(X, dtype=float).reshape(-1)
        self.fit_ = fit_decay(X, y, self.model, min_samples=self.min_samples, min_decades=self.min_decades)
        self.exponent_ = self.fit_.exponent
        self.intercept_ = self.fit_.intercept
        self.r2_ = self.fit_.r2
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        x = _design(self.model, np.asarray(X, dtype=float).reshape(-1))
        return np.exp(self.exponent_ * x + self.intercept_)

    def score(self, X, y, sample_weight=None):
        """Coefficient of determination in log coordinates."""
        y = np.log(np.asarray(y, dtype=float))
        p = np.log(self.predict(X))
        ss = np.sum((y - y.mean()) ** 2)
        return float(1 - np.sum((y - p) ** 2) / ss) if ss > 0 else 1.0


# ---------------------------------------------------------------------------
# Chains and distance growth.


@dataclass(frozen=True, eq=False)
class ChainResult:
    """Chain of confirmed scales between ``z0`` and ``z``."""

    length: int
    scales: tuple
    points: tuple
    candidate_scales: tuple


def _point_at_delta(domain, z0: complex, z: complex, target: float):
    """Point on the segment from ``z0`` to ``z`` with boundary distance ``target``.

    The crossing closest to ``z`` is refined by bisection; the result is
    rounded to 12 decimals so collinear segments give the same point.
    """
    s = np.linspace(0.0, 1.0, 2049)
    d = boundary_distance(domain, z0 + s * (z - z0)) - target
    cross = np.flatnonzero(d[:-1] * d[1:] <= 0)
    if cross.size == 0:
        return None
    i = cross[-1]
    a, b = s[i], s[i + 1]
    for _ in range(80):
        m = 0.5 * (a + b)
        dm = float(boundary_distance(domain, np.array([z0 + m * (z - z0)]))[0]) - target
        if dm * d[i] > 0:
            a = m
        else:
            b = m
    p = z0 + 0.5 * (a + b) * (z - z0)
    return complex(round(p.real, 12), round(p.imag, 12))


def _pole_grid(domain: Domain, grid, w: complex, c: float):
    """Grid refined at ``w`` so that ``{g(., w) <= -c}`` spans several cells.

    The sublevel set has radius of order ``delta(w) exp(-c)``; the focus
    spacing is an eighth of that.
    """
    from .potential import default_grid

    base = default_grid(domain, grid)
    dw = float(boundary_distance(domain, np.array([w]))[0])
    h_focus = min(base.h_focus or base.h, dw * math.exp(-c) / 8.0)
    return GridSpec(base.h, base.focus + (w,), h_focus, base.ratio)


@functools.lru_cache(maxsize=1024)
def _sublevel_in_band(domain: Domain, w: complex, c: float, band_lo: float, band_hi: float, grid) -> bool:
    from .potential import green_function

    g = green_function(domain, w, _pole_grid(domain, grid, w, c))
    vals = g.values
    sub = np.isfinite(vals) & (vals <= -c)
    Z = g.grid.nodes()[sub]
    if Z.size == 0:
        return False
    d = boundary_distance(domain, Z)
    return bool(np.all((d > band_lo) & (d < band_hi)))


# Positions inside the band [lam^(k - 1/3), lam^(k - 1/2)] (as exponent
# offsets) at which the sublevel inclusion is tested.
_BAND_OFFSETS = (1.0 / 3.0, 5.0 / 12.0, 0.5)


def chain_lower_bound(domain: Domain, z0, z, c: float, lam: float = 0.5, qualifying=None,
                      grid=None) -> ChainResult:
    """Count scales whose Green sublevel sets stay inside their distance band.

    For each scale ``k`` with ``lam^(k - 1/2) <= delta(z0)`` and
    ``lam^k >= delta(z)`` (restricted to ``qualifying`` when given), points
    ``w`` on the segment from ``z0`` to ``z`` are placed at both ends and the
    middle of the band ``lam^(k - 1/3) <= delta(w) <= lam^(k - 1/2)``.  The
    scale is confirmed when, for each of them, every grid node with
    ``g(., w) <= -c`` has boundary distance in ``(lam^k, lam^(k - 1))``.
    Sublevel sets of confirmed scales two apart are disjoint.

    ``grid`` is the base grid; each Green solve adds a focus at its pole.
    """
    z0, z = as_point(z0), as_point(z)
    check_open_unit(lam, "lambda")
    check_positive(c, "sublevel constant")
    if z == z0:
        return ChainResult(0, (), (), ())
    d0 = float(boundary_distance(domain, np.array([z0]))[0])
    dz = float(boundary_distance(domain, np.array([z]))[0])
    L = math.log(lam)
    k_lo = max(1, math.ceil(math.log(d0) / L + 0.5 - 1e-12))
    k_hi = math.floor(math.log(dz) / L + 1e-12)
    cands = [k for k in range(k_lo, k_hi + 1) if qualifying is None or k in qualifying]
    from .potential import default_grid

    spec = default_grid(domain, grid)
    scales, points = [], []
    for k in cands:
        ws = [_point_at_delta(domain, z0, z, lam ** (k - off)) for off in _BAND_OFFSETS]
        if any(w is None for w in ws):
            continue
        if all(_sublevel_in_band(domain, w, float(c), lam ** k, lam ** (k - 1), spec) for w in ws):
            scales.append(k)
            points.append(ws[1])
    return ChainResult(len(scales), tuple(scales), tuple(points), tuple(cands))


_LAWS = {
    "log": lambda d: np.abs(np.log(d)),
    "log_over_loglog": lambda d: np.abs(np.log(d)) / np.log(np.abs(np.log(d))),
    "logloglog": lambda d: np.log(np.log(np.abs(np.log(d)))),
    "loglog": lambda d: np.log(np.abs(np.log(d))),
}


@dataclass(frozen=True, eq=False)
class DistanceFit:
    """Linear regression of Bergman distance against a growth law of ``delta``."""

    law: str
    slope: float
    intercept: float
    r2: float
    deltas: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)


def distance_growth_check(model, z0, samples, law: str = "log", *, route: str = "auto",
                          **distance_kwargs) -> DistanceFit:
    """Regress ``d_B(z0, z)`` on ``law(delta(z))`` over the samples.

    Laws: ``"log"`` (``|log delta|``), ``"log_over_loglog"``,
    ``"loglog"`` and ``"logloglog"``.  ``route="grid"`` always uses the
    grid geodesic; ``"closed"`` requires a closed-form ``distance`` method;
    ``"auto"`` uses the closed form when the model has one.
    """
    from .bergman import bergman_distance

    if law not in _LAWS:
        raise ConfigurationError(f"unknown growth law {law!r}")
    if route not in ("auto", "closed", "grid"):
        raise ConfigurationError(f"unknown distance route {route!r}")
    if route == "closed" and not hasattr(model, "distance"):
        raise ConfigurationError("model has no closed-form distance")
    pts = as_points(samples)
    deltas = boundary_distance(model.domain, pts)
    if route != "grid" and hasattr(model, "distance"):
        dist = np.array([model.distance(z0, p) for p in pts])
    else:
        dist = np.array([bergman_distance(model, z0, p, **distance_kwargs) for p in pts])
    x = _LAWS[law](deltas)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, dist, rcond=None)
    resid = dist - A @ coef
    ss = np.sum((dist - dist.mean()) ** 2)
    r2 = float(1 - np.sum(resid ** 2) / ss) if ss > 0 else 1.0
    return DistanceFit(law, float(coef[0]), float(coef[1]), r2, deltas, dist)


def green_band_inclusion(domain: Domain, E, w, beta: float, c: float, grid=None, *, phi=None) -> bool:
    """Whether ``{g(., w) <= -1}`` lies in the band of the capacity potential of ``E``.

    The band is ``c^-1 phi(w)^((1 + beta)/beta) < phi < c phi(w)^(beta/(1 + beta))``.
    """
    from .potential import capacity_potential, green_function

    w = as_point(w)
    check_positive(beta, "beta")
    check_positive(c, "band constant")
    if phi is None:
        phi = capacity_potential(E, domain, grid)
    pw = float(phi(w))
    if not pw > 0:
        raise PreconditionError("capacity potential vanishes at w")
    lo = pw ** ((1 + beta) / beta) / c
    hi = c * pw ** (beta / (1 + beta))
    g = green_function(domain, w, grid)
    vals = g.values
    sub = np.isfinite(vals) & (vals <= -1.0)
    pv = phi(g.grid.nodes()[sub])
    return bool(np.all((pv > lo) & (pv < hi)))


def holder_modulus_constant(phi, w, points, beta: float) -> float:
    """Smallest ``c0`` with ``|phi(z) - phi(w)| <= c0 (-log|z - w|)^-beta`` on the points.

    Points must satisfy ``|z - w| < 1``.
    """
    w = as_point(w)
    pts = as_points(points)
    r = np.abs(pts - w)
    if np.any(r >= 1) or np.any(r == 0):
        raise PreconditionError("Hölder pairs need 0 < |z - w| < 1")
    diff = np.abs(phi(pts) - phi(w))
    return float(np.max(diff * (-np.log(r)) ** beta))


class CapacityDensity(BaseEstimator):
    """Weak and strong capacity density of a domain's boundary.

    Attributes
    ----------
    weak_, strong_ : float
        Tail-window estimates.
    result_ : WeakStrongDensity
    """

    def __init__(self, eps: float = 2.0 ** -12, lam: float = 0.5, n_max: int = 24, gamma=None,
                 n_samples: int = 64, reference_length: float = 1.0):
        self.eps = eps
        self.lam = lam
        self.n_max = n_max
        self.gamma = gamma
        self.n_samples = n_samples
        self.reference_length = reference_length

    def fit(self, domain: Domain, y=None, samples=None):
        self.result_ = weak_strong_density(domain, samples, self.eps, self.lam, self.n_max, self.gamma,
                                           n_samples=self.n_samples, reference_length=self.reference_length)
        self.weak_ = self.result_.weak
        self.strong_ = self.result_.strong
        return self
