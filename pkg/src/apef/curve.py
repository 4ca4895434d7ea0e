"""Closed planar curves sampled on a uniform parameter grid.

Conventions
-----------
* Nodes ``points[j] = gamma(j / N)``; the endpoint is not duplicated.
* ``nu`` is the counter-clockwise quarter turn of the unit tangent, so a
  counter-clockwise circle of radius R has ``k = 1/R > 0`` and area
  ``pi R^2 > 0``.
* Integrals over the curve use the trapezoidal rule in x,
  ``int f ds = mean(f * metric)``.
"""

import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import spectral
from .errors import ConfigurationError, DegenerateCurve, UnresolvedTopology
from .spectral import CHOP_TOL, differentiate

EPS_REG = 1e-8
EPS_PERP = 1e-8
ROTATION_TOL = 0.01


def _rot90(v):
    return np.column_stack((-v[:, 1], v[:, 0]))


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """N samples of a closed curve gamma: S^1 -> R^2.

    Immutable; geometric quantities are computed once and cached
    (see :func:`geometry`).
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigurationError(f"points must have shape (N, 2), got {pts.shape}")
        spectral.check_nodes(pts.shape[0])
        if not np.all(np.isfinite(pts)):
            raise DegenerateCurve("curve has non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def x(self):
        return np.arange(self.n) / self.n

    def __len__(self):
        return self.n

    def translated(self, offset):
        return DiscreteCurve(self.points + np.asarray(offset, dtype=float))

    def transformed(self, matrix):
        """Apply a linear map ``p -> matrix @ p`` to every node."""
        return DiscreteCurve(self.points @ np.asarray(matrix, dtype=float).T)

    def scaled(self, factor):
        return DiscreteCurve(self.points * factor)

    @cached_property
    def geometry(self):
        return _compute_geometry(self)

    # Integration against the arclength measure.
    def integrate(self, f):
        f = np.asarray(f, dtype=float)
        m = self.geometry.metric
        if f.ndim == 1:
            return float(np.mean(f * m))
        return np.mean(f * m[:, None], axis=0)

    def inner(self, a, b):
        """L^2(ds) inner product of two scalar or vector fields."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        prod = a * b if a.ndim == 1 else _dot(a, b)
        return self.integrate(prod)

    def to_json(self, **metadata):
        obj = {"n": self.n, "points": self.points.tolist()}
        if metadata:
            obj["metadata"] = metadata
        return obj

    @classmethod
    def from_json(cls, obj):
        pts = np.asarray(obj["points"], dtype=float)
        if "n" in obj and int(obj["n"]) != pts.shape[0]:
            raise ConfigurationError(f"snapshot declares n={obj['n']} but holds {pts.shape[0]} points")
        curve = cls(pts)
        _ = curve.geometry  # validates regularity
        return curve


@dataclass(frozen=True, eq=False)
class NormalField:
    """Vector field along `base` that is normal to it at every node."""

    values: np.ndarray
    base: DiscreteCurve
    check: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.base.n, 2):
            raise ConfigurationError(f"field shape {vals.shape} does not match curve with {self.base.n} nodes")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.check:
            defect = self.tangential_defect()
            if defect > EPS_PERP:
                raise ValueError(f"field is not normal to the curve (tangential defect {defect:.3e})")

    @classmethod
    def from_scalar(cls, y, curve):
        y = np.asarray(y, dtype=float)
        return cls(y[:, None] * curve.geometry.normal, curve, check=False)

    @cached_property
    def scalar(self):
        """Normal component ``<Y, nu>``."""
        return _dot(self.values, self.base.geometry.normal)

    def tangential_defect(self):
        tang = np.abs(_dot(self.values, self.base.geometry.tangent)).max()
        scale = max(1.0, float(np.linalg.norm(self.values, axis=1).max()))
        return float(tang / scale)

    def l2_norm(self):
        return math.sqrt(max(self.base.inner(self.values, self.values), 0.0))

    def __add__(self, other):
        return NormalField.from_scalar(self.scalar + other.scalar, self.base)

    def __sub__(self, other):
        return NormalField.from_scalar(self.scalar - other.scalar, self.base)

    def __mul__(self, c):
        return NormalField.from_scalar(c * self.scalar, self.base)

    __rmul__ = __mul__

    def __neg__(self):
        return NormalField.from_scalar(-self.scalar, self.base)


@dataclass(frozen=True, eq=False)
class GeometricCache:
    """First-layer geometry of a curve at its nodes."""

    metric: np.ndarray  # |d gamma / dx|
    tangent: np.ndarray
    normal: np.ndarray
    kappa: NormalField
    k: np.ndarray
    d1: np.ndarray

    @property
    def length(self):
        return float(np.mean(self.metric))


def _compute_geometry(curve):
    n = curve.n
    coeffs = spectral.coefficients(curve.points, CHOP_TOL, skip_mean=True)
    d1 = spectral.from_coefficients(coeffs, n, 1)
    metric = np.linalg.norm(d1, axis=1)
    j = int(np.argmin(metric))
    if not metric[j] > EPS_REG:
        raise DegenerateCurve(f"curve is not immersed: |d gamma/dx| = {metric[j]:.3e} at node {j}", node=j)
    tangent = d1 / metric[:, None]
    normal = _rot90(tangent)
    d2 = spectral.from_coefficients(coeffs, n, 2)
    k = _dot(d2, normal) / metric**2
    for arr in (metric, tangent, normal, k, d1):
        arr.setflags(write=False)
    kappa = NormalField(k[:, None] * normal, curve, check=False)
    return GeometricCache(metric=metric, tangent=tangent, normal=normal, kappa=kappa, k=k, d1=d1)


def geometry(curve):
    """Metric, unit tangent, normal and curvature of `curve` (cached)."""
    return curve.geometry


def length(curve):
    return curve.geometry.length


def area(curve):
    """Signed enclosed area ``-1/2 int <gamma, nu> ds``.

    Evaluated in the algebraically identical form ``1/2 mean(gamma x gamma')``,
    which is exactly translation invariant on the grid.
    """
    pts = curve.points
    d1 = differentiate(pts, 1)
    return 0.5 * float(np.mean(pts[:, 0] * d1[:, 1] - pts[:, 1] * d1[:, 0]))


def total_curvature(curve):
    """``(1 / 2 pi) int k ds`` before rounding."""
    return curve.integrate(curve.geometry.k) / (2.0 * math.pi)


def rotation_index(curve):
    w = total_curvature(curve)
    omega = int(round(w))
    if abs(w - omega) > ROTATION_TOL:
        raise UnresolvedTopology(f"total curvature / 2pi = {w:.6f} is not close to an integer")
    return omega


def metric_flatness(curve):
    m = curve.geometry.metric
    return float(np.std(m) / np.mean(m))


def ds(y, curve, order=1):
    """Arclength derivative of a scalar or vector field, applied `order` times."""
    m = curve.geometry.metric
    out = np.asarray(y, dtype=float)
    for _ in range(order):
        d = differentiate(out, 1)
        out = d / m if d.ndim == 1 else d / m[:, None]
    return out


def arclength_derivative(field, curve, order=1):
    """``d_s^order`` of a field sampled at the nodes of `curve`.

    `field` may be a NormalField, an (N, 2) array or an (N,) array; an array
    of the same shape is returned (no projection).
    """
    vals = field.values if isinstance(field, NormalField) else field
    return ds(vals, curve, order)


def normal_projection(field, curve):
    """``P_perp phi = phi - <phi, d_s gamma> d_s gamma`` as a NormalField."""
    vals = field.values if isinstance(field, NormalField) else np.asarray(field, dtype=float)
    return NormalField.from_scalar(_dot(vals, curve.geometry.normal), curve)


def nabla_s(field, curve=None, order=1):
    """Normal arclength derivative ``P_perp d_s`` of a normal field.

    For ``Y = y nu`` this equals ``(d_s y) nu`` exactly (the tangential part
    of ``d_s nu`` is removed by the projection), which is how it is
    evaluated: the result is normal by construction and the discrete
    integration by parts ``int <nabla_s X, Y> ds = -int <X, nabla_s Y> ds``
    holds to rounding.
    """
    curve = field.base if curve is None else curve
    y = field.scalar if isinstance(field, NormalField) else _dot(field, curve.geometry.normal)
    return NormalField.from_scalar(ds(y, curve, order), curve)


def nabla_s_vector(field, curve=None):
    """``P_perp d_s`` evaluated literally on the vector samples (cross-check path)."""
    curve = field.base if curve is None else curve
    vals = field.values if isinstance(field, NormalField) else field
    return normal_projection(ds(vals, curve), curve)


# ---------------------------------------------------------------------------
# Reparametrization


@dataclass(frozen=True)
class ResampleInfo:
    tail_fraction: float
    under_resolved: bool
    metric_flatness: float


class UnderResolvedWarning(RuntimeWarning):
    pass


def _arclength_map(curve):
    """Normalized arclength sigma(x) = s(x)/L as trig data: (L, periodic part)."""
    m = curve.geometry.metric
    mean, periodic = spectral.antiderivative(m)
    return mean, periodic / mean


def resample_uniform(curve, m=None, *, full_output=False, tail_tol=1e-6):
    """Reparametrize `curve` by constant speed on `m` nodes (default: same N).

    The new nodes are ``gamma(y_j)`` with ``s(y_j) = L j / m``, evaluated by
    trigonometric interpolation; node 0 is kept fixed. If the spectral tail
    of the result holds more than `tail_tol` of the energy, an
    :class:`UnderResolvedWarning` is issued.
    """
    n = curve.n
    m = n if m is None else int(m)
    spectral.check_nodes(m)
    L, periodic = _arclength_map(curve)
    x = curve.x
    sigma_nodes = x + periodic
    target = np.arange(m) / m

    # initial guess by monotone linear interpolation of the inverse map
    xs = np.concatenate((x - 1.0, x, x + 1.0))
    ss = np.concatenate((sigma_nodes - 1.0, sigma_nodes, sigma_nodes + 1.0))
    y = np.interp(target, ss, xs)
    speed = curve.geometry.metric / L
    for _ in range(30):
        resid = y + spectral.trig_eval(periodic, y) - target
        dy = resid / spectral.trig_eval(speed, y)
        y = y - dy
        if np.abs(dy).max() < 1e-15:
            break
    new_pts = spectral.trig_eval(curve.points, y)
    out = DiscreteCurve(new_pts)
    tail = spectral.tail_fraction(new_pts - new_pts.mean(axis=0))
    info = ResampleInfo(tail_fraction=tail, under_resolved=tail > tail_tol, metric_flatness=metric_flatness(out))
    if info.under_resolved:
        warnings.warn(f"resampled curve may be under-resolved (tail energy fraction {tail:.2e})",
                      UnderResolvedWarning, stacklevel=2)
    if full_output:
        return out, info
    return out


def reparametrize(curve, diffeo):
    """Sample `curve` at ``diffeo(x_j)`` (an orientation-preserving map of S^1)."""
    y = np.asarray(diffeo(curve.x), dtype=float)
    return DiscreteCurve(spectral.trig_eval(curve.points, y))


# ---------------------------------------------------------------------------
# Self-intersection of the node polygon


def _orient(ax, ay, bx, by, cx, cy):
    return np.sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def _on_segment(ax, ay, bx, by, px, py):
    return ((np.minimum(ax, bx) <= px) & (px <= np.maximum(ax, bx))
            & (np.minimum(ay, by) <= py) & (py <= np.maximum(ay, by)))


def self_intersects(curve):
    """True iff two non-adjacent edges of the closed node polygon intersect.

    Uses the orientation predicate (signs of 2x2 determinants), including
    touching and collinear-overlap cases. Vectorized over all edge pairs
    after a bounding-box prefilter.
    """
    p = curve.points
    q = np.roll(p, -1, axis=0)
    n = len(p)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    lo = np.minimum(p, q)
    hi = np.maximum(p, q)
    overlap = np.all(lo[i] <= hi[j], axis=1) & np.all(lo[j] <= hi[i], axis=1)
    i, j = i[overlap], j[overlap]
    if len(i) == 0:
        return False

    ax, ay = p[i, 0], p[i, 1]
    bx, by = q[i, 0], q[i, 1]
    cx, cy = p[j, 0], p[j, 1]
    dx, dy = q[j, 0], q[j, 1]
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
        return True
    touch = ((o1 == 0) & _on_segment(ax, ay, bx, by, cx, cy)
             | (o2 == 0) & _on_segment(ax, ay, bx, by, dx, dy)
             | (o3 == 0) & _on_segment(cx, cy, dx, dy, ax, ay)
             | (o4 == 0) & _on_segment(cx, cy, dx, dy, bx, by))
    return bool(np.any(touch))


# ---------------------------------------------------------------------------
# Snapshot files


def save_snapshot(curve, path, **metadata):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(curve.to_json(**metadata), fh)


def load_snapshot(path):
    with open(path, encoding="utf-8") as fh:
        return DiscreteCurve.from_json(json.load(fh))
