"""The space H_gamma of zero-mean normal fields and its dual.

Everything goes through the scalar reduction ``nabla_s (y nu) = (d_s y) nu``:
a normal field ``Y = y nu`` is in H_gamma iff ``int y ds = 0``, its norm is
``||d_s y||_{L^2(ds)}``, and the weak problem ``-nabla_s^2 X = phi`` becomes
the periodic scalar problem ``-d_s^2 x = f`` with ``int x ds = 0``.

On the grid the weak form reads ``D^T diag(1/m) D x = m f`` (D the spectral
first-derivative matrix, m the metric), which is the same operator that
:func:`apef.curve.ds` applies twice. It is diagonal in Fourier space when
the curve has constant speed.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .curve import NormalField, ds
from .errors import InvalidRHS

MEAN_TOL = 1e-8
UNIFORM_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class HGammaElement:
    """A normal field with ``int <nu, Y> ds = 0``."""

    field: NormalField
    mean_defect: float

    def __post_init__(self):
        scale = 1.0 + self.field.l2_norm()
        if abs(self.mean_defect) > MEAN_TOL * scale:
            raise InvalidRHS(f"field has mean {self.mean_defect:.3e}; not in H_gamma")

    @classmethod
    def from_field(cls, field):
        return cls(field, field.base.integrate(field.scalar))

    @classmethod
    def from_scalar(cls, y, curve):
        return cls.from_field(NormalField.from_scalar(y, curve))

    @property
    def base(self):
        return self.field.base

    @property
    def scalar(self):
        return self.field.scalar

    @property
    def values(self):
        return self.field.values


def _as_field(obj, curve=None):
    if isinstance(obj, HGammaElement):
        return obj.field
    if isinstance(obj, NormalField):
        return obj
    return NormalField.from_scalar(obj, curve) if np.ndim(obj) == 1 else NormalField(obj, curve)


def project_to_hgamma(field, curve=None):
    """``Y - C nu`` with ``C = (1/L) int <nu, Y> ds``."""
    field = _as_field(field, curve)
    curve = field.base
    y = field.scalar
    c = curve.integrate(y) / curve.geometry.length
    return HGammaElement.from_scalar(y - c, curve)


def _solve_scalar(curve, f):
    n = curve.n
    m = curve.geometry.metric
    L = curve.geometry.length
    if np.std(m) <= UNIFORM_TOL * L:
        # constant speed: d_s = D / L is diagonal
        k = np.arange(n // 2 + 1)
        sym = (2.0 * math.pi * k / L) ** 2
        sym[0] = 1.0
        coeffs = np.fft.rfft(f) / sym
        coeffs[0] = 0.0
        coeffs[-1] = 0.0
        x = np.fft.irfft(coeffs, n=n)
    else:
        d = spectral.derivative_matrix(n)
        op = d.T @ (d / m[:, None])
        x = np.linalg.lstsq(op, m * f, rcond=None)[0]
    return x - np.sum(x * m) / np.sum(m)


def weak_solve(curve, phi):
    """Zero-mean X with ``-nabla_s^2 X = phi``.

    Parameters
    ----------
    curve : DiscreteCurve
    phi : HGammaElement or NormalField or array
        Right-hand side; must have zero mean against ds.

    Raises
    ------
    InvalidRHS
        If ``int <nu, phi> ds`` is not zero.
    """
    if not isinstance(phi, HGammaElement):
        phi = HGammaElement.from_field(_as_field(phi, curve))
    x = _solve_scalar(curve, phi.scalar)
    return HGammaElement.from_scalar(x, curve)


def laplacian(element, curve=None):
    """``-nabla_s^2 Y`` as a NormalField (the forward operator)."""
    field = _as_field(element, curve)
    return NormalField.from_scalar(-ds(field.scalar, field.base, 2), field.base)


def h_norm(y):
    """``||nabla_s Y||_{L^2(ds)}``."""
    field = _as_field(y)
    ys = ds(field.scalar, field.base)
    return math.sqrt(max(field.base.integrate(ys**2), 0.0))


def h_dual_norm(phi, curve=None):
    """``||phi||_{H_gamma^-1} = ||weak_solve(phi)||_{H_gamma}``."""
    field = _as_field(phi, curve)
    return h_norm(weak_solve(field.base, phi if isinstance(phi, HGammaElement) else field))


def interpolation_check(curve, phi):
    """``(||phi||^2_{L^2}, ||phi||_{H^-1} ||phi||_H)``; the first never exceeds the second."""
    field = _as_field(phi, curve)
    lhs = field.l2_norm() ** 2
    rhs = h_dual_norm(phi, curve) * h_norm(field)
    return lhs, rhs
