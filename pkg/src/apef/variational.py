"""Elastic energy, its L^2 gradient and the sixth-order H^-1 flow velocity.

All normal fields are handled through their scalar normal component: for a
normal field ``Y = y nu`` one has ``nabla_s Y = (d_s y) nu``, so

* L^2 gradient   ``G = (k_ss + k^3/2 - lambda k) nu =: g nu``
* flow velocity  ``V = nabla_s^2 G = (g_ss) nu``
* dissipation    ``D = int |nabla_s G|^2 ds = int g_s^2 ds``
"""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .curve import NormalField
from .errors import ConfigurationError
from .spectral import CHOP_TOL


@dataclass(frozen=True)
class EnergyReport:
    bending: float
    length_term: float
    total: float
    lam: float

    @property
    def length(self):
        return self.length_term / self.lam if self.lam else float("nan")


def _check_lambda(lam):
    if not lam >= 0.0:
        raise ConfigurationError(f"lambda must be >= 0, got {lam}")


def energy(curve, lam=0.0):
    """Bending energy ``1/2 int |kappa|^2 ds`` and penalized energy ``E + lam L``."""
    _check_lambda(lam)
    geo = curve.geometry
    bending = 0.5 * curve.integrate(geo.k**2)
    length_term = lam * geo.length
    return EnergyReport(bending=bending, length_term=length_term, total=bending + length_term, lam=lam)


def _cube_dealiased(k):
    n = k.shape[0]
    m = 2 * n
    c = np.fft.rfft(k)
    c[-1] = 0.0
    padded = np.zeros(m // 2 + 1, dtype=complex)
    padded[: n // 2 + 1] = c * (m / n)
    kp = np.fft.irfft(padded, n=m)
    c3 = np.fft.rfft(kp**3)[: n // 2 + 1] * (n / m)
    c3[-1] = 0.0
    return np.fft.irfft(c3, n=n)


@dataclass(frozen=True)
class FlowTerms:
    """Scalar normal components of the variational quantities at the nodes."""

    k: np.ndarray
    g: np.ndarray  # <G, nu>
    g_s: np.ndarray  # d_s g, i.e. <nabla_s G, nu>
    v: np.ndarray  # <V, nu>
    metric: np.ndarray
    length: float

    @property
    def dissipation(self):
        return float(np.mean(self.g_s**2 * self.metric))

    @property
    def residual(self):
        return math.sqrt(self.dissipation)

    @property
    def c1(self):
        return float(np.mean(self.g * self.metric)) / self.length


def flow_terms(curve, lam, dealias=False):
    """Compute k, g, d_s g and the normal velocity in one pass.

    Curvature and gradient are stripped of rounding-floor Fourier modes
    before being differentiated (see :func:`apef.spectral.coefficients`).
    """
    _check_lambda(lam)
    geo = curve.geometry
    n, m = curve.n, geo.metric
    k = geo.k
    ck = spectral.coefficients(k, CHOP_TOL)
    k = spectral.from_coefficients(ck, n)
    k_s = spectral.from_coefficients(ck, n, 1) / m
    k_ss = spectral.differentiate(k_s) / m
    cubic = _cube_dealiased(k) if dealias else k**3
    g = k_ss + 0.5 * cubic - lam * k
    cg = spectral.coefficients(g, CHOP_TOL)
    g_s = spectral.from_coefficients(cg, n, 1) / m
    v = spectral.differentiate(g_s) / m
    return FlowTerms(k=k, g=spectral.from_coefficients(cg, n), g_s=g_s, v=v, metric=m, length=geo.length)


def l2_gradient(curve, lam=0.0, dealias=False):
    """``nabla_s^2 kappa + 1/2 |kappa|^2 kappa - lam kappa`` as a NormalField."""
    return NormalField.from_scalar(flow_terms(curve, lam, dealias).g, curve)


def flow_velocity(curve, lam=0.0, dealias=False):
    """Normal velocity ``nabla_s^2 (nabla_s^2 kappa + 1/2|kappa|^2 kappa - lam kappa)``."""
    return NormalField.from_scalar(flow_terms(curve, lam, dealias).v, curve)


def dissipation(curve, lam=0.0, dealias=False):
    """``|| nabla_s G ||^2_{L^2(ds)}``: the rate at which the flow lowers E_lam."""
    return flow_terms(curve, lam, dealias).dissipation


def directional_derivative(curve, lam, direction, eps=1e-5):
    """Central difference ``(E(gamma + eps phi) - E(gamma - eps phi)) / (2 eps)``.

    `direction` is an (N, 2) array or a NormalField on `curve`.
    """
    from .curve import DiscreteCurve

    phi = direction.values if isinstance(direction, NormalField) else np.asarray(direction, dtype=float)
    plus = energy(DiscreteCurve(curve.points + eps * phi), lam).total
    minus = energy(DiscreteCurve(curve.points - eps * phi), lam).total
    return (plus - minus) / (2.0 * eps)
