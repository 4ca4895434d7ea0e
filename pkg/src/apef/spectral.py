"""Fourier calculus for periodic samples on the unit parameter circle.

Samples are taken at ``x_j = j / N`` for ``j = 0, ..., N-1`` with ``N`` even.
Arrays are either 1-D (scalar fields) or ``(N, d)`` (vector fields); all
transforms act along axis 0.
"""

import math
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

MIN_NODES = 16

# Fourier coefficients below this fraction of the largest one are treated as
# rounding noise by `chop`.
CHOP_TOL = 1e-13


def check_nodes(n):
    if n < MIN_NODES or n % 2:
        raise ConfigurationError(f"node count must be even and >= {MIN_NODES}, got {n}")


@lru_cache(maxsize=32)
def _symbol(n, order):
    k = np.arange(n // 2 + 1)
    sym = (2j * np.pi * k) ** order
    if order % 2:
        sym[-1] = 0.0
    return sym


def _expand(sym, ndim):
    return sym if ndim == 1 else sym[:, None]


def _chop_coeffs(coeffs, tol, skip_mean):
    mag = np.abs(coeffs) if coeffs.ndim == 1 else np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=1))
    ref = mag[1:].max() if skip_mean else mag.max()
    if ref == 0.0:
        return coeffs
    small = mag < tol * ref
    if skip_mean:
        small[0] = False
    coeffs[small] = 0.0
    return coeffs


def coefficients(samples, chop_tol=None, skip_mean=False):
    """Real FFT of the samples, optionally with rounding-floor modes removed.

    High-order derivatives amplify rounding noise in the top modes by up to
    ``(pi N)^6``. With `chop_tol`, modes whose magnitude is below
    ``chop_tol`` times the largest one are zeroed before differentiating.
    Vector samples are chopped jointly so the operation commutes with
    rotations; `skip_mean` excludes mode 0 from the reference magnitude
    (translation invariance for positions).
    """
    f = np.asarray(samples, dtype=float)
    coeffs = np.fft.rfft(f, axis=0)
    if chop_tol:
        coeffs = _chop_coeffs(coeffs, chop_tol, skip_mean)
    return coeffs


def from_coefficients(coeffs, n, order=0):
    if order == 0:
        return np.fft.irfft(coeffs, n=n, axis=0)
    return np.fft.irfft(coeffs * _expand(_symbol(n, order), coeffs.ndim), n=n, axis=0)


def differentiate(samples, order=1, chop_tol=CHOP_TOL):
    """Spectral derivative of order `order` with respect to the parameter x.

    Exact for trigonometric polynomials of degree < N/2. For odd orders the
    Nyquist mode is dropped, which makes the first-derivative matrix real and
    skew-symmetric (discrete integration by parts holds exactly).

    Parameters
    ----------
    samples : array_like, shape (N,) or (N, d)
    order : int, >= 1
    chop_tol : float or None
        Rounding-floor threshold, see :func:`coefficients`; the mean is
        excluded from the reference magnitude. None disables it.

    Returns
    -------
    ndarray of the same shape.
    """
    f = np.asarray(samples, dtype=float)
    n = f.shape[0]
    check_nodes(n)
    if order < 1:
        raise ConfigurationError(f"derivative order must be >= 1, got {order}")
    return from_coefficients(coefficients(f, chop_tol, skip_mean=True), n, order)


def chop(samples, tol=CHOP_TOL, skip_mean=False):
    """Samples with rounding-floor Fourier modes removed (see :func:`coefficients`)."""
    f = np.asarray(samples, dtype=float)
    return from_coefficients(coefficients(f, tol, skip_mean), f.shape[0])


def tail_fraction(samples, frac=1.0 / 3.0):
    """Fraction of spectral energy (mode 0 excluded) in modes above ``frac * N/2``."""
    f = np.asarray(samples, dtype=float)
    coeffs = np.fft.rfft(f, axis=0)
    power = np.abs(coeffs) ** 2
    if f.ndim > 1:
        power = power.sum(axis=1)
    power = power[1:]
    total = power.sum()
    if total == 0.0:
        return 0.0
    cut = int(math.ceil(frac * (len(power))))
    return float(power[cut:].sum() / total)


def _taylor_eval(f, eps, max_terms=40):
    """Evaluate the trig interpolant at x_j + eps_j by Taylor expansion at the nodes."""
    out = f.copy()
    term_scale = np.abs(f).max() + 1e-300
    deriv = f
    n = f.shape[0]
    coeffs = np.fft.rfft(f, axis=0)
    fact = 1.0
    e = eps if f.ndim == 1 else eps[:, None]
    power = np.ones_like(e)
    for p in range(1, max_terms):
        deriv = np.fft.irfft(coeffs * _expand(_symbol(n, p), f.ndim), n=n, axis=0)
        fact *= p
        power = power * e
        term = power * deriv / fact
        out = out + term
        if np.abs(term).max() < 1e-17 * term_scale and p > 2:
            break
    return out


def trig_eval(samples, y):
    """Evaluate the trigonometric interpolant of `samples` at parameters `y`.

    The Nyquist mode enters symmetrically as ``cos(pi N y)``. When ``y`` is a
    small perturbation of the node grid the evaluation uses a spectral Taylor
    expansion (FFT cost); otherwise a direct sum over modes.
    """
    f = np.asarray(samples, dtype=float)
    y = np.asarray(y, dtype=float)
    n = f.shape[0]
    if y.shape == (n,):
        eps = y - np.arange(n) / n
        eps = eps - np.round(eps)
        if np.pi * n * np.abs(eps).max() < 0.5:
            return _taylor_eval(f, eps)
    coeffs = np.fft.rfft(f, axis=0) / n
    k = np.arange(n // 2 + 1)
    weights = np.full(k.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    phase = np.exp(2j * np.pi * np.outer(y, k))
    c = coeffs * _expand(weights, f.ndim)
    return np.real(phase @ c)


def antiderivative(samples):
    """Periodic part of the antiderivative, normalized to vanish at x = 0.

    Returns ``(mean, P)`` such that ``int_0^x f = mean * x + P(x)`` at the
    nodes, with P the trigonometric interpolant of the periodic remainder.
    """
    f = np.asarray(samples, dtype=float)
    n = f.shape[0]
    coeffs = np.fft.rfft(f)
    mean = coeffs[0].real / n
    k = np.arange(n // 2 + 1)
    integ = np.zeros_like(coeffs)
    integ[1:-1] = coeffs[1:-1] / (2j * np.pi * k[1:-1])
    p = np.fft.irfft(integ, n=n)
    return mean, p - p[0]


@lru_cache(maxsize=8)
def derivative_matrix(n):
    """Dense first-derivative matrix (real, skew-symmetric)."""
    check_nodes(n)
    mat = differentiate(np.eye(n), 1, chop_tol=None)
    mat = 0.5 * (mat - mat.T)
    mat.setflags(write=False)
    return mat
