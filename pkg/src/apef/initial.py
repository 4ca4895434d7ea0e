"""Library of initial curves.

Every generated curve is checked for regularity and for the expected
rotation index before it is handed out.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import DiscreteCurve, area, load_snapshot, resample_uniform, rotation_index
from .errors import ApefError, ConfigurationError, GenerationError

KINDS = ("circle", "ellipse", "gerono_eight", "asymmetric_eight", "fourier", "snapshot")

DEFAULTS = {
    "circle": {"radius": 1.0},
    "ellipse": {"a": 1.2, "b": 0.8},
    "gerono_eight": {"scale": 1.0},
    "asymmetric_eight": {"scale": 1.0, "shear": 0.4},
    "fourier": {"scale": 1.0},
    "snapshot": {},
}

# rotation index expected from each closed-form family
EXPECTED_ROTATION = {"circle": 1, "ellipse": 1, "gerono_eight": 0, "asymmetric_eight": 0}

MIN_ASYMMETRIC_AREA = 0.01

# e^{it} + b e^{-it} + a e^{3it} has area pi (1 - b^2 + 3 a^2); this choice
# gives a regular curve with rotation index 1 and zero area.
ZERO_AREA_COEFFICIENTS = [[1, 1.0, 0.0], [-1, math.sqrt(1.0 + 3 * 0.4**2), 0.0], [3, 0.4, 0.0]]


@dataclass(frozen=True)
class Perturbation:
    """Normal offset ``amplitude * cos(2 pi mode x + phase)``."""

    mode: int
    amplitude: float
    phase: float = 0.0
    random_phase: bool = False

    def to_dict(self):
        return {"mode": self.mode, "amplitude": self.amplitude, "phase": self.phase,
                "random_phase": self.random_phase}


@dataclass(frozen=True)
class InitialDatum:
    kind: str
    params: dict = field(default_factory=dict)
    perturbation: Perturbation = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown initial datum {self.kind!r}; choose from {', '.join(KINDS)}")
        merged = dict(DEFAULTS[self.kind])
        merged.update(self.params or {})
        object.__setattr__(self, "params", merged)
        if isinstance(self.perturbation, dict):
            object.__setattr__(self, "perturbation", Perturbation(**self.perturbation))

    def to_dict(self):
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.perturbation is not None:
            out["perturbation"] = self.perturbation.to_dict()
        return out

    @classmethod
    def from_dict(cls, obj):
        obj = dict(obj)
        try:
            kind = obj.pop("kind")
        except KeyError:
            raise ConfigurationError("initial datum needs a 'kind'") from None
        params = obj.pop("params", {})
        pert = obj.pop("perturbation", None)
        if obj:
            raise ConfigurationError(f"unknown initial datum keys: {sorted(obj)}")
        try:
            pert = Perturbation(**pert) if pert is not None else None
        except TypeError as exc:
            raise ConfigurationError(f"bad perturbation: {exc}") from None
        return cls(kind=kind, params=params, perturbation=pert)


def _xy(z):
    return np.column_stack((z.real, z.imag))


def circle(n, radius=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return DiscreteCurve(radius * np.column_stack((np.cos(th), np.sin(th))))


def ellipse(n, a=2.0, b=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return DiscreteCurve(np.column_stack((a * np.cos(th), b * np.sin(th))))


def gerono_eight(n, scale=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return DiscreteCurve(scale * np.column_stack((np.cos(th), np.sin(th) * np.cos(th))))


def asymmetric_eight(n, scale=1.0, shear=0.4):
    """Figure eight whose right lobe is stretched vertically.

    The lobe weight ``((1 + cos)/2)^2`` is a smooth one-sided bump, so the
    two lobes enclose areas of opposite sign but different size.
    """
    th = 2 * np.pi * np.arange(n) / n
    x = np.cos(th)
    y = np.sin(th) * np.cos(th) + shear * np.sin(th) ** 3 * ((1 + np.cos(th)) / 2) ** 2
    return DiscreteCurve(scale * np.column_stack((x, y)))


def _read_coefficients(params):
    coeffs = params.get("coefficients")
    if coeffs is None:
        path = params.get("file")
        if path is None:
            raise ConfigurationError("fourier datum needs 'coefficients' or 'file'")
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        coeffs = obj["coefficients"] if isinstance(obj, dict) else obj
    return [(int(c[0]), complex(float(c[1]), float(c[2]) if len(c) > 2 else 0.0)) for c in coeffs]


def fourier_curve(n, coefficients, scale=1.0):
    """``z(x) = scale * sum_k c_k exp(2 pi i k x)`` from ``[(k, c_k), ...]``."""
    x = np.arange(n) / n
    z = np.zeros(n, dtype=complex)
    for k, c in coefficients:
        if abs(k) >= n // 2:
            raise ConfigurationError(f"Fourier mode {k} is not resolved by {n} nodes")
        z += c * np.exp(2j * np.pi * k * x)
    return DiscreteCurve(scale * _xy(z))


def perturb(curve, pert, rng=None):
    phase = pert.phase
    if pert.random_phase:
        rng = rng or np.random.default_rng()
        phase = float(rng.uniform(0, 2 * np.pi))
    offset = pert.amplitude * np.cos(2 * np.pi * pert.mode * curve.x + phase)
    return DiscreteCurve(curve.points + offset[:, None] * curve.geometry.normal)


def _build(datum, n):
    p = datum.params
    if datum.kind == "circle":
        if not p["radius"] > 0:
            raise ConfigurationError("radius must be positive")
        return circle(n, p["radius"])
    if datum.kind == "ellipse":
        if not (p["a"] > 0 and p["b"] > 0):
            raise ConfigurationError("semi-axes must be positive")
        return ellipse(n, p["a"], p["b"])
    if datum.kind == "gerono_eight":
        return gerono_eight(n, p["scale"])
    if datum.kind == "asymmetric_eight":
        return asymmetric_eight(n, p["scale"], p["shear"])
    if datum.kind == "fourier":
        return fourier_curve(n, _read_coefficients(p), p.get("scale", 1.0))
    path = p.get("file")
    if path is None:
        raise ConfigurationError("snapshot datum needs 'file'")
    curve = load_snapshot(path)
    return curve if curve.n == n else resample_uniform(curve, n)


def generate(datum, n, seed=None):
    """Sample `datum` on `n` nodes and validate it.

    Parameters
    ----------
    datum : InitialDatum or dict
    n : int
    seed : int, optional
        Seeds the random phase of a perturbation.

    Raises
    ------
    GenerationError
        The curve is not regular, its rotation index is not resolved or not
        the one its family prescribes, or an asymmetric eight encloses
        (almost) no area.
    """
    if isinstance(datum, dict):
        datum = InitialDatum.from_dict(datum)
    try:
        curve = _build(datum, n)
        if datum.perturbation is not None:
            curve = perturb(curve, datum.perturbation, np.random.default_rng(seed))
        _ = curve.geometry
        omega = rotation_index(curve)
    except ConfigurationError:
        raise
    except (ApefError, OSError, KeyError, ValueError) as exc:
        raise GenerationError(f"{datum.kind}: {exc}") from exc
    expected = EXPECTED_ROTATION.get(datum.kind)
    if expected is not None and omega != expected:
        raise GenerationError(f"{datum.kind}: rotation index {omega}, expected {expected}")
    if datum.kind == "asymmetric_eight" and abs(area(curve)) <= MIN_ASYMMETRIC_AREA:
        raise GenerationError(f"asymmetric_eight encloses area {area(curve):.3e}; increase the shear")
    return curve
