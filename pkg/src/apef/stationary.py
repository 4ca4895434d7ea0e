"""Stationary states: residual, area multiplier c1 and classification.

A curve is stationary when ``G = nabla_s^2 kappa + |kappa|^2 kappa / 2 - lam kappa``
equals ``c1 nu`` for a constant c1. Integrating ``<G, gamma>`` gives
``2 c1 A = E - lam L``, so curves with zero area balance bending and length
(``E = lam L``).
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .curve import area, rotation_index
from .errors import NotApplicable
from .variational import energy, flow_terms

C_STAR = 146.628
# below this lambda no curve can satisfy the embeddedness threshold
NONTRIVIAL_LAMBDA = 0.5 * (math.pi / C_STAR) ** 2
EPS_STAT = 1e-6
CLASSIFY_TOL = 1e-6


@dataclass(frozen=True)
class StationaryReport:
    residual: float
    c1: float
    c1_std: float
    identity_gap: float
    equipartition_gap: float
    classification: str
    lam: float
    area0: float
    area: float
    bending: float
    length: float
    rotation: int

    def to_json(self):
        return asdict(self)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)


def analyze(curve, lam, area0=None, eps_stat=EPS_STAT):
    """Stationarity report for `curve` under E + lam L at enclosed area `area0`.

    Parameters
    ----------
    curve : DiscreteCurve
    lam : float
    area0 : float, optional
        Area constraint; defaults to the area of `curve`.
    eps_stat : float
        Residual ``||nabla_s G||`` below which the curve counts as stationary.

    Returns
    -------
    StationaryReport
        ``classification`` is one of ``"not-stationary"``, ``"circle"``,
        ``"elastica-like"`` (c1 ~ 0) or ``"non-elastica"``.
    """
    terms = flow_terms(curve, lam)
    rep = energy(curve, lam)
    a = area(curve)
    a0 = a if area0 is None else float(area0)
    c1 = terms.c1
    g_norm = math.sqrt(curve.integrate(terms.g**2))
    e_minus = rep.bending - lam * terms.length
    if terms.residual > eps_stat:
        kind = "not-stationary"
    elif np.std(terms.k) <= CLASSIFY_TOL * np.mean(np.abs(terms.k)):
        kind = "circle"
    elif abs(c1) <= CLASSIFY_TOL * (1.0 + g_norm):
        kind = "elastica-like"
    else:
        kind = "non-elastica"
    return StationaryReport(
        residual=terms.residual,
        c1=c1,
        c1_std=float(np.std(terms.g)),
        identity_gap=abs(2.0 * c1 * a0 - e_minus),
        equipartition_gap=abs(e_minus),
        classification=kind,
        lam=lam,
        area0=a0,
        area=a,
        bending=rep.bending,
        length=terms.length,
        rotation=rotation_index(curve),
    )


def embeddedness_threshold(curve, lam):
    """``(E_lam^2 <= 4 lam C*, 4 lam C* - E_lam^2)``.

    Raises
    ------
    NotApplicable
        For ``lam <= 0``.
    """
    if not lam > 0:
        raise NotApplicable("the embeddedness threshold needs lambda > 0")
    e = energy(curve, lam).total
    margin = 4.0 * lam * C_STAR - e**2
    return margin >= 0.0, margin
