"""Time integration of the area preserving sixth-order elastic flow.

One direct step from a constant-speed curve ``gamma`` with length L:

1. normal velocity ``v = <V, nu>`` from :func:`apef.variational.flow_terms`;
2. stabilized increment ``w = dt v / (1 + dt a_k)`` in Fourier space with
   ``a_k = c (2 pi k / L)^6``, i.e. the leading ``-d_s^6`` part is treated
   implicitly and the remainder explicitly;
3. displacement along the normal of the midpoint curve ``gamma + delta/2``
   (fixed point), with the mean of w taken against the midpoint arclength.
   On the grid the signed area changes exactly by
   ``-int <delta, nu_mid> ds_mid``, so this makes the update area neutral;
4. constant-speed reparametrization, then diagnostics.

Steps that raise E_lambda by more than ``1e-8 (1 + |E_lambda|)`` are
rejected and retried with half the step.
"""

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import spectral
from .curve import (DiscreteCurve, area, metric_flatness, resample_uniform, rotation_index,
                    self_intersects)
from .errors import (ApefError, ConfigurationError, DegenerateCurve, GraphModeBreakdown, StiffnessFailure,
                     UnresolvedTopology)
from .variational import EnergyReport, energy, flow_terms

EXIT_OK = 0
EXIT_STIFF = 2
EXIT_DEGENERATE = 3
EXIT_GRAPH = 4

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    energy: EnergyReport
    area: float
    area_drift: float
    length: float
    rotation: int
    dissipation: float
    residual: float
    c1_estimate: float
    c1_std: float
    max_abs_k: float
    embedded: bool
    metric_flatness: float

    def row(self):
        return (self.t, self.dt, self.energy.bending, self.energy.total, self.length, self.area,
                self.area_drift, self.rotation, self.dissipation, self.residual, self.c1_estimate,
                self.c1_std, self.max_abs_k, int(self.embedded), self.metric_flatness)


def diagnose(curve, lam, area0, t=0.0, dt=0.0, dealias=False, check_embedded=True):
    terms = flow_terms(curve, lam, dealias)
    a = area(curve)
    embedded = (not self_intersects(curve)) if check_embedded else False
    return DiagnosticsRecord(
        t=t, dt=dt,
        energy=energy(curve, lam),
        area=a,
        area_drift=a - area0,
        length=terms.length,
        rotation=rotation_index(curve),
        dissipation=terms.dissipation,
        residual=terms.residual,
        c1_estimate=terms.c1,
        c1_std=float(np.std(terms.g)),
        max_abs_k=float(np.abs(terms.k).max()),
        embedded=embedded,
        metric_flatness=metric_flatness(curve),
    )


@dataclass(frozen=True)
class StepPolicy:
    """Step-size control and discretization switches.

    `stabilization` is either ``"auto"`` (``c = max_j (L / |gamma_x|_j)^6``,
    which is 1 on a constant-speed curve) or a number ``c >= 0``; the auto
    value is divided by `safety`. After an accepted step dt is multiplied by
    `growth` (capped at `dt_max`); a rejected step halves it.
    """

    dt_init: float = 1e-5
    dt_min: float = 1e-12
    dt_max: float = 1e-5
    safety: float = 1.0
    mode: str = "direct-imex"
    stabilization: object = "auto"
    growth: float = 1.0
    reparam_tol: float = 0.0
    update: str = "midpoint"
    exact_area: bool = False
    dealias: bool = False
    check_embedded: bool = True
    filter_keep: float = 2.0 / 3.0

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ConfigurationError("need 0 < dt_min <= dt_init <= dt_max")
        if not (0 < self.safety <= 1):
            raise ConfigurationError("safety must lie in (0, 1]")
        if self.mode not in ("direct-imex", "graph-over-reference"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.update not in ("midpoint", "cartesian"):
            raise ConfigurationError(f"unknown update {self.update!r}")
        if self.stabilization != "auto" and not float(self.stabilization) >= 0:
            raise ConfigurationError("stabilization must be 'auto' or >= 0")
        if not 0 < self.filter_keep <= 1:
            raise ConfigurationError("filter_keep must lie in (0, 1]")
        if self.growth < 1.0:
            raise ConfigurationError("growth must be >= 1")


@dataclass(frozen=True, eq=False)
class FlowState:
    curve: DiscreteCurve
    t: float
    step_index: int
    dt_last: float
    diagnostics: DiagnosticsRecord
    lam: float
    area0: float
    dt_next: float
    height: Optional[np.ndarray] = None
    reference: Optional[DiscreteCurve] = None


def initial_state(curve, lam, policy=None, area0=None, resample=True):
    policy = policy or StepPolicy()
    if resample:
        curve = resample_uniform(curve)
    a0 = area(curve) if area0 is None else area0
    diag = diagnose(curve, lam, a0, dealias=policy.dealias, check_embedded=policy.check_embedded)
    return FlowState(curve=curve, t=0.0, step_index=0, dt_last=0.0, diagnostics=diag, lam=lam,
                     area0=a0, dt_next=policy.dt_init)


def _stab_symbol(n, length, metric, policy):
    if policy.stabilization == "auto":
        c = max(1.0, float(((length / metric) ** 6).max())) / policy.safety
    else:
        c = float(policy.stabilization)
    k = np.arange(n // 2 + 1)
    return c * (2.0 * math.pi * k / length) ** 6


def _midpoint_displacement(points, w, normal, iters=50):
    delta = w[:, None] * normal
    for _ in range(iters):
        mid = points + 0.5 * delta
        d1 = spectral.differentiate(mid, 1)
        speed = np.linalg.norm(d1, axis=1)
        if not speed.min() > 0:
            raise DegenerateCurve("midpoint curve lost regularity", node=int(np.argmin(speed)))
        nu_mid = np.column_stack((-d1[:, 1], d1[:, 0])) / speed[:, None]
        a = w - np.sum(w * speed) / np.sum(speed)
        new = a[:, None] * nu_mid
        change = np.abs(new - delta).max()
        delta = new
        if change <= 1e-15 * (1.0 + np.abs(points).max()):
            break
    return delta


def _correct_area(curve, area0):
    # uniform normal offset d: A(gamma + d nu) ~ A - d L
    for _ in range(3):
        geo = curve.geometry
        d = (area(curve) - area0) / geo.length
        curve = DiscreteCurve(curve.points + d * geo.normal)
    return curve


def direct_update(curve, lam, dt, policy):
    """Advance the geometry by one stabilized step (no acceptance test)."""
    terms = flow_terms(curve, lam, policy.dealias)
    geo = curve.geometry
    n = curve.n
    a = _stab_symbol(n, terms.length, terms.metric, policy)
    if policy.update == "cartesian":
        vel = terms.v[:, None] * geo.normal
        pts_hat = np.fft.rfft(curve.points, axis=0)
        vel_hat = np.fft.rfft(vel, axis=0)
        new_hat = (pts_hat * (1.0 + dt * a)[:, None] + dt * vel_hat) / (1.0 + dt * a)[:, None]
        return DiscreteCurve(np.fft.irfft(new_hat, n=n, axis=0))
    w = np.fft.irfft(np.fft.rfft(dt * terms.v) / (1.0 + dt * a), n=n)
    return DiscreteCurve(curve.points + _midpoint_displacement(curve.points, w, geo.normal))


def filter_modes(curve, keep=2.0 / 3.0):
    """Zero the position modes above ``keep * N/2`` (and always the Nyquist mode).

    Odd derivatives ignore the Nyquist mode, and tangential noise in the top
    modes is not damped by a normal flow, yet either is amplified by up to
    ``(pi N / L)^5`` in the residual. A resolved curve carries nothing there.
    """
    coeffs = np.fft.rfft(curve.points, axis=0)
    cut = int(keep * (curve.n // 2))
    coeffs[cut + 1:] = 0.0
    coeffs[-1] = 0.0
    return DiscreteCurve(np.fft.irfft(coeffs, n=curve.n, axis=0))


def _finish(curve, state, policy, lam):
    if policy.mode == "direct-imex" and metric_flatness(curve) > policy.reparam_tol:
        curve = resample_uniform(curve)
    curve = filter_modes(curve, policy.filter_keep)
    if policy.exact_area:
        curve = _correct_area(curve, state.area0)
    return curve


def step(state, policy, lam=None, dt=None):
    """One accepted step of the direct mode.

    Parameters
    ----------
    state : FlowState
    policy : StepPolicy
    lam : float, optional
        Defaults to ``state.lam``.
    dt : float, optional
        Trial step; defaults to ``state.dt_next``.

    Raises
    ------
    StiffnessFailure
        dt fell below ``policy.dt_min`` with the energy still increasing.
    DegenerateCurve
        The curve lost regularity.
    """
    lam = state.lam if lam is None else lam
    dt = state.dt_next if dt is None else dt
    e_old = state.diagnostics.energy.total
    tol = 1e-8 * (1.0 + abs(e_old))
    while True:
        if dt < policy.dt_min:
            raise StiffnessFailure(f"dt fell below dt_min={policy.dt_min:g} at t={state.t:g}")
        try:
            new = _finish(direct_update(state.curve, lam, dt, policy), state, policy, lam)
            e_new = energy(new, lam).total
        except DegenerateCurve:
            e_new = math.inf
            new = None
        if e_new <= e_old + tol:
            break
        if new is None and dt / 2 < policy.dt_min:
            raise DegenerateCurve(f"curve degenerated at t={state.t:g}")
        dt *= 0.5
    t = state.t + dt
    diag = diagnose(new, lam, state.area0, t=t, dt=dt, dealias=policy.dealias,
                    check_embedded=policy.check_embedded)
    return FlowState(curve=new, t=t, step_index=state.step_index + 1, dt_last=dt, diagnostics=diag,
                     lam=lam, area0=state.area0, dt_next=min(policy.dt_max, dt * policy.growth))


# ---------------------------------------------------------------------------
# Graph over a fixed reference curve


def height_over(curve, reference, iters=60):
    """Heights phi with ``reference + phi nu_ref`` on the geometric image of `curve`.

    For every reference node the normal line is intersected with the
    trigonometric interpolant of `curve` (2x2 Newton in the curve parameter
    and the height).
    """
    ref = reference.points
    nu0 = reference.geometry.normal
    pts = curve.points
    d1 = spectral.differentiate(pts, 1)
    n = curve.n
    dist = np.linalg.norm(ref[:, None, :] - pts[None, :, :], axis=2)
    y = np.argmin(dist, axis=1) / n
    h = np.einsum("ij,ij->i", pts[np.argmin(dist, axis=1)] - ref, nu0)
    for _ in range(iters):
        g = spectral.trig_eval(pts, y)
        gp = spectral.trig_eval(d1, y)
        r = g - ref - h[:, None] * nu0
        jac = np.stack((gp, -nu0), axis=2)
        sol = np.linalg.solve(jac, -r[:, :, None])[:, :, 0]
        y = y + sol[:, 0]
        h = h + sol[:, 1]
        if np.abs(sol).max() < 1e-15:
            break
    return h


def graph_curve(reference, phi):
    return DiscreteCurve(reference.points + np.asarray(phi)[:, None] * reference.geometry.normal)


@dataclass(frozen=True)
class GraphVelocity:
    rate: np.ndarray  # d_t phi
    leading: np.ndarray  # d_x^6 phi / |d_x gamma|^6
    lower: np.ndarray  # Q = rate - leading
    curve: DiscreteCurve
    transversality: np.ndarray  # <nu_ref, nu>


def graph_velocity(reference, phi, lam, dealias=False):
    """Right-hand side of the scalar height equation over `reference`.

    ``d_t phi nu_ref^perp = V`` with ``nu_ref^perp = <nu_ref, nu> nu``, hence
    ``d_t phi = <V, nu> / <nu_ref, nu>``. The lower-order part Q is the full
    right-hand side minus ``d_x^6 phi / |d_x gamma|^6``.
    """
    curve = graph_curve(reference, phi)
    terms = flow_terms(curve, lam, dealias)
    cos = np.einsum("ij,ij->i", reference.geometry.normal, curve.geometry.normal)
    j = int(np.argmin(cos))
    if cos[j] < 0.5:
        raise GraphModeBreakdown(f"<nu_ref, nu> = {cos[j]:.3f} < 1/2 at node {j}; rebase the reference")
    rate = terms.v / cos
    leading = spectral.differentiate(phi, 6) / terms.metric**6
    return GraphVelocity(rate=rate, leading=leading, lower=rate - leading, curve=curve, transversality=cos)


def step_graph(state, policy, lam=None, reference=None, dt=None):
    """One accepted step of the height equation over a fixed `reference`.

    The leading coefficient is frozen at ``a = max_j |gamma_x|_j^-6`` for the
    implicit part: ``(1 + dt a k^6) phi^{n+1} = phi^n + dt (F(phi^n) + a k^6 phi^n)``.

    Raises
    ------
    GraphModeBreakdown
        ``<nu_ref, nu> < 1/2`` somewhere; the caller must rebase.
    """
    lam = state.lam if lam is None else lam
    reference = state.reference if reference is None else reference
    if reference is None:
        raise ConfigurationError("graph mode needs a reference curve")
    if state.height is not None and state.reference is reference:
        phi = state.height
    else:
        phi = height_over(state.curve, reference)
    dt = state.dt_next if dt is None else dt
    n = reference.n
    e_old = energy(graph_curve(reference, phi), lam).total
    tol = 1e-8 * (1.0 + abs(e_old))
    while True:
        if dt < policy.dt_min:
            raise StiffnessFailure(f"dt fell below dt_min={policy.dt_min:g} at t={state.t:g}")
        gv = graph_velocity(reference, phi, lam, policy.dealias)
        metric = gv.curve.geometry.metric
        a = _stab_symbol(n, gv.curve.geometry.length, metric, policy)
        phi_hat = np.fft.rfft(phi)
        new_hat = (phi_hat * (1.0 + dt * a) + dt * np.fft.rfft(gv.rate)) / (1.0 + dt * a)
        phi_new = np.fft.irfft(new_hat, n=n)
        new = graph_curve(reference, phi_new)
        e_new = energy(new, lam).total
        if e_new <= e_old + tol:
            break
        dt *= 0.5
    t = state.t + dt
    diag = diagnose(new, lam, state.area0, t=t, dt=dt, dealias=policy.dealias,
                    check_embedded=policy.check_embedded)
    return FlowState(curve=new, t=t, step_index=state.step_index + 1, dt_last=dt, diagnostics=diag,
                     lam=lam, area0=state.area0, dt_next=min(policy.dt_max, dt * policy.growth),
                     height=phi_new, reference=reference)


def translation_normalized(curve):
    """``gamma - (1/L) int gamma ds``: the curve with its arclength centroid at the origin."""
    centroid = curve.integrate(curve.points) / curve.geometry.length
    return curve.translated(-centroid)


# ---------------------------------------------------------------------------
# Driver


@dataclass
class Trajectory:
    """Accepted-step diagnostics of a run plus where its outputs went."""

    records: list = field(default_factory=list)
    status: str = "running"
    exit_code: int = EXIT_OK
    message: str = ""
    out_dir: Optional[str] = None
    csv_path: Optional[str] = None
    snapshots: list = field(default_factory=list)
    initial: Optional[DiscreteCurve] = None
    report: object = None

    def column(self, name):
        if name == "energy_total":
            return np.array([r.energy.total for r in self.records])
        if name == "energy_bending":
            return np.array([r.energy.bending for r in self.records])
        return np.array([getattr(r, name) for r in self.records])


def run(config, callback=None):
    """Integrate `config` (a :class:`apef.config.RunConfig`).

    Stops at ``t_end``, when the residual drops below ``stopping.eps_stat``,
    after ``stopping.max_steps`` steps, or on a flow error. Flow errors are
    re-raised after the last valid state has been written; the trajectory is
    attached to the exception as ``exc.trajectory``.

    Returns
    -------
    (Trajectory, FlowState)
    """
    from .initial import generate
    from .output import RunWriter
    from .stationary import analyze

    lam = config.lam
    policy = config.policy
    curve0 = generate(config.initial, config.n, seed=config.seed)
    state = initial_state(curve0, lam, policy)
    reference = None
    if policy.mode == "graph-over-reference":
        reference = state.curve
        state = replace(state, reference=reference, height=np.zeros(state.curve.n))
    traj = Trajectory(initial=state.curve)
    writer = RunWriter(config, traj)
    traj.records.append(state.diagnostics)
    writer.record(state)

    eps_stat = config.stopping.eps_stat
    max_steps = config.stopping.max_steps
    error = None
    try:
        if state.diagnostics.residual < eps_stat:
            traj.status = "stationary"
        while traj.status == "running":
            if config.t_end - state.t <= max(policy.dt_min, 1e-12 * config.t_end):
                traj.status = "t_end"
                break
            if max_steps is not None and state.step_index >= max_steps:
                traj.status = "max_steps"
                break
            dt = min(state.dt_next, config.t_end - state.t)
            if policy.mode == "graph-over-reference":
                state = step_graph(state, policy, lam, reference, dt=dt)
            else:
                state = step(state, policy, lam, dt=dt)
            traj.records.append(state.diagnostics)
            writer.record(state)
            if callback is not None:
                callback(state)
            if state.diagnostics.residual < eps_stat:
                traj.status = "stationary"
    except StiffnessFailure as exc:
        error, traj.status, traj.exit_code = exc, "stiffness_failure", EXIT_STIFF
    except (DegenerateCurve, UnresolvedTopology) as exc:
        error, traj.status, traj.exit_code = exc, "degenerate", EXIT_DEGENERATE
    except GraphModeBreakdown as exc:
        error, traj.status, traj.exit_code = exc, "graph_breakdown", EXIT_GRAPH
    if error is not None:
        traj.message = str(error)
    try:
        traj.report = analyze(state.curve, lam, state.area0, eps_stat=eps_stat)
    except ApefError:
        traj.report = None
    writer.finish(state, traj.report)
    if error is not None:
        error.trajectory = traj
        error.state = state
        raise error
    return traj, state


def output_root(default=None):
    return os.environ.get("APEF_OUT_DIR") or default
