import csv
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apef.config import OutputPolicy, RunConfig, Stopping
from apef.curve import area, metric_flatness, resample_uniform
from apef.errors import ConfigurationError, GraphModeBreakdown, StiffnessFailure
from apef.flow import (StepPolicy, graph_curve, graph_velocity, height_over,
                       initial_state, run, step, step_graph, translation_normalized)
from apef.initial import InitialDatum, Perturbation, circle, ellipse
from apef.output import CSV_COLUMNS
from apef.stationary import C_STAR
from apef.variational import energy, flow_velocity

from conftest import smooth_field


def policy(dt, **kw):
    return StepPolicy(dt_init=dt, dt_max=dt, dt_min=dt * 1e-6, **kw)


def test_policy_validation():
    with pytest.raises(ConfigurationError):
        StepPolicy(dt_init=1e-3, dt_max=1e-4)
    with pytest.raises(ConfigurationError):
        StepPolicy(safety=0.0)
    with pytest.raises(ConfigurationError):
        StepPolicy(mode="explicit")
    with pytest.raises(ConfigurationError):
        StepPolicy(stabilization=-1.0)


def test_circle_is_stationary_under_stepping():
    pol = policy(1e-4)
    s = initial_state(circle(128), 1.0, pol)
    for _ in range(5):
        new = step(s, pol)
        assert np.abs(new.curve.points - s.curve.points).max() <= 1e-8
        s = new


def test_one_ellipse_step_decreases_energy_and_keeps_area():
    pol = policy(1e-5)
    s = initial_state(ellipse(128, 1.2, 0.8), 1.0, pol)
    new = step(s, pol)
    assert new.diagnostics.energy.total < s.diagnostics.energy.total
    assert abs(new.diagnostics.area - s.diagnostics.area) <= 1e-8 * max(s.diagnostics.area, 1.0)
    assert new.t == pytest.approx(1e-5) and new.step_index == 1
    assert metric_flatness(new.curve) <= 1e-4


def test_first_order_in_time():
    def e_at(dt, t_end=1e-3):
        pol = policy(dt)
        s = initial_state(ellipse(128, 1.2, 0.8), 1.0, pol)
        while s.t < t_end - 1e-15:
            s = step(s, pol, dt=min(dt, t_end - s.t))
        return s.diagnostics.energy.total

    e1, e2, e3 = (e_at(dt) for dt in (1e-4, 5e-5, 2.5e-5))
    ratio = (e1 - e2) / (e2 - e3)
    assert 1.6 < ratio < 2.5


def test_cartesian_update_is_available_but_drifts_more():
    base = initial_state(ellipse(128, 1.2, 0.8), 1.0, policy(1e-5))
    drift = {}
    for update in ("midpoint", "cartesian"):
        pol = policy(1e-5, update=update)
        s = base
        for _ in range(50):
            s = step(s, pol)
        drift[update] = abs(s.diagnostics.area_drift)
    assert drift["midpoint"] < 1e-12
    assert drift["cartesian"] > drift["midpoint"]


def test_exact_area_flag():
    pol = policy(1e-5, update="cartesian", exact_area=True)
    s = initial_state(ellipse(128, 1.2, 0.8), 1.0, pol)
    for _ in range(20):
        s = step(s, pol)
    assert abs(s.diagnostics.area_drift) <= 1e-12


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_stiffness_failure_without_stabilization():
    pol = StepPolicy(dt_init=1e-3, dt_max=1e-3, dt_min=2e-4, stabilization=0.0)
    s = initial_state(ellipse(128, 1.2, 0.8), 1.0, pol)
    with pytest.raises(StiffnessFailure):
        step(s, pol)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_rejected_steps_halve_dt():
    pol = StepPolicy(dt_init=1e-3, dt_max=1e-3, dt_min=1e-12, stabilization=0.0)
    s = initial_state(ellipse(128, 1.2, 0.8), 1.0, pol)
    new = step(s, pol)
    assert new.dt_last < 1e-3
    assert math.log2(1e-3 / new.dt_last) == pytest.approx(round(math.log2(1e-3 / new.dt_last)))
    assert new.diagnostics.energy.total <= s.diagnostics.energy.total + 1e-8 * (1 + s.diagnostics.energy.total)


@given(seed=st.integers(0, 10**6))
def test_energy_monotone_and_topology_kept_for_random_curves(seed):
    rng = np.random.default_rng(seed)
    y = 0.08 * smooth_field(rng, 128, 4)
    c = circle(128)
    start = resample_uniform(type(c)(c.points * (1 + y)[:, None]))
    pol = StepPolicy(dt_init=1e-5, dt_max=1e-3, growth=1.5)
    s = initial_state(start, 1.0, pol)
    for _ in range(8):
        new = step(s, pol)
        assert new.diagnostics.energy.total <= s.diagnostics.energy.total + 1e-8 * (1 + s.diagnostics.energy.total)
        assert new.diagnostics.rotation == 1
        assert abs(new.diagnostics.area_drift) <= 1e-10
        s = new


# --- graph mode ---------------------------------------------------------------

def test_graph_mode_circle_stays_put():
    ref = circle(128)
    pol = policy(1e-4)
    s = replace(initial_state(ref, 1.0, pol), reference=ref, height=np.zeros(128))
    for _ in range(3):
        s = step_graph(s, pol)
    assert np.abs(s.height).max() <= 1e-12


def test_graph_velocity_over_itself_matches_flow_velocity(uniform_ellipse):
    gv = graph_velocity(uniform_ellipse, np.zeros(128), 1.0)
    v = flow_velocity(uniform_ellipse, 1.0).scalar
    assert np.abs(gv.rate - v).max() <= 1e-8 * max(1.0, np.abs(v).max())


def test_graph_and_direct_steps_agree():
    ref = circle(128)
    phi = 1e-3 * np.cos(2 * 2 * np.pi * ref.x)
    start = graph_curve(ref, phi)
    for dt in (1e-4, 1e-5):
        pol = policy(dt)
        s = initial_state(start, 1.0, pol, resample=False)
        d = step(s, pol)
        g = step_graph(s, pol, reference=ref)
        assert np.abs(height_over(d.curve, ref) - g.height).max() <= 1e-6 + dt**2


def test_height_over_recovers_height():
    ref = ellipse(128, 1.5, 1.0)
    phi = 0.05 * np.sin(3 * 2 * np.pi * ref.x)
    moved = resample_uniform(graph_curve(ref, phi))
    assert np.abs(height_over(moved, ref) - phi).max() <= 1e-10


def test_graph_mode_breakdown():
    ref = circle(128)
    phi = 0.25 * np.cos(8 * 2 * np.pi * ref.x)  # slope 2: <nu_ref, nu> ~ 0.45
    with pytest.raises(GraphModeBreakdown):
        graph_velocity(ref, phi, 1.0)


# --- runs ---------------------------------------------------------------------

def short_config(tmp_path, **kw):
    args = dict(lam=1.0, n=64, t_end=2e-4, initial=InitialDatum("ellipse", {"a": 1.2, "b": 0.8}),
                policy=policy(1e-5), outputs=OutputPolicy(root=str(tmp_path), snapshot_stride=5, svg=True),
                name="short")
    args.update(kw)
    return RunConfig(**args)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_run_writes_csv_snapshots_and_report(tmp_path, monkeypatch):
    monkeypatch.delenv("APEF_OUT_DIR", raising=False)
    traj, state = run(short_config(tmp_path))
    assert traj.status == "t_end" and state.t == pytest.approx(2e-4)
    header, data = read_csv(traj.csv_path)
    assert tuple(header) == CSV_COLUMNS
    assert len(data) == 21
    e = data[:, header.index("energy_total")]
    assert np.all(np.diff(e) <= 1e-8 * (1 + np.abs(e[:-1])))
    out = tmp_path / "short"
    for name in ("config.json", "report.json", "snapshot_final.json", "snapshot_final.svg",
                 "snapshot_0000000.json", "snapshot_0000005.json"):
        assert (out / name).exists(), name
    assert "<polygon" in (out / "snapshot_final.svg").read_text()


def test_snapshots_are_translation_normalized(tmp_path):
    from apef.curve import load_snapshot

    datum = InitialDatum("fourier", {"coefficients": [[0, 5.0, -3.0], [1, 1.0, 0.0], [-2, 0.1, 0.0]]})
    traj, state = run(short_config(tmp_path, initial=datum))
    snap = load_snapshot(traj.snapshots[-1])
    centroid = snap.integrate(snap.points) / snap.geometry.length
    assert np.abs(centroid).max() <= 1e-12
    assert np.abs(translation_normalized(state.curve).points - snap.points).max() <= 1e-12


def test_out_dir_environment_override(tmp_path, monkeypatch):
    monkeypatch.setenv("APEF_OUT_DIR", str(tmp_path / "env"))
    traj, _ = run(short_config(tmp_path / "ignored"))
    assert traj.out_dir == str(tmp_path / "env" / "short")
    assert (tmp_path / "env" / "short" / "diagnostics.csv").exists()


def test_runs_are_deterministic(tmp_path):
    datum = InitialDatum("circle", {"radius": 1.0}, Perturbation(mode=3, amplitude=0.05, random_phase=True))
    a, _ = run(short_config(tmp_path / "a", initial=datum, seed=5))
    b, _ = run(short_config(tmp_path / "b", initial=datum, seed=5))
    assert open(a.csv_path).read() == open(b.csv_path).read()


def test_run_stops_when_stationary(tmp_path):
    traj, state = run(short_config(tmp_path, initial=InitialDatum("circle", {"radius": 1.0})))
    assert traj.status == "stationary" and state.step_index == 0


def test_run_max_steps(tmp_path):
    traj, state = run(short_config(tmp_path, stopping=Stopping(eps_stat=1e-6, max_steps=3)))
    assert traj.status == "max_steps" and state.step_index == 3


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_run_failure_leaves_snapshot(tmp_path):
    pol = StepPolicy(dt_init=1e-3, dt_max=1e-3, dt_min=2e-4, stabilization=0.0)
    with pytest.raises(StiffnessFailure) as info:
        run(short_config(tmp_path, policy=pol, t_end=1e-2))
    traj = info.value.trajectory
    assert traj.status == "stiffness_failure" and traj.exit_code == 2
    assert (tmp_path / "short" / "snapshot_final.json").exists()


def test_graph_mode_run(tmp_path):
    datum = InitialDatum("circle", {"radius": 1.0}, Perturbation(mode=2, amplitude=1e-3))
    traj, state = run(short_config(tmp_path, initial=datum, policy=policy(1e-5, mode="graph-over-reference")))
    e = traj.column("energy_total")
    assert np.all(np.diff(e) <= 1e-8 * (1 + e[:-1]))
    assert state.height is not None


def test_embeddedness_is_kept_below_threshold(tmp_path):
    cfg = short_config(tmp_path, n=128, t_end=3e-3, outputs=OutputPolicy(write=False))
    e0 = energy(ellipse(128, 1.2, 0.8), 1.0).total
    assert e0**2 <= 4 * 1.0 * C_STAR
    traj, _ = run(cfg)
    assert all(r.embedded for r in traj.records)
    assert len({r.rotation for r in traj.records}) == 1


def test_length_bounds_hold_along_run(tmp_path):
    traj, _ = run(short_config(tmp_path, n=128, t_end=2e-3, outputs=OutputPolicy(write=False)))
    e0 = traj.records[0].energy.total
    L = traj.column("length")
    assert np.all(L >= 4 * math.pi**2 / (2 * e0)) and np.all(L <= e0 / 1.0)
