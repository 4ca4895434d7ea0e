import math

import numpy as np
import pytest

from apef.errors import NotApplicable
from apef.initial import circle, gerono_eight
from apef.stationary import C_STAR, NONTRIVIAL_LAMBDA, analyze, embeddedness_threshold


def test_unit_circle_report():
    rep = analyze(circle(128), 1.0, math.pi)
    assert rep.c1 == pytest.approx(-0.5, abs=1e-12)
    assert rep.residual <= 1e-12
    # 2 c1 A0 = -pi and E - lam L = pi - 2 pi, evaluated independently
    assert 2 * rep.c1 * math.pi == pytest.approx(-math.pi)
    assert rep.bending - 1.0 * rep.length == pytest.approx(-math.pi)
    assert rep.identity_gap <= 1e-8
    assert rep.classification == "circle"


@pytest.mark.parametrize("radius,lam", [(1.0, 0.5), (2.0, 0.125), (1.3, 0.7)])
def test_circle_multiplier_formula(radius, lam):
    rep = analyze(circle(128, radius), lam)
    assert rep.c1 == pytest.approx(1 / (2 * radius**3) - lam / radius, abs=1e-10)
    assert rep.identity_gap <= 1e-8


def test_classical_elastica_circle_has_zero_multiplier():
    rep = analyze(circle(128), 0.5, math.pi)
    assert abs(rep.c1) <= 1e-12
    assert rep.equipartition_gap == pytest.approx(abs(math.pi - 0.5 * 2 * math.pi), abs=1e-10)


def test_default_area_is_the_curves_area():
    assert analyze(circle(64, 2.0), 1.0).area0 == pytest.approx(4 * math.pi)


def test_zero_area_lambda_zero_is_never_stationary():
    rep = analyze(gerono_eight(128), 0.0, 0.0)
    assert rep.classification == "not-stationary"
    assert rep.residual > 1e-2


def test_report_json(tmp_path):
    rep = analyze(circle(64), 1.0)
    rep.save(tmp_path / "r.json")
    import json

    obj = json.loads((tmp_path / "r.json").read_text())
    assert obj["classification"] == "circle" and obj["rotation"] == 1


def test_embeddedness_threshold_examples():
    ok, margin = embeddedness_threshold(circle(128), 1.0)
    assert ok and margin == pytest.approx(4 * C_STAR - (3 * math.pi) ** 2)
    assert (3 * math.pi) ** 2 == pytest.approx(88.83, abs=0.01)
    ok, _ = embeddedness_threshold(circle(128), 1e-6)
    assert not ok


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_embeddedness_threshold_needs_positive_lambda(lam):
    with pytest.raises(NotApplicable):
        embeddedness_threshold(circle(64), lam)


def test_documented_constants():
    assert C_STAR == 146.628
    assert NONTRIVIAL_LAMBDA == pytest.approx(2.295e-4, rel=1e-3)
    assert NONTRIVIAL_LAMBDA == 0.5 * (math.pi / C_STAR) ** 2


@pytest.fixture(scope="module")
def converged_ellipse():
    from apef.config import OutputPolicy, RunConfig, Stopping
    from apef.flow import StepPolicy, run
    from apef.initial import InitialDatum

    cfg = RunConfig(lam=1.0, n=128, t_end=50.0, initial=InitialDatum("ellipse", {"a": 1.2, "b": 0.8}),
                    policy=StepPolicy(dt_init=1e-5, dt_max=1e-2, growth=1.05),
                    outputs=OutputPolicy(write=False), stopping=Stopping(eps_stat=1e-6))
    return run(cfg)


def test_ellipse_run_reaches_stationarity(converged_ellipse):
    traj, state = converged_ellipse
    assert traj.status == "stationary"
    assert state.diagnostics.residual < 1e-6
    assert state.diagnostics.c1_std <= 1e-5


def test_converged_state_invariants(converged_ellipse):
    traj, state = converged_ellipse
    rep = traj.report
    assert rep.classification == "circle"
    assert rep.identity_gap <= 1e-4 * (1 + abs(rep.bending) + rep.lam * rep.length)
    assert rep.c1_std <= 1e-3 * (1 + abs(rep.c1))
    # the limit is the circle of the same area
    radius = math.sqrt(rep.area0 / math.pi)
    assert rep.c1 == pytest.approx(1 / (2 * radius**3) - 1 / radius, abs=1e-5)


def test_run_invariants(converged_ellipse):
    traj, _ = converged_ellipse
    e = traj.column("energy_total")
    assert np.all(np.diff(e) <= 1e-8 * (1 + np.abs(e[:-1])))
    a = traj.column("area")
    assert np.abs(a - a[0]).max() <= 1e-6 * max(abs(a[0]), 1.0)
    L = traj.column("length")
    assert np.all(L >= 4 * math.pi**2 / (2 * e[0]) - 1e-10)
    assert np.all(L <= e[0] / 1.0 + 1e-10)
    assert set(traj.column("rotation")) == {1}
    d, r = traj.column("dissipation"), traj.column("residual")
    assert np.all(d >= 0)
    np.testing.assert_allclose(r**2, d, rtol=1e-12, atol=1e-300)
    ok, _ = embeddedness_threshold(traj.initial, 1.0)
    assert ok and all(traj.column("embedded"))
