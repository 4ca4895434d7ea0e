import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apef.curve import DiscreteCurve, resample_uniform
from apef.errors import ConfigurationError
from apef.initial import asymmetric_eight, circle, ellipse
from apef.stationary import analyze
from apef.variational import (directional_derivative, dissipation, energy, flow_terms, flow_velocity,
                              l2_gradient)

from conftest import smooth_field


def test_unit_circle_energy():
    rep = energy(circle(128), 1.0)
    assert rep.bending == pytest.approx(math.pi, abs=1e-10)
    assert rep.total == pytest.approx(3 * math.pi, abs=1e-10)
    assert rep.total == rep.bending + rep.length_term


def test_circle_radius_two_energy():
    assert energy(circle(128, 2.0), 0.0).bending == pytest.approx(math.pi / 2, abs=1e-10)


def test_energy_scaling(ellipse21):
    assert energy(ellipse21.scaled(3.0)).bending == pytest.approx(energy(ellipse21).bending / 3, rel=1e-12)


def test_negative_lambda_rejected(unit_circle):
    with pytest.raises(ConfigurationError):
        energy(unit_circle, -1.0)
    with pytest.raises(ConfigurationError):
        flow_velocity(unit_circle, -0.1)


@pytest.mark.parametrize("radius,lam", [(1.0, 1.0), (2.0, 0.3), (0.5, 0.0), (1.5, 2.0)])
def test_circle_gradient(radius, lam):
    c = circle(128, radius)
    g = l2_gradient(c, lam)
    expected = 1 / (2 * radius**3) - lam / radius
    assert np.abs(g.scalar - expected).max() <= 1e-8
    assert g.tangential_defect() <= 1e-12


def test_unit_circle_is_classical_elastica_at_half():
    assert np.abs(l2_gradient(circle(128), 0.5).values).max() <= 1e-12


@pytest.mark.parametrize("eps", [1e-4, 1e-5])
def test_first_variation_central_difference(uniform_ellipse, eps):
    rng = np.random.default_rng(7)
    c = uniform_ellipse
    g = l2_gradient(c, 1.0)
    for _ in range(5):
        phi = smooth_field(rng, c.n, 6)[:, None] * c.geometry.normal
        exact = c.inner(g.values, phi)
        fd = directional_derivative(c, 1.0, phi, eps)
        assert fd == pytest.approx(exact, rel=1e-4)


@pytest.mark.parametrize("radius,lam", [(1.0, 1.0), (0.7, 0.0), (3.0, 5.0)])
def test_circles_do_not_move(radius, lam):
    assert np.abs(flow_velocity(circle(128, radius), lam).values).max() <= 1e-8
    assert dissipation(circle(128, radius), lam) <= 1e-14


def test_ellipse_velocity_has_zero_mean(ellipse21):
    v = flow_velocity(ellipse21, 1.0)
    assert abs(ellipse21.integrate(v.scalar)) <= 1e-8 * v.l2_norm()
    assert dissipation(ellipse21, 1.0) > 0


def test_mirror_equivariance(ellipse21):
    m = np.diag([1.0, -1.0])
    v = flow_velocity(ellipse21, 1.0).values
    vm = flow_velocity(ellipse21.transformed(m), 1.0).values
    assert np.abs(vm - v @ m.T).max() <= 1e-10 * np.abs(v).max()


def test_translation_and_rotation_equivariance(uniform_ellipse):
    c = uniform_ellipse
    g = l2_gradient(c, 1.0).values
    v = flow_velocity(c, 1.0).values
    shifted = c.translated([4.0, -7.0])
    assert np.abs(l2_gradient(shifted, 1.0).values - g).max() <= 1e-10 * np.abs(g).max()
    # six derivatives amplify the changed rounding of the shifted samples
    assert np.abs(flow_velocity(shifted, 1.0).values - v).max() <= 1e-8 * np.abs(v).max()
    th = 0.9
    q = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    assert np.abs(flow_velocity(c.transformed(q), 1.0).values - v @ q.T).max() <= 1e-8 * np.abs(v).max()


def test_dissipation_is_residual_squared(uniform_ellipse):
    t = flow_terms(uniform_ellipse, 1.0)
    assert t.residual**2 == pytest.approx(t.dissipation, rel=1e-12)


def test_dealiased_cubic_agrees_on_resolved_curve(uniform_ellipse):
    a = flow_velocity(uniform_ellipse, 1.0).values
    b = flow_velocity(uniform_ellipse, 1.0, dealias=True).values
    assert np.abs(a - b).max() <= 1e-8 * np.abs(a).max()


@given(seed=st.integers(0, 10**6), amp=st.floats(0.01, 0.15))
def test_velocity_mean_vanishes_for_random_curves(seed, amp):
    rng = np.random.default_rng(seed)
    base = circle(128)
    y = amp * smooth_field(rng, 128, 5)
    c = resample_uniform(DiscreteCurve(base.points * (1 + y)[:, None]))
    v = flow_velocity(c, float(rng.uniform(0, 3)))
    assert abs(c.integrate(v.scalar)) <= 1e-8 * max(v.l2_norm(), 1e-300) + 1e-300


@pytest.mark.parametrize("radius,lam", [(1.0, 1.0), (1.0, 0.5), (2.0, 0.1)])
def test_velocity_vanishes_with_stationary_residual_on_circles(radius, lam):
    c = circle(128, radius)
    assert np.abs(flow_velocity(c, lam).values).max() <= 1e-8
    assert analyze(c, lam).residual <= 1e-8


def test_noncircle_has_velocity_and_residual():
    c = resample_uniform(asymmetric_eight(256))
    assert np.abs(flow_velocity(c, 1.0).values).max() > 1e-3
    assert analyze(c, 1.0).residual > 1e-3
