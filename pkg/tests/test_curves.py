# -*- coding: utf-8 -*-
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdi.curves import (curve_jet, curve_length, inside_indicator_2d, make_curve, nearest_point_2d,
                        nearest_points_2d, signed_area)
from hdi.errors import ConfigError, NonUniqueFootPointWarning, RegularityError
from hdi.spectral import periodic_derivative

from conftest import periodic_nodes


def test_circle_derivatives(circle):
    t = np.array([0.0, 0.4, 2.0])
    zeta = circle.derivatives(t, 4)
    for k in range(5):
        assert np.allclose(zeta[k], 1j ** k * np.exp(1j * t), atol=1e-14)


@pytest.mark.parametrize("name", ["kite", "pinched", "ellipse"])
def test_analytic_jets_match_spectral_derivatives(name):
    curve = make_curve(name)
    t = periodic_nodes(256)
    zeta = curve.derivatives(t, 3)
    for k in (1, 2, 3):
        spectral = (periodic_derivative(zeta[0].real, k) + 1j * periodic_derivative(zeta[0].imag, k))
        assert np.max(np.abs(zeta[k] - spectral)) < 1e-8


@pytest.mark.parametrize("name", ["circle", "kite", "pinched"])
def test_normals_unit_and_orthogonal(name):
    jet = curve_jet(make_curve(name), periodic_nodes(64), 2)
    tangent = jet.derivative(1)
    assert np.allclose(np.linalg.norm(jet.normal, axis=-1), 1.0, atol=1e-12)
    assert np.allclose(np.sum(jet.normal * tangent, axis=-1), 0.0, atol=1e-12)


def test_circle_normal_points_outward(circle):
    jet = curve_jet(circle, periodic_nodes(16), 1)
    assert np.allclose(jet.normal, jet.points, atol=1e-14)


def test_area_and_length():
    assert signed_area(make_curve("circle", {"radius": 2.0})) == pytest.approx(4 * np.pi)
    assert signed_area(make_curve("ellipse", {"a": 1.0, "b": 0.5})) == pytest.approx(np.pi / 2)
    assert signed_area(make_curve("kite")) > 0
    assert curve_length(make_curve("circle")) == pytest.approx(2 * np.pi)


def test_center_and_angle():
    curve = make_curve("ellipse", {"a": 2.0, "b": 1.0, "center": [1.0, -1.0], "angle": np.pi / 2})
    assert np.allclose(curve.points(0.0), [1.0, 1.0], atol=1e-14)


def test_registry_errors():
    with pytest.raises(ConfigError):
        make_curve("bean")
    with pytest.raises(ConfigError):
        make_curve("circle", {"diameter": 2.0})
    with pytest.raises(ConfigError):
        make_curve("custom-samples")


def test_custom_samples_reproduce_circle():
    t = periodic_nodes(64)
    curve = make_curve("custom-samples", {"samples": np.stack([np.cos(t), np.sin(t)], axis=-1).tolist()})
    s = np.array([0.1, 1.3, 5.0])
    zeta = curve.derivatives(s, 2)
    assert np.allclose(zeta[0], np.exp(1j * s), atol=1e-12)
    assert np.allclose(zeta[2], -np.exp(1j * s), atol=1e-11)


def test_custom_samples_from_file(tmp_path):
    t = periodic_nodes(32)
    path = tmp_path / "ellipse.txt"
    np.savetxt(path, np.stack([2 * np.cos(t), np.sin(t)], axis=-1))
    curve = make_curve("custom-samples", {"path": str(path)})
    assert signed_area(curve) == pytest.approx(2 * np.pi, rel=1e-10)


def test_clockwise_samples_are_reoriented(caplog):
    t = periodic_nodes(64)
    table = np.stack([np.cos(t), -np.sin(t)], axis=-1)
    curve = make_curve("custom-samples", {"samples": table.tolist()})
    assert "sens horaire" in caplog.text
    assert signed_area(curve) == pytest.approx(np.pi, rel=1e-10)
    s = np.array([0.0, 0.7, 3.1])
    jet = curve_jet(curve, s, 1)
    assert np.allclose(jet.points, np.stack([np.cos(s), np.sin(s)], axis=-1), atol=1e-12)
    assert np.allclose(jet.normal, jet.points, atol=1e-12)
    assert np.all(inside_indicator_2d(curve, np.array([[0.0, 0.0], [0.3, -0.2]])) == 1.0)


def test_degenerate_curve_is_rejected():
    curve = make_curve("custom-samples", {"samples": [[0.5, 0.5]] * 8})
    with pytest.raises(RegularityError):
        curve_jet(curve, periodic_nodes(8), 1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2 * np.pi, exclude_max=True), st.floats(0.3, 1.8))
def test_nearest_point_on_circle(theta, radius):
    x = radius * np.array([np.cos(theta), np.sin(theta)])
    t0 = nearest_point_2d(make_curve("circle"), x)
    gap = np.angle(np.exp(1j * (t0 - theta)))
    assert abs(gap) < 1e-9


def test_nearest_point_on_ellipse():
    curve = make_curve("ellipse", {"a": 1.0, "b": 0.5})
    assert nearest_point_2d(curve, [0.0, 0.2]) == pytest.approx(np.pi / 2, abs=1e-9)


def test_nearest_points_kite_stationarity(kite):
    X = np.array([[1.2, 0.1], [-0.2, 1.4], [-1.0, -1.0], [0.3, 0.0]])
    t0 = nearest_points_2d(kite, X)
    zeta = kite.derivatives(t0, 1)
    diff = zeta[0] - (X[:, 0] + 1j * X[:, 1])
    assert np.max(np.abs(np.real(np.conj(diff) * zeta[1]))) < 1e-9


def test_nearest_point_at_circle_center_warns(circle):
    with pytest.warns(NonUniqueFootPointWarning):
        t0 = nearest_point_2d(circle, [0.0, 0.0])
    assert 0.0 <= t0 < 2 * np.pi


def test_inside_indicator(kite, pinched):
    mu = inside_indicator_2d(kite, np.array([[0.0, 0.0], [2.0, 0.0], [-0.5, 1.0], [0.0, 3.0]]))
    assert mu.tolist() == [1.0, 0.0, 1.0, 0.0]
    near = inside_indicator_2d(pinched, np.array([[0.999, 0.0], [1.001, 0.0]]))
    assert near.tolist() == [1.0, 0.0]


def test_nearest_point_symmetric_cases(circle):
    assert nearest_point_2d(circle, [2.0, 0.0]) == pytest.approx(0.0, abs=1e-10)
    assert nearest_point_2d(circle, [0.0, -3.0]) == pytest.approx(3 * np.pi / 2, abs=1e-10)
    ellipse = make_curve("ellipse", {"a": 2.0, "b": 1.0})
    assert nearest_point_2d(ellipse, [0.0, 2.0]) == pytest.approx(np.pi / 2, abs=1e-10)


@pytest.mark.parametrize("name", ["kite", "pinched", "ellipse"])
@pytest.mark.parametrize("eps", [-1e-2, -1e-3, 1e-3, 1e-2])
def test_nearest_point_recovers_offset_parameter(name, eps):
    curve = make_curve(name)
    t = np.array([0.3, 1.9, 4.4])
    jet = curve_jet(curve, t, 1)
    t0 = nearest_points_2d(curve, jet.points + eps * jet.normal)
    assert np.max(np.abs(np.angle(np.exp(1j * (t0 - t))))) < 1e-8
