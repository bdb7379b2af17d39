# -*- coding: utf-8 -*-
import warnings

import numpy as np
import pytest
from scipy import special

from hdi.curves import curve_jet, inside_indicator_2d, make_curve
from hdi.errors import AccuracyWarning, ConfigError
from hdi.fields import make_field
from hdi.operators2d import (Density2D, adjoint_double_layer_matrix, assemble_matrix,
                             double_layer_matrix, eval_adjoint_double_layer, eval_double_layer,
                             eval_hypersingular, eval_potential_near, eval_single_layer)
from hdi.solver import solve_dirichlet_2d

from conftest import periodic_nodes


def test_density_derivative_cache():
    t = periodic_nodes(32)
    density = Density2D(np.sin(t))
    d = density.derivatives(2)
    assert d.shape == (3, 32)
    assert np.allclose(d[2], -np.sin(t), atol=1e-12)
    assert np.allclose(density.derivatives_at(np.array([0.25]), 1)[1], np.cos(0.25), atol=1e-12)


def test_single_layer_constant_on_unit_circle(circle):
    assert np.max(np.abs(eval_single_layer(circle, np.ones(256), 4))) < 1e-6


def test_single_layer_constant_on_circle_radius_two():
    curve = make_curve("circle", {"radius": 2.0})
    values = eval_single_layer(curve, np.ones(256), 4)
    assert np.max(np.abs(values + 2 * np.log(2.0))) < 1e-6


@pytest.mark.parametrize("k", [1, 2])
def test_single_layer_fourier_symbol(circle, k):
    t = periodic_nodes(256)
    values = eval_single_layer(circle, np.cos(k * t), 4)
    assert np.max(np.abs(values - np.cos(k * t) / (2 * k))) < 1e-6


@pytest.mark.parametrize("k, expected", [(1, -0.5), (2, -1.0)])
def test_hypersingular_fourier_symbol(circle, k, expected):
    t = periodic_nodes(128)
    values = eval_hypersingular(circle, np.cos(k * t), 2)
    assert np.max(np.abs(values - expected * np.cos(k * t))) < 1e-6


@pytest.mark.parametrize("name", ["circle", "kite", "pinched"])
def test_hypersingular_annihilates_constants(name):
    assert np.max(np.abs(eval_hypersingular(make_curve(name), np.ones(64), 1))) < 1e-10


def test_hypersingular_order_zero_warns(kite):
    with pytest.warns(AccuracyWarning):
        eval_hypersingular(kite, np.ones(32), 0)


@pytest.mark.parametrize("name", ["circle", "kite", "pinched", "ellipse"])
def test_double_layer_of_constant(name):
    values = eval_double_layer(make_curve(name), np.ones(128))
    assert np.max(np.abs(values + 0.5)) < 1e-10


def test_double_layer_circle_identities(circle):
    t = periodic_nodes(64)
    assert np.max(np.abs(eval_double_layer(circle, np.cos(t)))) < 1e-13
    assert np.max(np.abs(eval_adjoint_double_layer(circle, np.ones(64)) + 0.5)) < 1e-13


def test_adjoint_is_transpose_in_weighted_sense(kite):
    n = 48
    jet = curve_jet(kite, periodic_nodes(n), 1)
    w = 2 * np.pi / n * jet.speed
    K = double_layer_matrix(kite, n)
    Kp = adjoint_double_layer_matrix(kite, n)
    # w_i K'_ij = w_j K_ji
    assert np.max(np.abs(w[:, None] * Kp - (w[:, None] * K).T)) < 1e-12


def test_assemble_matrix_matches_evaluator(kite):
    n = 24
    matrix = assemble_matrix(lambda v: eval_single_layer(kite, v, 2), n)
    phi = np.cos(periodic_nodes(n)) + 0.3
    assert np.allclose(matrix @ phi, eval_single_layer(kite, phi, 2), atol=1e-12)


def test_oversampling_reduces_error(kite):
    field = make_field("exp-x2-sin")
    reference = eval_single_layer(kite, field.value(kite.points(periodic_nodes(640))), 5)[::8]
    phi = field.value(kite.points(periodic_nodes(80)))
    plain = np.max(np.abs(eval_single_layer(kite, phi, 2) - reference))
    oversampled = np.max(np.abs(eval_single_layer(kite, phi, 2, oversampling=4) - reference))
    assert oversampled < plain


def test_invalid_oversampling(kite):
    with pytest.raises(ConfigError):
        eval_single_layer(kite, np.ones(16), 2, oversampling=0)


def test_green_identity_on_boundary(kite):
    field = make_field("log-sources", {"sources": [[2.0, 1.0], [-1.5, -2.0]]})
    errors = []
    for n in (32, 64):
        t = periodic_nodes(n)
        jet = curve_jet(kite, t, 1)
        u = field.value(jet.points)
        dnu = field.normal_derivative(jet.points, jet.normal)
        residual = eval_double_layer(kite, u) - eval_single_layer(kite, dnu, 4) + u / 2
        errors.append(np.max(np.abs(residual)))
    assert errors[1] < errors[0] / 8
    assert errors[1] < 1e-4


def test_calderon_on_circle(circle):
    t = periodic_nodes(256)
    for k in (1, 2):
        phi = np.cos(k * t)
        lhs = eval_hypersingular(circle, eval_single_layer(circle, phi, 4), 4)
        rhs = -phi / 4 + eval_double_layer(circle, eval_double_layer(circle, phi))
        assert np.max(np.abs(lhs - rhs)) < 1e-6


# --- Potentiels -----------------------------------------------------------------

def test_potentials_of_constant_density(circle):
    ones = np.ones(64)
    assert eval_potential_near(circle, ones, "D", [0.2, 0.1]) == pytest.approx(-1.0, abs=1e-10)
    assert eval_potential_near(circle, ones, "D", [0.0, 1.5]) == pytest.approx(0.0, abs=1e-10)
    assert eval_potential_near(circle, ones, "S", [2.0, 0.0]) == pytest.approx(-np.log(2.0), abs=1e-10)
    assert eval_potential_near(circle, ones, "S", [0.0, 0.5]) == pytest.approx(0.0, abs=1e-10)
    value, grad = eval_potential_near(circle, ones, "S", [2.0, 0.0], want_gradient=True)
    assert np.allclose(grad, [-0.5, 0.0], atol=1e-10)


def test_double_layer_of_constant_near_boundary(kite):
    jet = curve_jet(kite, np.array([0.4, 2.5]), 1)
    inside = jet.points - 1e-3 * jet.normal
    outside = jet.points + 1e-3 * jet.normal
    ones = np.ones(128)
    assert np.allclose(eval_potential_near(kite, ones, "D", inside), -1.0, atol=1e-8)
    assert np.allclose(eval_potential_near(kite, ones, "D", outside), 0.0, atol=1e-8)


@pytest.mark.parametrize("eps", [1e-3, 0.05, 0.2])
def test_side_test_matches_winding_in_kite_pocket(kite, eps):
    # t autour de π : partie concave du cerf-volant
    jet = curve_jet(kite, np.array([2.6, 2.9, np.pi, 3.4, 3.7]), 1)
    X = np.concatenate([jet.points - eps * jet.normal, jet.points + eps * jet.normal])
    mu = inside_indicator_2d(kite, X)
    assert mu.tolist() == [1.0] * 5 + [0.0] * 5
    ones = np.ones(128)
    assert np.allclose(eval_potential_near(kite, ones, "D", X), -mu, atol=1e-8)


def _exp_cos_potentials(r, theta, terms=30):
    n = np.arange(1, terms)
    coeffs = special.iv(n, 1.0)
    waves = np.cos(np.multiply.outer(theta, n)) * np.power.outer(r, n)
    single = waves @ (coeffs / n)
    double = -special.iv(0, 1.0) - waves @ coeffs
    return single, double


def test_near_field_potentials_on_circle(circle):
    t = periodic_nodes(128)
    phi = np.exp(np.cos(t))
    theta = np.array([0.3, 2.0, 4.1])
    r = np.full(3, 0.99)
    X = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    exact_s, exact_d = _exp_cos_potentials(r, theta)
    for kind, exact in (("S", exact_s), ("D", exact_d)):
        regularized = eval_potential_near(circle, phi, kind, X, M=4)
        plain = eval_potential_near(circle, phi, kind, X, regularize=False)
        error = np.max(np.abs(regularized - exact))
        assert error < 1e-4
        assert np.max(np.abs(plain - exact)) > 10 * error


def test_near_field_gradient(pinched):
    field = make_field("log-sources")
    t = periodic_nodes(200)
    solution = solve_dirichlet_2d(pinched, field.value(pinched.points(t)), "second")
    jet = curve_jet(pinched, np.array([0.5, 3.5]), 1)
    X = jet.points - 0.02 * jet.normal
    values, grads = eval_potential_near(pinched, solution.density, "D", X, M=4, want_gradient=True)
    assert grads.shape == (2, 2)
    assert np.max(np.abs(values - field.value(X))) < 1e-4
    assert np.max(np.abs(grads - field.gradient(X))) < 1e-2


def test_near_field_error_decreases_with_order(pinched):
    field = make_field("exp-sin-ratio")
    phi = field.value(pinched.points(periodic_nodes(200)))
    reference_phi = field.value(pinched.points(periodic_nodes(800)))
    jet = curve_jet(pinched, np.array([0.7, 2.2, 5.0]), 1)
    X = jet.points - 1e-3 * jet.normal
    reference = eval_potential_near(pinched, reference_phi, "S", X, M=5)
    errors = [np.max(np.abs(eval_potential_near(pinched, phi, "S", X, M=M) - reference))
              for M in (0, 2, 4)]
    assert errors[0] > errors[1] > errors[2]


def test_potential_kind_validation(circle):
    with pytest.raises(ConfigError):
        eval_potential_near(circle, np.ones(16), "N", [0.0, 0.0])


def test_far_targets_skip_regularization(circle):
    phi = np.exp(np.cos(periodic_nodes(256)))
    X = np.array([[0.1, 0.0], [3.0, 1.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        regularized = eval_potential_near(circle, phi, "S", X)
    plain = eval_potential_near(circle, phi, "S", X, regularize=False)
    assert np.allclose(regularized, plain, atol=0, rtol=0)
