# -*- coding: utf-8 -*-
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from hdi.errors import SpectralError
from hdi.spectral import (PeriodicSamples, cheb_coefficients, cheb_grid, cheb_grid_diff,
                          cheb_series_jet, fourier_diff, trapezoid_sum, trig_interp_eval,
                          trig_resample)

from conftest import periodic_nodes


def test_trapezoid_constant():
    assert trapezoid_sum(np.ones(20)) == pytest.approx(2 * np.pi, abs=1e-14)


def test_trapezoid_sin_squared():
    t = periodic_nodes(32)
    assert trapezoid_sum(np.sin(t) ** 2) == pytest.approx(np.pi, abs=1e-14)


def test_trapezoid_exp_sin_matches_bessel():
    t = periodic_nodes(64)
    assert trapezoid_sum(np.exp(np.sin(t))) == pytest.approx(2 * np.pi * special.i0(1.0), abs=1e-13)


def test_samples_validation():
    with pytest.raises(SpectralError):
        PeriodicSamples(np.ones(7))
    with pytest.raises(SpectralError):
        PeriodicSamples(np.ones(2))
    with pytest.raises(SpectralError):
        PeriodicSamples(np.array([1.0, np.nan, 0.0, 1.0]))


def test_samples_grid():
    samples = PeriodicSamples(np.zeros(8))
    assert samples.N == 4
    assert samples.h == pytest.approx(np.pi / 4)
    assert samples.nodes[-1] == pytest.approx(7 * np.pi / 4)


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_fourier_diff_trig_polynomial(order):
    t = periodic_nodes(32)
    derivative = fourier_diff(np.sin(3 * t), order).values
    expected = 3.0 ** order * np.sin(3 * t + order * np.pi / 2)
    assert np.max(np.abs(derivative - expected)) < 1e-9


def test_fourier_diff_order_limit():
    with pytest.raises(SpectralError):
        fourier_diff(np.ones(16), 9)
    with pytest.raises(SpectralError):
        fourier_diff(np.ones(16), -1)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(0, 2 * np.pi))
def test_trig_interp_exact_for_band_limited(coeffs, t):
    a0, a1, b2, a3 = coeffs

    def f(x):
        return a0 + a1 * np.cos(x) + b2 * np.sin(2 * x) + a3 * np.cos(3 * x)

    samples = PeriodicSamples(f(periodic_nodes(16)))
    assert trig_interp_eval(samples, t) == pytest.approx(f(t), abs=1e-12)
    derivative = -a1 * np.sin(t) + 2 * b2 * np.cos(2 * t) - 3 * a3 * np.sin(3 * t)
    assert trig_interp_eval(samples, t, 1) == pytest.approx(derivative, abs=1e-11)


def test_trig_interp_at_nodes_matches_fourier_diff():
    t = periodic_nodes(16)
    values = np.exp(np.cos(t))
    for order in range(3):
        at_nodes = trig_interp_eval(values, t, order)
        assert np.max(np.abs(at_nodes - fourier_diff(values, order).values)) < 1e-10


def test_trig_resample_preserves_interpolant():
    t = periodic_nodes(16)
    fine = trig_resample(np.cos(2 * t) + np.sin(t), 64)
    tf = periodic_nodes(64)
    assert len(fine) == 64
    assert np.max(np.abs(fine.values - (np.cos(2 * tf) + np.sin(tf)))) < 1e-12


def test_trig_resample_rejects_downsampling():
    with pytest.raises(SpectralError):
        trig_resample(np.ones(16), 8)


def test_cheb_grid_small_cases():
    one = cheb_grid(1)
    assert one.nodes == pytest.approx([0.0], abs=1e-15)
    assert one.weights == pytest.approx([2.0])
    two = cheb_grid(2)
    assert two.nodes == pytest.approx([np.sqrt(2) / 2, -np.sqrt(2) / 2])
    assert two.weights == pytest.approx([1.0, 1.0])
    three = cheb_grid(3)
    assert np.sum(three.weights * three.nodes ** 2) == pytest.approx(2 / 3, abs=1e-14)


def test_cheb_grid_empty():
    with pytest.raises(SpectralError):
        cheb_grid(0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.data())
def test_fejer_exact_on_polynomials(n, data):
    k = data.draw(st.integers(0, n - 1))
    grid = cheb_grid(n)
    expected = 0.0 if k % 2 else 2.0 / (k + 1)
    assert np.sum(grid.weights * grid.nodes ** k) == pytest.approx(expected, abs=1e-12)


def _grid_values(n, func):
    nodes = cheb_grid(n).nodes
    x1, x2 = np.meshgrid(nodes, nodes, indexing="ij")
    return x1, x2, func(x1, x2)


def test_cheb_grid_diff_polynomial():
    x1, x2, values = _grid_values(10, lambda a, b: a ** 3 * b ** 2 + a)
    assert np.max(np.abs(cheb_grid_diff(values, (1, 0)) - (3 * x1 ** 2 * x2 ** 2 + 1))) < 1e-10
    assert np.max(np.abs(cheb_grid_diff(values, (2, 1)) - 12 * x1 * x2)) < 1e-9
    assert np.max(np.abs(cheb_grid_diff(values, (0, 0)) - values)) == 0.0


def test_cheb_grid_diff_vector_components():
    x1, x2, _ = _grid_values(8, lambda a, b: a)
    values = np.stack([x1 * x2, x2 ** 2, np.ones_like(x1)], axis=-1)
    d = cheb_grid_diff(values, (0, 1))
    assert np.max(np.abs(d - np.stack([x1, 2 * x2, 0 * x1], axis=-1))) < 1e-12


def test_cheb_grid_diff_limits():
    values = np.zeros((4, 4))
    with pytest.raises(SpectralError):
        cheb_grid_diff(values, (3, 2))
    with pytest.raises(SpectralError):
        cheb_grid_diff(np.zeros((3, 3)), (3, 0))
    with pytest.raises(SpectralError):
        cheb_grid_diff(np.zeros((4, 5)), (1, 0))


def test_cheb_series_jet_off_grid():
    _, _, values = _grid_values(8, lambda a, b: a ** 2 * b + 3 * b ** 3)
    coeffs = cheb_coefficients(values)
    xi1 = np.array([0.3, -0.7])
    xi2 = np.array([0.1, 0.55])
    jet = cheb_series_jet(coeffs, xi1, xi2)
    assert np.allclose(jet[(0, 0)], xi1 ** 2 * xi2 + 3 * xi2 ** 3, atol=1e-13)
    assert np.allclose(jet[(1, 1)], 2 * xi1, atol=1e-12)
    assert np.allclose(jet[(0, 2)], 18 * xi2, atol=1e-11)


def test_cheb_series_jet_components_last():
    x1, x2, _ = _grid_values(6, lambda a, b: a)
    coeffs = cheb_coefficients(np.stack([x1, x2, x1 * x2], axis=-1))
    jet = cheb_series_jet(coeffs, np.array([0.2]), np.array([-0.4]))
    assert jet[(0, 0)].shape == (1, 3)
    assert np.allclose(jet[(0, 0)][0], [0.2, -0.4, -0.08], atol=1e-13)
    assert np.allclose(jet[(1, 0)][0], [1.0, 0.0, -0.4], atol=1e-12)
