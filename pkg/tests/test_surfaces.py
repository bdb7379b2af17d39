# -*- coding: utf-8 -*-
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdi.errors import ConfigError
from hdi.surfaces import (CUBE_FACES, Patch, enclosed_volume, inside_indicator_3d, make_surface,
                          nearest_point_3d, patch_jet, surface_area)


def test_flat_patch_jet():
    patch = Patch(kind="flat", center=np.array([0.0, 0.0, -1.0]))
    jet = patch_jet(patch, [0.3, -0.2])
    assert np.allclose(jet.x, [0.3, -0.2, 0.0])
    assert np.allclose(jet.normal, [0.0, 0.0, 1.0])
    assert jet.element == pytest.approx(1.0)
    for second in (jet.d11, jet.d12, jet.d22, jet.dn1, jet.dn2):
        assert np.allclose(second, 0.0)


def test_sphere_top_face_center():
    jet = patch_jet(Patch(kind="spherical", face=CUBE_FACES[0]), [0.0, 0.0])
    assert np.allclose(jet.x, [0.0, 0.0, 1.0])
    assert np.allclose(jet.normal, [0.0, 0.0, 1.0])


def test_cube_faces_are_rotations():
    for face in CUBE_FACES:
        assert np.linalg.det(face) == pytest.approx(1.0)


@pytest.mark.parametrize("name, params", [("sphere", {}), ("ellipsoid", {"axes": [1.0, 0.8, 0.6]}),
                                          ("parallelepiped", {"sides": [2.0, 1.0, 3.0]})])
def test_jets_match_finite_differences(name, params):
    surface = make_surface(name, params, n=6)
    patch = surface.patches[2]
    xi = np.array([0.21, -0.37])
    step = 1e-5
    jet = patch_jet(patch, xi)
    plus = patch_jet(patch, xi + [step, 0.0])
    minus = patch_jet(patch, xi - [step, 0.0])
    assert np.allclose(jet.d1, (plus.x - minus.x) / (2 * step), atol=1e-8)
    assert np.allclose(jet.d11, (plus.d1 - minus.d1) / (2 * step), atol=1e-7)
    assert np.allclose(jet.dn1, (plus.normal - minus.normal) / (2 * step), atol=1e-7)
    up = patch_jet(patch, xi + [0.0, step])
    down = patch_jet(patch, xi - [0.0, step])
    assert np.allclose(jet.d12, (up.d1 - down.d1) / (2 * step), atol=1e-7)
    assert np.allclose(jet.dn2, (up.normal - down.normal) / (2 * step), atol=1e-7)


def test_ellipsoid_pole_normal():
    surface = make_surface("ellipsoid", {"axes": [1.0, 1.0, 2.0]}, n=8)
    p, xi = nearest_point_3d(surface, [0.0, 0.0, 2.5])
    jet = patch_jet(surface.patches[p], xi)
    assert np.allclose(jet.x, [0.0, 0.0, 2.0], atol=1e-8)
    assert np.allclose(jet.normal, [0.0, 0.0, 1.0], atol=1e-8)


def test_sphere_area_and_volume(sphere16):
    assert surface_area(sphere16) == pytest.approx(4 * np.pi, abs=1e-6)
    assert enclosed_volume(sphere16) == pytest.approx(4 * np.pi / 3, rel=1e-2)


def test_parallelepiped_area():
    surface = make_surface("parallelepiped", {"sides": [2.0, 1.0, 3.0]}, n=4)
    assert surface_area(surface) == pytest.approx(2 * (2 + 6 + 3), rel=1e-12)
    assert enclosed_volume(surface) == pytest.approx(6.0, rel=1e-12)


def test_outward_normals(sphere12):
    assert np.allclose(sphere12.normals, sphere12.points, atol=1e-12)
    assert sphere12.size == 6 * 144
    assert sphere12.n_bodies == 1


def test_two_spheres_bodies():
    surface = make_surface("two-spheres", {"radius": 1.0, "gap": 0.05}, n=6)
    assert surface.n_bodies == 2
    left = surface.points[surface.body_mask(0)]
    right = surface.points[surface.body_mask(1)]
    assert left[:, 0].max() < -0.025 < 0.025 < right[:, 0].min()
    centers = np.array([-1.025, 0.0, 0.0]), np.array([1.025, 0.0, 0.0])
    outward = np.sum((left - centers[0]) * surface.normals[surface.body_mask(0)], axis=-1)
    assert np.all(outward > 0)


def _sphere_grids(n):
    sphere = make_surface("sphere", n=n)
    return [sphere.points[sphere.patch_slice(p)].reshape(n, n, 3) for p in range(6)]


def test_tabulated_surface():
    surface = make_surface("tabulated", {"grids": [g.tolist() for g in _sphere_grids(12)]}, n=12)
    assert surface_area(surface) == pytest.approx(4 * np.pi, rel=1e-3)


def test_tabulated_orientation_is_repaired():
    flipped = [np.swapaxes(g, 0, 1) for g in _sphere_grids(12)]
    surface = make_surface("tabulated", {"grids": flipped}, n=12)
    assert all(p.swap for p in surface.patches)
    assert enclosed_volume(surface) == pytest.approx(4 * np.pi / 3, rel=1e-2)


def test_tabulated_from_file(tmp_path):
    rows = [np.column_stack([np.full(g.shape[0] * g.shape[1], p), g.reshape(-1, 3)])
            for p, g in enumerate(_sphere_grids(8))]
    path = tmp_path / "sphere.txt"
    np.savetxt(path, np.vstack(rows))
    surface = make_surface("tabulated", {"path": str(path)}, n=8)
    assert surface.n_patches == 6
    assert surface_area(surface) == pytest.approx(4 * np.pi, rel=1e-2)


def test_registry_errors():
    with pytest.raises(ConfigError):
        make_surface("bean")
    with pytest.raises(ConfigError):
        make_surface("sphere", {"diameter": 2.0})
    with pytest.raises(ConfigError):
        make_surface("sphere", n=1)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(1.05, 2.0))
def test_nearest_point_on_sphere(a, b, c, radius):
    direction = np.array([a, b, c])
    if np.linalg.norm(direction) < 1e-3:
        direction = np.array([0.0, 0.0, 1.0])
    direction /= np.linalg.norm(direction)
    surface = make_surface("sphere", n=8)
    p, xi = nearest_point_3d(surface, radius * direction)
    assert np.allclose(patch_jet(surface.patches[p], xi).x, direction, atol=1e-8)


def test_inside_indicator(sphere12):
    mu = inside_indicator_3d(sphere12, [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.1, 0.2, -0.3]])
    assert mu.tolist() == [1.0, 0.0, 1.0]
    pair = make_surface("two-spheres", {"gap": 0.5}, n=10)
    assert inside_indicator_3d(pair, [[0.0, 0.0, 0.0]]).tolist() == [0.0]
