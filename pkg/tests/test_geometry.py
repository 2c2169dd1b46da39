import math

import numpy as np
import pytest

from elastoscatter.geometry import (
    HELD_OUT_ROTATION,
    Ellipsoid,
    InvalidShape,
    PointClass,
    Sphere,
    StarShape,
    auxiliary_surface,
    build_mesh,
    point_classification,
    rotation_matrix,
    shape_from_dict,
    signed_gap,
)
from elastoscatter.special import sphere_grid

BUMPY = StarShape(((0, 0, 1.0 * math.sqrt(4 * math.pi)), (2, 0, 0.15), (3, 2, 0.1), (1, -1, 0.08)))


def prolate_area(a, b):
    e = math.sqrt(1 - b * b / (a * a))
    return 2 * math.pi * b * b * (1 + a / (b * e) * math.asin(e))


def oblate_area(a, c):
    e = math.sqrt(1 - c * c / (a * a))
    return 2 * math.pi * a * a * (1 + (1 - e * e) / e * math.atanh(e))


@pytest.mark.parametrize("res", [(8, 16), (24, 48)])
def test_sphere_area(res):
    m = build_mesh(Sphere(2.0), *res)
    assert m.weights.sum() == pytest.approx(16 * math.pi, rel=1e-13)


@pytest.mark.parametrize("axes,area", [
    ((1.3, 1.0, 1.0), prolate_area(1.3, 1.0)),
    ((1.0, 1.0, 2.0), prolate_area(2.0, 1.0)),
    ((1.5, 1.5, 0.8), oblate_area(1.5, 0.8)),
])
def test_spheroid_area_oracle(axes, area):
    m = build_mesh(Ellipsoid(axes), 32, 64)
    assert m.weights.sum() == pytest.approx(area, rel=1e-10)


@pytest.mark.parametrize("shape", [Sphere(0.7, (1.0, -2.0, 0.5)), Ellipsoid((1.3, 1.0, 0.6), (0.0, 1.0, 0.0)), BUMPY])
def test_divergence_theorem_volume(shape):
    m = build_mesh(shape, 32, 64)
    x = m.nodes - np.asarray(shape.center)
    vol = np.sum(m.weights * np.einsum("ni,ni->n", x, m.normals)) / 3
    if isinstance(shape, StarShape):
        g = sphere_grid(48, 96)
        ref = np.sum(g.weights * shape.radial_extent(g.directions) ** 3) / 3
    else:
        ref = shape.volume()
    assert vol == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("shape", [Ellipsoid((1.3, 1.0, 0.7)), BUMPY])
def test_closed_surface_normal_integral_vanishes(shape):
    m = build_mesh(shape, 32, 64)
    assert np.abs(m.weights @ m.normals).max() < 1e-10


def test_ellipsoid_normals_match_implicit_gradient():
    axes = np.array([1.3, 1.0, 0.7])
    m = build_mesh(Ellipsoid(tuple(axes)), 12, 24)
    g = m.nodes / axes**2
    np.testing.assert_allclose(m.normals, g / np.linalg.norm(g, axis=1)[:, None], atol=1e-14)


def test_constant_star_shape_is_sphere():
    s = StarShape(((0, 0, 2 * math.sqrt(4 * math.pi)),))
    m = build_mesh(s, 12, 24)
    np.testing.assert_allclose(np.linalg.norm(m.nodes, axis=1), 2.0, atol=1e-13)
    np.testing.assert_allclose(m.normals, m.nodes / 2.0, atol=1e-12)


def test_rotated_mesh_is_disjoint_and_same_area():
    shape = Ellipsoid((1.3, 1.0, 1.0))
    m = build_mesh(shape, 16, 32)
    r = build_mesh(shape, 16, 32, rotation=HELD_OUT_ROTATION)
    assert r.weights.sum() == pytest.approx(m.weights.sum(), rel=1e-12)
    d = np.linalg.norm(m.nodes[:, None] - r.nodes[None], axis=-1)
    assert d.min() > 1e-3
    np.testing.assert_allclose(signed_gap(shape, r.nodes), 0.0, atol=1e-13)


def test_rotation_matrix_orthogonal():
    q = rotation_matrix((1.0, 2.0, -0.5), 0.9)
    np.testing.assert_allclose(q @ q.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(q) == pytest.approx(1.0)


def test_auxiliary_surface_sphere_radius():
    m = build_mesh(Sphere(), 24, 48)
    src = auxiliary_surface(m, 0.5)
    assert len(src) == 12 * 24
    np.testing.assert_allclose(np.linalg.norm(src, axis=1), 0.5, atol=1e-15)


@pytest.mark.parametrize("layout", ["scaled", "confocal", "auto"])
def test_auxiliary_surface_ellipsoid_interior(layout):
    axes = np.array([1.3, 1.0, 1.0])
    m = build_mesh(Ellipsoid(tuple(axes)), 24, 48)
    src = auxiliary_surface(m, 0.7, layout)
    assert np.all(np.sum((src / axes) ** 2, axis=1) < 1)


def test_confocal_layout_shares_foci():
    axes = np.array([1.3, 1.0, 0.8])
    m = build_mesh(Ellipsoid(tuple(axes)), 12, 24)
    src = auxiliary_surface(m, 0.4, "confocal")
    inner = np.sqrt(axes**2 - (1 - 0.4**2) * 0.8**2)
    np.testing.assert_allclose(np.sum((src / inner) ** 2, axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(axes**2 - inner**2, (1 - 0.4**2) * 0.64, atol=1e-15)


def test_auxiliary_layouts_coincide_for_sphere_like_ellipsoid():
    m = build_mesh(Ellipsoid((1.0, 1.0, 1.0)), 12, 24)
    np.testing.assert_allclose(auxiliary_surface(m, 0.3, "confocal"), auxiliary_surface(m, 0.3, "scaled"), atol=1e-15)


@pytest.mark.parametrize("shrink", [0.0, 1.0, 1.5, -0.2])
def test_auxiliary_surface_rejects_shrink(shrink):
    with pytest.raises(ValueError):
        auxiliary_surface(build_mesh(Sphere(), 8, 16), shrink)


def test_confocal_layout_needs_ellipsoid():
    with pytest.raises(ValueError):
        auxiliary_surface(build_mesh(Sphere(), 8, 16), 0.5, "confocal")


def test_point_classification():
    s = Ellipsoid((1.3, 1.0, 1.0))
    assert point_classification(s, (2.0, 0.0, 0.0)) == PointClass.EXTERIOR
    assert point_classification(s, (0.5, 0.0, 0.0)) == PointClass.INTERIOR
    assert point_classification(s, (1.3, 0.0, 0.0)) == PointClass.NEAR_BOUNDARY
    assert point_classification(s, (0.0, 0.0, 0.0)) == PointClass.INTERIOR


@pytest.mark.parametrize("shape", [Sphere(1.5, (0.0, 0.0, 3.0)), Ellipsoid((1.3, 1.0, 1.0)), BUMPY])
def test_shape_dict_round_trip(shape):
    assert shape_from_dict(shape.to_dict()) == shape


@pytest.mark.parametrize("d", [{"kind": "cube"}, {"kind": "sphere", "radius": -1.0}, {"kind": "ellipsoid", "axes": [1, 0, 1]}])
def test_invalid_shapes(d):
    with pytest.raises((InvalidShape, ValueError)):
        shape_from_dict(d)


def test_star_shape_with_nonpositive_radius_rejected_by_mesh():
    s = StarShape(((0, 0, 0.1), (1, 0, 2.0)))
    with pytest.raises(InvalidShape):
        build_mesh(s, 8, 16)


@pytest.mark.parametrize("res", [(3, 16), (8, 4)])
def test_mesh_too_coarse(res):
    with pytest.raises(ValueError):
        build_mesh(Sphere(), *res)
