"""Star-shaped obstacle boundaries and their surface quadrature meshes.

Every shape is a smooth map ``F`` from the unit sphere onto the boundary.
A mesh samples ``F`` on the product grid of ``special.sphere_grid``; the
area element comes from the parametric tangents, so the weights integrate
smooth functions over the boundary with spectral accuracy.
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np

from .special import gauss_legendre, normalized_legendre_dtheta, normalized_legendre_table


class InvalidShape(ValueError):
    pass


class PointClass(str, enum.Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"
    NEAR_BOUNDARY = "near-boundary"


def _angles(u):
    theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
    phi = np.arctan2(u[..., 1], u[..., 0])
    return theta, phi


@dataclass(frozen=True)
class Sphere:
    radius: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)
    kind = "sphere"

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidShape(f"sphere radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def point(self, u):
        return np.asarray(self.center) + self.radius * u

    def push_tangent(self, u, v):
        return self.radius * v

    def radial_extent(self, u):
        return np.full(np.shape(u)[:-1], self.radius)

    @property
    def bounding_radius(self):
        return self.radius

    def area(self):
        return 4 * math.pi * self.radius**2

    def volume(self):
        return 4 * math.pi * self.radius**3 / 3

    def to_dict(self):
        return {"kind": "sphere", "radius": self.radius, "center": list(self.center)}


@dataclass(frozen=True)
class Ellipsoid:
    axes: tuple = (1.0, 1.0, 1.0)
    center: tuple = (0.0, 0.0, 0.0)
    kind = "ellipsoid"

    def __post_init__(self):
        axes = tuple(float(a) for a in self.axes)
        if len(axes) != 3 or min(axes) <= 0:
            raise InvalidShape(f"ellipsoid semi-axes must be three positive numbers, got {self.axes}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def point(self, u):
        return np.asarray(self.center) + np.asarray(self.axes) * u

    def push_tangent(self, u, v):
        return np.asarray(self.axes) * v

    def radial_extent(self, u):
        return 1.0 / np.sqrt(np.sum((u / np.asarray(self.axes)) ** 2, axis=-1))

    @property
    def bounding_radius(self):
        return max(self.axes)

    def volume(self):
        a, b, c = self.axes
        return 4 * math.pi * a * b * c / 3

    def to_dict(self):
        return {"kind": "ellipsoid", "axes": list(self.axes), "center": list(self.center)}


@dataclass(frozen=True)
class StarShape:
    """Radius function ``r(theta, phi) = sum c_nm Ytilde_nm`` about ``center``.

    ``Ytilde_nm`` is the orthonormalised Legendre function times ``cos(m phi)``
    for ``m >= 0`` and times ``sin(|m| phi)`` for ``m < 0``. ``coefficients``
    is a sequence of ``(n, m, value)`` triples.
    """

    coefficients: tuple
    center: tuple = (0.0, 0.0, 0.0)
    kind = "star"
    _nmax: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple((int(n), int(m), float(c)) for n, m, c in self.coefficients)
        if not coeffs:
            raise InvalidShape("star shape needs at least one coefficient")
        for n, m, _ in coeffs:
            if n < 0 or abs(m) > n:
                raise InvalidShape(f"bad harmonic index (n={n}, m={m})")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "_nmax", max(n for n, _, _ in coeffs))

    def _radius_and_grad(self, u):
        theta, phi = _angles(u)
        theta = np.clip(theta, 1e-9, math.pi - 1e-9)
        table = normalized_legendre_table(self._nmax, np.cos(theta))
        dtable = normalized_legendre_dtheta(table, theta)
        r = np.zeros(theta.shape)
        r_t = np.zeros(theta.shape)
        r_p = np.zeros(theta.shape)
        for n, m, c in self.coefficients:
            am = abs(m)
            trig = np.cos(am * phi) if m >= 0 else np.sin(am * phi)
            dtrig = -am * np.sin(am * phi) if m >= 0 else am * np.cos(am * phi)
            r += c * table[n, am] * trig
            r_t += c * dtable[n, am] * trig
            r_p += c * table[n, am] * dtrig
        st, ct = np.sin(theta), np.cos(theta)
        e_t = np.stack([ct * np.cos(phi), ct * np.sin(phi), -st], axis=-1)
        e_p = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
        grad = r_t[..., None] * e_t + (r_p / st)[..., None] * e_p
        return r, grad

    def radial_extent(self, u):
        return self._radius_and_grad(np.asarray(u, dtype=float))[0]

    def point(self, u):
        r, _ = self._radius_and_grad(u)
        return np.asarray(self.center) + r[..., None] * u

    def push_tangent(self, u, v):
        r, grad = self._radius_and_grad(u)
        return r[..., None] * v + np.sum(grad * v, axis=-1)[..., None] * u

    @property
    def bounding_radius(self):
        grid = _unit_grid(24, 48)
        return float(np.max(self.radial_extent(grid)))

    def to_dict(self):
        return {"kind": "star", "coefficients": [list(c) for c in self.coefficients], "center": list(self.center)}


def _unit_grid(n_theta, n_phi):
    t, _ = gauss_legendre(n_theta)
    th = np.arccos(t)
    ph = 2 * math.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    return np.stack([np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], axis=-1).reshape(-1, 3)


def shape_from_dict(d):
    """Build a shape from its JSON description."""
    kind = d.get("kind")
    center = d.get("center", (0.0, 0.0, 0.0))
    if kind == "sphere":
        return Sphere(float(d.get("radius", 1.0)), center)
    if kind == "ellipsoid":
        return Ellipsoid(tuple(d["axes"]), center)
    if kind == "star":
        return StarShape(tuple(tuple(c) for c in d["coefficients"]), center)
    raise InvalidShape(f"unknown shape kind {kind!r}")


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    shape: object
    resolution: tuple

    def __len__(self):
        return len(self.weights)

    @property
    def spacing(self):
        """Local node spacing estimate ``sqrt(weight)``."""
        return np.sqrt(self.weights)

    def grid(self, values):
        """Reshape per-node data onto the (n_theta, n_phi) parameter grid."""
        return np.reshape(values, self.resolution + np.shape(values)[1:])


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * k @ k


# fixed rotation that moves every node of a product grid off its original position
HELD_OUT_ROTATION = rotation_matrix((0.3, -0.5, 0.8), 0.7)


def build_mesh(shape, n_theta, n_phi, rotation=None):
    """Quadrature mesh of the boundary of ``shape``.

    Parameters
    ----------
    shape : Sphere, Ellipsoid or StarShape
    n_theta, n_phi : int
        Gauss-Legendre nodes in ``cos(theta)`` and trapezoid nodes in ``phi``.
    rotation : (3, 3) array, optional
        Rotate the parameter sphere before mapping; used for held-out meshes.
    """
    if n_theta < 4 or n_phi < 8:
        raise ValueError(f"mesh too coarse: need n_theta >= 4 and n_phi >= 8, got {n_theta}x{n_phi}")
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    t, w = gauss_legendre(n_theta)
    t, w = t[::-1], w[::-1]
    theta = np.arccos(t)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    st, ct, sp, cp = np.sin(TH), np.cos(TH), np.sin(PH), np.cos(PH)
    u = np.stack([st * cp, st * sp, ct], axis=-1) @ rot.T
    u_t = np.stack([ct * cp, ct * sp, -st], axis=-1) @ rot.T
    u_p = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1) @ rot.T
    u, u_t, u_p = (a.reshape(-1, 3) for a in (u, u_t, u_p))

    if isinstance(shape, StarShape) and np.any(shape.radial_extent(u) <= 0):
        raise InvalidShape("star radius function is not positive on the mesh")
    nodes = shape.point(u)
    x_t = shape.push_tangent(u, u_t)
    x_p = shape.push_tangent(u, u_p)
    cross = np.cross(x_t, x_p)
    jac = np.linalg.norm(cross, axis=-1)
    normals = cross / jac[:, None]
    weights = (np.repeat(w, n_phi) * (2 * math.pi / n_phi)) * jac / st.ravel()
    return SurfaceMesh(nodes, normals, weights, shape, (n_theta, n_phi))


SOURCE_LAYOUTS = ("auto", "scaled", "confocal")


def auxiliary_surface(mesh, shrink, layout="auto"):
    """Interior source points from every other mesh node in each direction.

    ``scaled`` maps a node to ``center + shrink (node - center)``.
    ``confocal`` (ellipsoids only) maps it onto the inner confocal ellipsoid
    whose smallest semi-axis is ``shrink`` times the obstacle's, which keeps
    the sources of an elongated body close to its focal set, where the
    continued scattered field is singular. ``auto`` picks ``confocal`` for
    ellipsoids and ``scaled`` otherwise; for a sphere both coincide.
    """
    if not 0 < shrink < 1:
        raise ValueError(f"shrink must lie in (0, 1), got {shrink}")
    if layout not in SOURCE_LAYOUTS:
        raise ValueError(f"unknown source layout {layout!r}; choose from {SOURCE_LAYOUTS}")
    is_ellipsoid = isinstance(mesh.shape, Ellipsoid)
    if layout == "confocal" and not is_ellipsoid:
        raise ValueError("confocal source layout needs an ellipsoid")
    center = np.asarray(mesh.shape.center)
    sub = mesh.grid(mesh.nodes)[::2, ::2].reshape(-1, 3)
    if is_ellipsoid and layout != "scaled":
        axes = np.asarray(mesh.shape.axes)
        inner = np.sqrt(axes**2 - (1 - shrink**2) * axes.min() ** 2)
        return center + (sub - center) / axes * inner
    return center + shrink * (sub - center)


def point_classification(shape, x):
    x = np.asarray(x, dtype=float)
    d = x - np.asarray(shape.center)
    r = np.linalg.norm(d)
    band = 1e-6 * 2 * shape.bounding_radius
    if r == 0:
        return PointClass.INTERIOR
    gap = r - float(shape.radial_extent(d / r))
    if abs(gap) <= band:
        return PointClass.NEAR_BOUNDARY
    return PointClass.EXTERIOR if gap > 0 else PointClass.INTERIOR


def signed_gap(shape, x):
    """Radial distance outside the boundary along the ray from the center (vectorised)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x - np.asarray(shape.center)
    r = np.linalg.norm(d, axis=-1)
    u = d / np.where(r > 0, r, 1.0)[:, None]
    return r - shape.radial_extent(u)
