"""Exterior scattering by fundamental-solution collocation.

The scattered field is a finite sum of Kupradze sources placed on an interior
auxiliary surface, so it radiates by construction. Source strengths are the
least-squares fit (truncated SVD) of the boundary condition at the mesh
nodes; the achieved accuracy is measured on a rotated, held-out mesh.
"""

from dataclasses import dataclass, field
import enum
from functools import lru_cache
import logging

import numpy as np

from . import kernels
from .core import Material, PlaneWave, traction
from .geometry import HELD_OUT_ROTATION, auxiliary_surface, build_mesh, signed_gap

logger = logging.getLogger(__name__)


class IllConditioned(RuntimeError):
    pass


class GeometryError(ValueError):
    pass


class BCKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


@dataclass(frozen=True)
class BoundaryCondition:
    """``u = 0`` (rigid), ``T u = 0`` (cavity) or ``T u + h u = 0`` (absorbing)."""

    kind: BCKind = BCKind.DIRICHLET
    h: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "kind", BCKind(self.kind))
        object.__setattr__(self, "h", complex(self.h))
        if self.kind == BCKind.ROBIN and self.h.imag < 0:
            raise ValueError(f"Robin constant needs Im h >= 0, got {self.h}")

    def apply(self, u, tu):
        """Boundary operator from traces ``u`` and ``T u``."""
        if self.kind == BCKind.DIRICHLET:
            return u
        if self.kind == BCKind.NEUMANN:
            return tu
        return tu + self.h * u

    def to_dict(self):
        d = {"kind": self.kind.value}
        if self.kind == BCKind.ROBIN:
            d["h"] = [self.h.real, self.h.imag]
        return d


DIRICHLET = BoundaryCondition(BCKind.DIRICHLET)
NEUMANN = BoundaryCondition(BCKind.NEUMANN)


@dataclass(frozen=True)
class PointSource:
    """Incident field ``Upsilon(x, location) polarization`` of an exterior point load."""

    location: tuple
    polarization: tuple

    def __post_init__(self):
        object.__setattr__(self, "location", tuple(float(v) for v in self.location))
        object.__setattr__(self, "polarization", tuple(complex(v) for v in self.polarization))

    def _src(self):
        return np.asarray(self.location)[None, :], np.asarray(self.polarization)[None, :]

    def field(self, x, mat):
        y, c = self._src()
        x = np.atleast_2d(x)
        return kernels.kupradze_apply(x, y, c, mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)

    def traction(self, x, normals, mat):
        y, c = self._src()
        return kernels.traction_apply(np.atleast_2d(x), np.atleast_2d(normals), y, c,
                                      mat.kappa_p, mat.kappa_s, mat.omega, mat.mu, mat.lam)


@dataclass(frozen=True)
class PlaneIncidence:
    """Wraps a ``PlaneWave`` so both incident kinds share one interface."""

    wave: PlaneWave

    def field(self, x, mat):
        return self.wave.field(np.atleast_2d(x), mat)

    def traction(self, x, normals, mat):
        _, jac = self.wave.field_and_jacobian(np.atleast_2d(x), mat)
        return traction(mat, np.atleast_2d(normals), jac)


class ZeroIncidence:
    def field(self, x, mat):
        return np.zeros((len(np.atleast_2d(x)), 3), dtype=complex)

    def traction(self, x, normals, mat):
        return self.field(x, mat)


def as_incident(incident):
    if isinstance(incident, PlaneWave):
        return PlaneIncidence(incident)
    if incident is None:
        return ZeroIncidence()
    return incident


@dataclass(frozen=True)
class SolverParams:
    n_theta: int = 24
    n_phi: int = 48
    shrink: float = 0.3
    svd_threshold: float = 1e-12
    source_layout: str = "auto"


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    sources: np.ndarray
    coefficients: np.ndarray
    material: Material
    shape: object
    bc: BoundaryCondition
    incident: object
    params: SolverParams
    residual_report: float
    rank: int = 0
    extra: dict = field(default_factory=dict)

    def scattered(self, x, check=True):
        return eval_scattered(self, x, check=check)

    def total(self, x, check=True):
        return eval_total(self, x, check=check)


class _Operator:
    """Truncated SVD of the weighted collocation matrix."""

    def __init__(self, shape, bc, mat, params):
        mesh = build_mesh(shape, params.n_theta, params.n_phi)
        sources = auxiliary_surface(mesh, params.shrink, params.source_layout)
        if np.any(signed_gap(shape, sources) >= 0):
            raise GeometryError("auxiliary sources are not strictly inside the obstacle")
        self.mesh, self.sources = mesh, sources
        a = _boundary_block(mesh.nodes, mesh.normals, sources, bc, mat)
        sw = np.sqrt(mesh.weights)
        n, m = len(mesh), len(sources)
        a = (a * sw[:, None, None, None]).reshape(3 * n, 3 * m)
        u, s, vh = np.linalg.svd(a, full_matrices=False)
        keep = s > params.svd_threshold * s[0]
        self.rank = int(np.count_nonzero(keep))
        if self.rank < 0.25 * m:
            raise IllConditioned(f"collocation rank {self.rank} below a quarter of the {m} sources")
        self.uh = u[:, keep].conj().T
        self.inv_s = 1.0 / s[keep]
        self.v = vh[keep].conj().T
        self.sw = sw
        self.cond = float(s[0] / s[keep][-1])

    def solve(self, rhs):
        b = (rhs * self.sw[:, None]).reshape(-1)
        c = self.v @ (self.inv_s * (self.uh @ b))
        return c.reshape(-1, 3)


def _boundary_block(nodes, normals, sources, bc, mat):
    args = (mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)
    if bc.kind == BCKind.DIRICHLET:
        return kernels.kupradze_block(nodes, sources, *args)
    t = kernels.traction_block(nodes, normals, sources, *args, mat.lam)
    if bc.kind == BCKind.NEUMANN:
        return t
    return t + bc.h * kernels.kupradze_block(nodes, sources, *args)


@lru_cache(maxsize=16)
def collocation_operator(shape, bc, mat, params):
    logger.debug("assembling collocation operator for %s, %s", shape, bc)
    return _Operator(shape, bc, mat, params)


def boundary_data(incident, nodes, normals, bc, mat):
    inc = as_incident(incident)
    u = inc.field(nodes, mat)
    tu = inc.traction(nodes, normals, mat) if bc.kind != BCKind.DIRICHLET else None
    return bc.apply(u, tu)


def solve_exterior(shape, bc, incident, mat, params=None, **overrides):
    """Solve the exterior problem ``B(U^i + U_sc) = 0`` for a radiating ``U_sc``.

    Parameters
    ----------
    shape : obstacle shape
    bc : BoundaryCondition
    incident : PlaneWave, PointSource or None
    mat : Material
    params : SolverParams, optional
        Keyword overrides (``n_theta=...`` etc.) are applied on top.
    """
    params = params or SolverParams()
    if overrides:
        params = SolverParams(**{**params.__dict__, **overrides})
    if isinstance(incident, PointSource) and signed_gap(shape, incident.location)[0] <= 0:
        raise GeometryError("point source must lie outside the obstacle")
    op = collocation_operator(shape, bc, mat, params)
    rhs = -boundary_data(incident, op.mesh.nodes, op.mesh.normals, bc, mat)
    coeffs = op.solve(rhs)
    sol = ScatteringSolution(op.sources, coeffs, mat, shape, bc, incident, params, 0.0, op.rank)
    object.__setattr__(sol, "residual_report", held_out_residual(sol))
    return sol


def held_out_mesh(sol):
    return build_mesh(sol.shape, sol.params.n_theta, sol.params.n_phi, rotation=HELD_OUT_ROTATION)


def held_out_residual(sol, mesh=None):
    """Max of ``|B U|`` over a rotated mesh, relative to the max of ``|B U^i|``."""
    mesh = mesh or held_out_mesh(sol)
    b_inc = boundary_data(sol.incident, mesh.nodes, mesh.normals, sol.bc, sol.material)
    u_sc = eval_scattered(sol, mesh.nodes, check=False)
    tu_sc = scattered_traction(sol, mesh.nodes, mesh.normals) if sol.bc.kind != BCKind.DIRICHLET else None
    b_tot = b_inc + sol.bc.apply(u_sc, tu_sc)
    scale = np.max(np.linalg.norm(b_inc, axis=1))
    if scale == 0:
        return float(np.max(np.linalg.norm(b_tot, axis=1)))
    return float(np.max(np.linalg.norm(b_tot, axis=1)) / scale)


def _check_exterior(sol, x):
    gap = signed_gap(sol.shape, x)
    if np.any(gap < -1e-6 * 2 * sol.shape.bounding_radius):
        raise GeometryError("evaluation point inside the obstacle")


def eval_scattered(sol, x, check=True):
    """Scattered field ``sum_k Upsilon(x, z_k) c_k`` at points ``x``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if check:
        _check_exterior(sol, x)
    mat = sol.material
    out = kernels.kupradze_apply(x, sol.sources, sol.coefficients, mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)
    return out[0] if single else out


def scattered_traction(sol, x, normals):
    mat = sol.material
    return kernels.traction_apply(np.atleast_2d(x), np.atleast_2d(normals), sol.sources, sol.coefficients,
                                  mat.kappa_p, mat.kappa_s, mat.omega, mat.mu, mat.lam)


def eval_total(sol, x, check=True):
    """Incident plus scattered field."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    inc = as_incident(sol.incident).field(np.atleast_2d(x), sol.material)
    out = inc + np.atleast_2d(eval_scattered(sol, x, check=check))
    return out[0] if single else out


def total_traction(sol, x, normals):
    inc = as_incident(sol.incident).traction(x, normals, sol.material)
    return inc + scattered_traction(sol, x, normals)


def helmholtz_split(field_fn, x, mat, h=None):
    """Pressure/shear parts of a Navier solution at ``x`` via an FD Laplacian.

    ``u_p = (Lap + ks^2) u / (ks^2 - kp^2)`` and ``u_s = (Lap + kp^2) u / (kp^2 - ks^2)``.
    ``field_fn`` maps an (N, 3) array of points to (N, 3) values.
    """
    from .core import laplacian_fd

    kp, ks = mat.kappa_p, mat.kappa_s
    if abs(ks * ks - kp * kp) < 1e-14 * ks * ks:
        raise ValueError("degenerate material: kappa_p == kappa_s")
    h = 0.01 / ks if h is None else h
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = field_fn(x)
    lap = laplacian_fd(field_fn, x, h) if x.shape[0] > 0 else u
    u_p = (lap + ks * ks * u) / (ks * ks - kp * kp)
    u_s = (lap + kp * kp * u) / (kp * kp - ks * ks)
    return u_p, u_s


def green_solution(shape, bc, mat, y, eta, params=None):
    """Scattering solution whose total field is ``G(., y) eta``."""
    return solve_exterior(shape, bc, PointSource(tuple(y), tuple(eta)), mat, params)


def green_tensor_eval(shape, bc, mat, y, eta, x, params=None):
    """``G(x, y) eta = Upsilon(x, y) eta - g(x)`` with ``g`` the radiating corrector."""
    sol = green_solution(shape, bc, mat, y, eta, params)
    return eval_total(sol, x)
