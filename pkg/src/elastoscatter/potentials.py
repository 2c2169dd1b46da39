"""Single-layer potential, its traction, the Betti representation and the jump test.

Everything is evaluated off the surface with the smooth mesh quadrature, so no
singular integration is needed. The traction jump across the surface is
estimated from two-sided limits with Richardson extrapolation.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import build_mesh
from .special import gauss_legendre, normalized_legendre_table


class TooClose(ValueError):
    """Evaluation point lies within the quadrature's unreliable band."""


@dataclass(frozen=True, eq=False)
class SurfaceDensity:
    """Complex vector samples, one per mesh node."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (len(self.mesh), 3):
            raise ValueError(f"density needs shape ({len(self.mesh)}, 3), got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((len(mesh), 3), dtype=complex))

    def __add__(self, other):
        return SurfaceDensity(self.mesh, self.values + other.values)

    def __rmul__(self, a):
        return SurfaceDensity(self.mesh, a * self.values)


def check_standoff(mesh, x, factor=2.0):
    """Raise ``TooClose`` if a point is within ``factor`` local spacings of a node."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.linalg.norm(x[:, None, :] - mesh.nodes[None, :, :], axis=-1)
    nearest = np.argmin(d, axis=1)
    gap = d[np.arange(len(x)), nearest]
    bad = gap <= factor * mesh.spacing[nearest]
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise TooClose(f"point {x[k]} is {gap[k]:.3g} from the surface, "
                       f"below {factor} x local spacing {mesh.spacing[nearest[k]]:.3g}")


def _weighted(density):
    return density.values * density.mesh.weights[:, None]


def single_layer(density, x, mat, check=True):
    """``V(phi)(x) = sum_j w_j Upsilon(x, y_j) phi_j``; shape (N, 3) or (3,)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if check:
        check_standoff(density.mesh, x)
    out = kernels.kupradze_apply(x, density.mesh.nodes, _weighted(density),
                                 mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)
    return out[0] if single else out


def single_layer_traction(density, x, normal, mat, check=True):
    """Traction of ``V(phi)`` at ``x`` with respect to ``normal``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    normal = np.broadcast_to(np.asarray(normal, dtype=float), x.shape)
    if check:
        check_standoff(density.mesh, x)
    out = kernels.traction_apply(x, normal, density.mesh.nodes, _weighted(density),
                                 mat.kappa_p, mat.kappa_s, mat.omega, mat.mu, mat.lam)
    return out[0] if single else out


def _grid_angles(n_theta, n_phi):
    t, w = gauss_legendre(n_theta)
    t, w = t[::-1], w[::-1]
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    return t, w, phi


def upsample_density(density, factor):
    """Spectrally interpolate a density onto a ``factor``-times finer mesh.

    The density is expanded in spherical harmonics of the mesh parameter
    sphere (degree below ``n_theta``, order below ``n_phi / 2``) and resampled
    on ``build_mesh(shape, factor * n_theta, factor * n_phi)``. Band-limited
    densities are reproduced exactly.
    """
    mesh = density.mesh
    if factor == 1:
        return density
    nt, nph = mesh.resolution
    t0, w0, phi0 = _grid_angles(nt, nph)
    t1, _, phi1 = _grid_angles(factor * nt, factor * nph)
    nmax = nt - 1
    mmax = min(nmax, nph // 2 - 1)
    p0 = normalized_legendre_table(nmax, t0)  # (n, m, theta)
    p1 = normalized_legendre_table(nmax, t1)
    f = mesh.grid(density.values)  # (nt, nph, 3)
    out = np.zeros((factor * nt, factor * nph, 3), dtype=complex)
    for m in range(-mmax, mmax + 1):
        am = abs(m)
        # azimuthal transform, then Legendre projection per degree
        fm = np.einsum("tpc,p->tc", f, np.exp(-1j * m * phi0)) * (2 * np.pi / nph)
        coef = np.einsum("nt,t,tc->nc", p0[am:, am], w0, fm)
        val = np.einsum("nt,nc->tc", p1[am:, am], coef)
        out += val[:, None, :] * np.exp(1j * m * phi1)[None, :, None]
    fine = build_mesh(mesh.shape, factor * nt, factor * nph)
    return SurfaceDensity(fine, out.reshape(-1, 3))


@dataclass(frozen=True)
class JumpEstimate:
    value: np.ndarray
    exterior: np.ndarray
    interior: np.ndarray
    offsets: tuple


def richardson_linear(h1, f1, h2, f2):
    """Value at ``h = 0`` of the line through ``(h1, f1)`` and ``(h2, f2)``."""
    return (h2 * f1 - h1 * f2) / (h2 - h1)


def jump_estimate(density, node, offsets, mat, detail=False, upsample=2):
    """Exterior-minus-interior traction limit of ``V(phi)`` at a mesh node.

    ``T V(phi)`` is evaluated at ``x +- h nu`` for each offset ``h``; each side
    is extrapolated to ``h = 0`` from the two smallest offsets assuming a
    leading ``O(h)`` error. With ``detail=True`` a ``JumpEstimate`` holding
    the raw one-sided samples is returned instead of the bare vector.

    The near-surface evaluations use the density interpolated onto an
    ``upsample``-times finer mesh, which keeps the quadrature error well
    below the extrapolation error for offsets down to about one mesh spacing.
    With an outward normal the exact limit is ``-phi(node)``.
    """
    hs = sorted(float(h) for h in offsets)
    if len(hs) < 2 or hs[0] <= 0:
        raise ValueError("need at least two positive offsets")
    x = density.mesh.nodes[node]
    nu = density.mesh.normals[node]
    pts_out = np.array([x + h * nu for h in hs])
    pts_in = np.array([x - h * nu for h in hs])
    fine = upsample_density(density, upsample)
    t_out = single_layer_traction(fine, pts_out, nu, mat, check=False)
    t_in = single_layer_traction(fine, pts_in, nu, mat, check=False)
    ext = richardson_linear(hs[0], t_out[0], hs[1], t_out[1])
    inn = richardson_linear(hs[0], t_in[0], hs[1], t_in[1])
    value = ext - inn
    if detail:
        return JumpEstimate(value, t_out, t_in, tuple(hs))
    return value


def betti_representation(mesh, trace_u, trace_tu, x, mat, check=True):
    """``int [(T_nu(y) Upsilon(x, y))^T u(y) - Upsilon(x, y) T u(y)] ds(y)``.

    For a radiating solution and exterior ``x`` this reproduces ``u(x)``; for
    an entire solution it vanishes outside the surface.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if check:
        check_standoff(mesh, x)
    u = trace_u.values if isinstance(trace_u, SurfaceDensity) else np.asarray(trace_u, dtype=complex)
    tu = trace_tu.values if isinstance(trace_tu, SurfaceDensity) else np.asarray(trace_tu, dtype=complex)
    w = mesh.weights[:, None]
    args = (mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)
    # T_nu(y) Upsilon(x, y)[i, j] = traction at y of column j of Upsilon(., x)
    tblk = kernels.traction_block(mesh.nodes, mesh.normals, x, *args, mat.lam)  # (M, i, N, j)
    double = np.einsum("minj,mi->nj", tblk, u * w)
    single_ = kernels.kupradze_apply(x, mesh.nodes, tu * w, *args)
    out = double - single_
    return out[0] if single else out
