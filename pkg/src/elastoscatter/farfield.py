"""Far-field patterns, P/S projectors, far-field matrices and mode analysis.

Patterns follow ``U(r xhat) ~ exp(i kappa r) / r * pattern(xhat)``, so the
``1 / (4 pi)`` of the fundamental solution shows up explicitly in the
source-sum route. For a source sum ``sum_k Upsilon(x, z_k) c_k``::

    p_part = 1 / (4 pi (lambda + 2 mu)) A(xhat) sum_k exp(-i kp xhat.z_k) c_k
    s_part = 1 / (4 pi mu) (I - A(xhat)) sum_k exp(-i ks xhat.z_k) c_k

with ``A(xhat) = xhat xhat^T``.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .core import PlaneWave, WaveKind
from .solver import (
    PointSource,
    SolverParams,
    eval_scattered,
    eval_total,
    helmholtz_split,
    scattered_traction,
    solve_exterior,
)
from .special import ModeIndex, harmonic_table, sph_hankel1, sph_hankel2, sphere_grid


class PatternTag(str, enum.Enum):
    P_PART = "p_part"
    S_PART = "s_part"
    FULL = "full"


def _unit(v, what="direction"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1)
    if np.any(np.abs(n - 1.0) > 1e-12):
        raise ValueError(f"{what} must be a unit vector")
    return v


def projector(xhat):
    """``A(xhat) = xhat xhat^T``; ``I - A`` projects onto the tangent plane."""
    xhat = _unit(xhat)
    return np.multiply.outer(xhat, xhat) if xhat.ndim == 1 else np.einsum("ni,nj->nij", xhat, xhat)


@dataclass(frozen=True, eq=False)
class FarFieldPattern:
    directions: np.ndarray
    values: np.ndarray
    tag: PatternTag

    def __post_init__(self):
        object.__setattr__(self, "tag", PatternTag(self.tag))

    def invariant_violation(self):
        """Largest relative deviation from the P (parallel) or S (tangential) structure."""
        v, d = self.values, self.directions
        mag = np.linalg.norm(v, axis=1)
        scale = np.where(mag > 0, mag, 1.0)
        if self.tag == PatternTag.P_PART:
            bad = np.linalg.norm(np.cross(d, v), axis=1)
        elif self.tag == PatternTag.S_PART:
            bad = np.abs(np.einsum("ni,ni->n", d, v))
        else:
            return 0.0
        return float(np.max(bad / scale)) if len(v) else 0.0

    def __add__(self, other):
        return FarFieldPattern(self.directions, self.values + other.values, PatternTag.FULL)


def _phase_sums(directions, sources, coeffs, kappa):
    return np.exp(-1j * kappa * directions @ sources.T) @ coeffs


def farfield_from_sources(sol, directions):
    """P and S far-field patterns of a fundamental-solution expansion."""
    d = _unit(np.atleast_2d(directions))
    mat = sol.material
    sp = _phase_sums(d, sol.sources, sol.coefficients, mat.kappa_p)
    ss = _phase_sums(d, sol.sources, sol.coefficients, mat.kappa_s)
    radial_p = np.einsum("ni,ni->n", d, sp)[:, None] * d
    radial_s = np.einsum("ni,ni->n", d, ss)[:, None] * d
    p = radial_p / (4 * math.pi * mat.p_modulus)
    s = (ss - radial_s) / (4 * math.pi * mat.mu)
    return FarFieldPattern(d, p, PatternTag.P_PART), FarFieldPattern(d, s, PatternTag.S_PART)


def farfield_boundary_integral(mesh, trace_u, trace_tu, xhat, mat):
    """Far-field P and S parts from boundary traces of a radiating field.

    The tractions of the matrix fields ``A e^{-i kp xhat.y}`` and
    ``(I - A) e^{-i ks xhat.y}`` are closed form; contracted with ``u``
    they give, per node::

        P: -i kp [lam nu.u + 2 mu (xhat.nu)(xhat.u)] xhat
        S: -i ks mu [(xhat.nu)(u - (xhat.u) xhat) + (xhat.u)(nu - (xhat.nu) xhat)]

    ``xhat`` may be a single direction or an (N, 3) array.
    """
    u = getattr(trace_u, "values", trace_u)
    tu = getattr(trace_tu, "values", trace_tu)
    single = np.ndim(xhat) == 1
    d = _unit(np.atleast_2d(xhat))
    y, nu, w = mesh.nodes, mesh.normals, mesh.weights
    kp, ks, lam, mu = mat.kappa_p, mat.kappa_s, mat.lam, mat.mu

    xn = d @ nu.T  # (D, M)
    xu = d @ u.T
    xt = d @ tu.T
    nuu = np.einsum("mi,mi->m", nu, u)
    ep = np.exp(-1j * kp * d @ y.T) * w
    es = np.exp(-1j * ks * d @ y.T) * w

    p_scalar = -1j * kp * (lam * nuu[None, :] + 2 * mu * xn * xu) - xt
    p = np.sum(ep * p_scalar, axis=1)[:, None] * d / (4 * math.pi * mat.p_modulus)

    # tangential parts assembled with (I - A) applied at the end
    s_vec = (-1j * ks * mu) * (np.einsum("dm,mi->dmi", xn, u) + np.einsum("dm,mi->dmi", xu, nu)) \
        - tu[None, :, :]
    s_raw = np.einsum("dm,dmi->di", es, s_vec)
    s = (s_raw - np.einsum("di,di->d", d, s_raw)[:, None] * d) / (4 * math.pi * mu)
    if single:
        return p[0], s[0]
    return p, s


def solution_farfield_integral(sol, directions, mesh=None):
    """Boundary-integral route applied to a solver solution on a mesh of its obstacle."""
    from .geometry import build_mesh

    mesh = mesh or build_mesh(sol.shape, sol.params.n_theta, sol.params.n_phi)
    u = eval_scattered(sol, mesh.nodes, check=False)
    tu = scattered_traction(sol, mesh.nodes, mesh.normals)
    return farfield_boundary_integral(mesh, u, tu, directions, sol.material)


def pressure_part_sources(sol, x):
    """Exact P part of a source sum: ``-(1/omega^2) grad grad^T Phi_p`` per source."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mat = sol.material
    kp = mat.kappa_p
    d = x[:, None, :] - sol.sources[None, :, :]
    r = np.linalg.norm(d, axis=-1)
    rh = d / r[..., None]
    g = np.exp(1j * kp * r) / (4 * math.pi)
    p1 = g * (1j * kp / r - 1 / r**2)
    p2 = g * ((1j * kp) ** 2 / r - 2j * kp / r**2 + 2 / r**3)
    rc = np.einsum("nmi,mi->nm", rh, sol.coefficients)
    out = np.einsum("nm,mi->ni", p1 / r, sol.coefficients)
    out += np.einsum("nm,nmi->ni", (p2 - p1 / r) * rc, rh)
    return -out / mat.omega**2


def scaled_field_remainder(sol, xhat, radii):
    """``|r e^{-i k r} U_part(r xhat) - pattern(xhat)|`` for both parts at each radius."""
    xhat = _unit(np.asarray(xhat, dtype=float))
    mat = sol.material
    pp, ps = farfield_from_sources(sol, xhat[None, :])
    radii = np.asarray(radii, dtype=float)
    pts = radii[:, None] * xhat
    u = eval_scattered(sol, pts)
    up = pressure_part_sources(sol, pts)
    us = u - up
    rp = np.linalg.norm(radii[:, None] * np.exp(-1j * mat.kappa_p * radii)[:, None] * up - pp.values[0], axis=1)
    rs = np.linalg.norm(radii[:, None] * np.exp(-1j * mat.kappa_s * radii)[:, None] * us - ps.values[0], axis=1)
    return rp, rs


def loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass(frozen=True, eq=False)
class FarFieldMatrix:
    """``U_inf(xhat, alpha)`` for every sampled ``xhat``; shape (D, 3, 3)."""

    directions: np.ndarray
    alpha: tuple
    values: np.ndarray
    p_values: np.ndarray
    s_values: np.ndarray
    residuals: tuple = ()

    def apply(self, eta):
        return self.values @ np.asarray(eta)


def farfield_matrix(shape, bc, mat, alpha, params=None, directions=None):
    """Far-field matrix from three full-wave solves with ``eta = e1, e2, e3``."""
    params = params or SolverParams()
    if directions is None:
        directions = sphere_grid(24, 48).directions
    d = np.atleast_2d(directions)
    cols, pcols, scols, res = [], [], [], []
    for k in range(3):
        eta = np.eye(3)[k]
        sol = solve_exterior(shape, bc, PlaneWave(tuple(alpha), tuple(eta)), mat, params)
        p, s = farfield_from_sources(sol, d)
        pcols.append(p.values)
        scols.append(s.values)
        cols.append(p.values + s.values)
        res.append(sol.residual_report)
    stack = lambda c: np.stack(c, axis=-1)  # noqa: E731
    return FarFieldMatrix(d, tuple(alpha), stack(cols), stack(pcols), stack(scols), tuple(res))


def split_pattern(m, xhat, alpha):
    """Four projected blocks ``A M A, (I-A) M A, A M (I-A), (I-A) M (I-A)``.

    The first index of each projector pair acts on the observation side,
    the second on the incident side.
    """
    ax, aa = projector(xhat), projector(alpha)
    eye = np.eye(3)
    m = np.asarray(m)
    return (ax @ m @ aa, (eye - ax) @ m @ aa, ax @ m @ (eye - aa), (eye - ax) @ m @ (eye - aa))


@dataclass(frozen=True)
class AsymptoticsRow:
    sigma: float
    residual: float
    scaled: float


def green_asymptotics_check(shape, bc, mat, alpha, eta, x_list, sigma_list, params=None):
    """Compare ``G(x, -sigma alpha) eta`` with its plane-wave expansion.

    The expansion is ``e^{i kp s}/(4 pi s) P(x) + e^{i ks s}/(4 pi s) S(x)``
    where ``P`` and ``S`` are total fields for pure pressure and pure shear
    incident waves. Returns one row per ``sigma`` with the max residual over
    ``x_list`` and the residual times ``sigma^2``.
    """
    params = params or SolverParams()
    alpha = _unit(np.asarray(alpha, dtype=float))
    eta = np.asarray(eta, dtype=complex)
    x = np.atleast_2d(np.asarray(x_list, dtype=float))
    if not np.any(eta):
        return [AsymptoticsRow(float(s), 0.0, 0.0) for s in sigma_list]
    sol_p = solve_exterior(shape, bc, PlaneWave(tuple(alpha), tuple(eta), WaveKind.PRESSURE), mat, params)
    sol_s = solve_exterior(shape, bc, PlaneWave(tuple(alpha), tuple(eta), WaveKind.SHEAR), mat, params)
    up = eval_total(sol_p, x)
    us = eval_total(sol_s, x)
    rows = []
    for sigma in sigma_list:
        y = -float(sigma) * alpha
        g = eval_total(solve_exterior(shape, bc, PointSource(tuple(y), tuple(eta)), mat, params), x)
        approx = (np.exp(1j * mat.kappa_p * sigma) * up + np.exp(1j * mat.kappa_s * sigma) * us) / (4 * math.pi * sigma)
        res = float(np.max(np.linalg.norm(g - approx, axis=1)))
        rows.append(AsymptoticsRow(float(sigma), res, res * sigma**2))
    return rows


@dataclass(frozen=True, eq=False)
class ModeFit:
    """Per-mode two-Hankel coefficients; arrays indexed by Cartesian component."""

    mode: ModeIndex
    beta_p: np.ndarray
    gamma_p: np.ndarray
    beta_s: np.ndarray
    gamma_s: np.ndarray


class ModeFitError(ValueError):
    pass


def _hankel_fit(a, radii, kappa, n):
    """Least-squares ``a(r) = beta h1_n(kr) + gamma h2_n(kr)`` per column of ``a``."""
    basis = np.array([[sph_hankel1(n, kappa * r), sph_hankel2(n, kappa * r)] for r in radii])
    coef, *_ = np.linalg.lstsq(basis, a, rcond=None)
    return coef[0], coef[1]


def mode_coefficients(values, grid, nmax):
    """``int u conj(Y_n^m) ds`` for every mode by product quadrature; (modes, K, 3)."""
    modes, y = harmonic_table(nmax, grid.theta, grid.phi)
    return modes, np.einsum("kq,q,qc->kc", np.conj(y), grid.weights, values)


def rellich_modes(field_fn, radii, n_max, mat, h=None, n_theta=None, split=True):
    """Fit outgoing/incoming Hankel coefficients to each harmonic mode.

    The field is split into P and S parts with ``helmholtz_split`` on each
    sphere ``|x| = r``; mode coefficients of every Cartesian component are then
    fitted against ``h_n^(1), h_n^(2)`` of the matching wave number.
    ``split=False`` skips the split and fits the whole field against both
    wave numbers' models (only meaningful for single-wave-number fields).
    """
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 4:
        raise ModeFitError(f"need at least 4 radii, got {len(radii)}")
    n_theta = n_theta or n_max + 8
    grid = sphere_grid(n_theta, 2 * n_theta)
    dirs = grid.directions
    a_p, a_s = [], []
    for r in radii:
        pts = r * dirs
        if split:
            up, us = helmholtz_split(field_fn, pts, mat, h)
        else:
            up = us = field_fn(pts)
        modes, cp = mode_coefficients(up, grid, n_max)
        _, cs = mode_coefficients(us, grid, n_max)
        a_p.append(cp)
        a_s.append(cs)
    a_p, a_s = np.array(a_p), np.array(a_s)  # (R, K, 3)
    fits = {}
    for k, mode in enumerate(modes):
        bp, gp = _hankel_fit(a_p[:, k, :], radii, mat.kappa_p, mode.n)
        bs, gs = _hankel_fit(a_s[:, k, :], radii, mat.kappa_s, mode.n)
        fits[(mode.n, mode.m)] = ModeFit(mode, bp, gp, bs, gs)
    return fits


def outgoing_purity(fits, floor=1e-6):
    """Largest ``|gamma| / |beta|`` over modes whose ``|beta|`` exceeds ``floor`` x the largest ``|beta|``."""
    betas = np.array([[np.linalg.norm(f.beta_p), np.linalg.norm(f.beta_s)] for f in fits.values()])
    gammas = np.array([[np.linalg.norm(f.gamma_p), np.linalg.norm(f.gamma_s)] for f in fits.values()])
    top = betas.max()
    if top == 0:
        return 0.0
    mask = betas > floor * top
    return float(np.max(gammas[mask] / betas[mask]))
