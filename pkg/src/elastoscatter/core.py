"""Material parameters, plane waves, stress/traction and the Kupradze tensor.

Conventions
-----------
Jacobians are stored as ``J[i, k] = d u_i / d x_k`` (row = displacement
component). Density is fixed to one, so the wave numbers follow from the
Lame parameters and the angular frequency alone.

The Kupradze tensor is evaluated in radial form
``psi1(r) I + psi2(r) rhat rhat^T`` where, with ``Phi_k(r) = exp(ikr)/(4 pi r)``
and ``F = Phi_s - Phi_p``::

    psi1 = Phi_s / mu + F'(r) / (omega^2 r)
    psi2 = (F''(r) - F'(r) / r) / omega^2

Derivatives of ``Phi_k`` are closed form (see ``_kernels_py.radial_profiles``).
The traction of a column ``Upsilon(., y) e_j`` then follows from

    d_k Upsilon_ij = psi1' rhat_k delta_ij + psi2' rhat_k rhat_i rhat_j
                     + psi2 / r [(delta_ik - rhat_i rhat_k) rhat_j
                                 + rhat_i (delta_jk - rhat_j rhat_k)]

contracted with ``lambda tr(J) nu + mu (J + J^T) nu``.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

from . import kernels


class InvalidMaterial(ValueError):
    pass


class CoincidentPoints(ValueError):
    """Raised when the fundamental solution is requested at its pole."""


@dataclass(frozen=True)
class Material:
    """Homogeneous isotropic medium with unit density."""

    lam: float
    mu: float
    omega: float

    def __post_init__(self):
        if not (self.mu > 0 and self.lam + 2 * self.mu > 0):
            raise InvalidMaterial(f"need mu > 0 and lambda + 2 mu > 0 (lambda={self.lam}, mu={self.mu})")
        if not self.omega > 0:
            raise InvalidMaterial(f"omega must be positive, got {self.omega}")

    @property
    def kappa_p(self):
        return self.omega / math.sqrt(self.lam + 2 * self.mu)

    @property
    def kappa_s(self):
        return self.omega / math.sqrt(self.mu)

    @property
    def p_modulus(self):
        return self.lam + 2 * self.mu


def wave_numbers(mat):
    """Pressure and shear wave numbers ``(kappa_p, kappa_s)``."""
    return mat.kappa_p, mat.kappa_s


class WaveKind(str, enum.Enum):
    PRESSURE = "pressure"
    SHEAR = "shear"
    FULL = "full"


@dataclass(frozen=True)
class PlaneWave:
    direction: tuple
    polarization: tuple
    kind: WaveKind = WaveKind.FULL

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError(f"plane-wave direction must be a unit 3-vector, got {self.direction}")
        object.__setattr__(self, "direction", tuple(float(v) for v in d))
        object.__setattr__(self, "polarization", tuple(complex(v) if np.iscomplexobj(v) else float(v)
                                                       for v in np.asarray(self.polarization).ravel()))
        object.__setattr__(self, "kind", WaveKind(self.kind))

    def amplitudes(self, mat):
        """Constant polarisation vectors of the P and S parts (with material factors)."""
        a = np.asarray(self.direction)
        eta = np.asarray(self.polarization)
        p_amp = (a @ eta) * a / mat.p_modulus
        # -(1/mu) a x (a x eta) = (eta - (a.eta) a) / mu
        s_amp = (eta - (a @ eta) * a) / mat.mu
        if self.kind == WaveKind.PRESSURE:
            s_amp = np.zeros(3, dtype=s_amp.dtype)
        elif self.kind == WaveKind.SHEAR:
            p_amp = np.zeros(3, dtype=p_amp.dtype)
        return p_amp, s_amp

    def field(self, x, mat):
        """Displacement at points ``x`` (..., 3)."""
        return self.field_and_jacobian(x, mat)[0]

    def field_and_jacobian(self, x, mat):
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.direction)
        p_amp, s_amp = self.amplitudes(mat)
        ep = np.exp(1j * mat.kappa_p * (x @ a))[..., None]
        es = np.exp(1j * mat.kappa_s * (x @ a))[..., None]
        u = ep * p_amp + es * s_amp
        jac = (ep[..., None] * (1j * mat.kappa_p) * np.multiply.outer(p_amp, a)
               + es[..., None] * (1j * mat.kappa_s) * np.multiply.outer(s_amp, a))
        return u, jac


def _as_wave(x, wave, kind):
    if WaveKind(wave.kind) != kind:
        raise ValueError(f"expected a {kind.value} wave, got {wave.kind}")
    return np.asarray(x, dtype=float)


def plane_p_wave(x, wave, mat):
    """``(1/(lambda+2mu)) exp(i kp a.x) (a.eta) a``."""
    return wave.field(_as_wave(x, wave, WaveKind.PRESSURE), mat)


def plane_s_wave(x, wave, mat):
    """``-(1/mu) exp(i ks a.x) a x (a x eta)``; orthogonal to the direction."""
    return wave.field(_as_wave(x, wave, WaveKind.SHEAR), mat)


def plane_full_wave(x, wave, mat):
    x = _as_wave(x, wave, WaveKind.FULL)
    p = PlaneWave(wave.direction, wave.polarization, WaveKind.PRESSURE)
    s = PlaneWave(wave.direction, wave.polarization, WaveKind.SHEAR)
    return p.field(x, mat) + s.field(x, mat)


def strain(jacobian):
    j = np.asarray(jacobian)
    return 0.5 * (j + np.swapaxes(j, -1, -2))


def stress(mat, jacobian):
    j = np.asarray(jacobian)
    tr = np.trace(j, axis1=-2, axis2=-1)
    return mat.lam * tr[..., None, None] * np.eye(3) + 2 * mat.mu * strain(j)


def traction(mat, normal, jacobian):
    """Surface traction ``tau(u) nu``; broadcasts over leading axes."""
    return np.einsum("...ik,...k->...i", stress(mat, jacobian), np.asarray(normal, dtype=float))


def traction_curl_form(mat, normal, jacobian):
    """``2 mu (nu.grad) u + lambda nu div u + mu nu x curl u``.

    Same quantity as ``traction``; kept separately so the two can be compared.
    """
    j = np.asarray(jacobian)
    nu = np.broadcast_to(np.asarray(normal, dtype=float), j.shape[:-1])
    directional = np.einsum("...ik,...k->...i", j, nu)
    div = np.trace(j, axis1=-2, axis2=-1)
    curl = np.stack([j[..., 2, 1] - j[..., 1, 2],
                     j[..., 0, 2] - j[..., 2, 0],
                     j[..., 1, 0] - j[..., 0, 1]], axis=-1)
    return 2 * mat.mu * directional + mat.lam * nu * div[..., None] + mat.mu * np.cross(nu, curl)


def _check_separation(x, y, scale=1.0):
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if r < 1e-12 * scale:
        raise CoincidentPoints(f"|x - y| = {r:.3e} is at the pole of the fundamental solution")


def kupradze_tensor(x, y, mat):
    """Kupradze matrix ``Upsilon(x, y)`` (3x3 complex)."""
    _check_separation(x, y)
    return kernels.kupradze_block(np.reshape(x, (1, 3)), np.reshape(y, (1, 3)),
                                  mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)[0, :, 0, :]


def kupradze_traction(x, normal, y, mat):
    """Traction at ``x`` (normal ``normal``) of every column of ``Upsilon(., y)``."""
    _check_separation(x, y)
    return kernels.traction_block(np.reshape(x, (1, 3)), np.reshape(normal, (1, 3)), np.reshape(y, (1, 3)),
                                  mat.kappa_p, mat.kappa_s, mat.omega, mat.mu, mat.lam)[0, :, 0, :]


def laplacian_fd(field, x, h):
    """Fourth-order central-difference Laplacian of a vector field at ``x``."""
    x = np.asarray(x, dtype=float)
    c0 = field(x)
    acc = -3 * (5.0 / 2.0) * c0
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        acc = acc + (4.0 / 3.0) * (field(x + e) + field(x - e)) - (1.0 / 12.0) * (field(x + 2 * e) + field(x - 2 * e))
    return acc / h**2


def navier_residual_fd(field, x, mat, h):
    """Central-difference ``mu Lap u + (lambda+mu) grad div u + omega^2 u`` at ``x``.

    Second-order stencils: 7-point Laplacian and mixed differences for the
    grad-div term.
    """
    x = np.asarray(x, dtype=float)
    u0 = np.asarray(field(x))
    eye = np.eye(3) * h
    plus = [np.asarray(field(x + eye[k])) for k in range(3)]
    minus = [np.asarray(field(x - eye[k])) for k in range(3)]
    lap = sum(plus[k] + minus[k] - 2 * u0 for k in range(3)) / h**2
    graddiv = np.zeros(3, dtype=complex)
    for i in range(3):
        # d_i (sum_k d_k u_k)
        acc = (plus[i][i] + minus[i][i] - 2 * u0[i]) / h**2
        for k in range(3):
            if k == i:
                continue
            pp = field(x + eye[i] + eye[k])[k]
            pm = field(x + eye[i] - eye[k])[k]
            mp = field(x - eye[i] + eye[k])[k]
            mm = field(x - eye[i] - eye[k])[k]
            acc = acc + (pp - pm - mp + mm) / (4 * h**2)
        graddiv[i] = acc
    return mat.mu * lap + (mat.lam + mat.mu) * graddiv + mat.omega**2 * u0
