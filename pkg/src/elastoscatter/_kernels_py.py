"""Pure numpy implementation of the batched Kupradze kernels.

This is the reference backend. The compiled backend in ``_kernels_c`` mirrors
these functions one for one and is cross-checked against them in the tests.

All routines take observation points ``x`` of shape (N, 3) and source points
``y`` of shape (M, 3) and work on the displacement ``r = x - y``.
"""

import numpy as np

FOUR_PI = 4.0 * np.pi


def radial_profiles(r, kp, ks, omega, mu):
    """Radial coefficient functions of the Kupradze tensor.

    The tensor is written as ``psi1(r) I + psi2(r) rhat rhat^T``. Returns
    ``(psi1, psi2, dpsi1, dpsi2)`` evaluated at ``r`` (any shape).
    """
    r = np.asarray(r, dtype=float)
    inv_r = 1.0 / r
    w2 = omega * omega
    gs = np.exp(1j * ks * r) / FOUR_PI
    gp = np.exp(1j * kp * r) / FOUR_PI
    iks, ikp = 1j * ks, 1j * kp

    def derivs(g, ik):
        # derivatives of g(r)/r with g = exp(ikr)/4pi
        d0 = g * inv_r
        d1 = g * (ik * inv_r - inv_r**2)
        d2 = g * (ik**2 * inv_r - 2 * ik * inv_r**2 + 2 * inv_r**3)
        d3 = g * (ik**3 * inv_r - 3 * ik**2 * inv_r**2 + 6 * ik * inv_r**3 - 6 * inv_r**4)
        return d0, d1, d2, d3

    s0, s1, s2, s3 = derivs(gs, iks)
    _, p1, p2, p3 = derivs(gp, ikp)
    f1, f2, f3 = s1 - p1, s2 - p2, s3 - p3

    psi1 = s0 / mu + f1 * inv_r / w2
    psi2 = (f2 - f1 * inv_r) / w2
    dpsi1 = s1 / mu + (f2 * inv_r - f1 * inv_r**2) / w2
    dpsi2 = (f3 - f2 * inv_r + f1 * inv_r**2) / w2
    return psi1, psi2, dpsi1, dpsi2


def _geometry(x, y):
    d = x[:, None, :] - y[None, :, :]
    r = np.sqrt(np.einsum("nmi,nmi->nm", d, d))
    return d / r[..., None], r


def kupradze_block(x, y, kp, ks, omega, mu):
    """Kupradze tensors for all pairs, shape (N, 3, M, 3)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    rhat, r = _geometry(x, y)
    psi1, psi2, _, _ = radial_profiles(r, kp, ks, omega, mu)
    out = psi2[..., None, None] * rhat[..., :, None] * rhat[..., None, :]
    out += psi1[..., None, None] * np.eye(3)
    return out.transpose(0, 2, 1, 3)


def traction_block(x, normals, y, kp, ks, omega, mu, lam):
    """Traction (w.r.t. ``x``, normal at ``x``) of every Kupradze column.

    Entry ``[n, i, m, j]`` is component ``i`` of the traction of the field
    ``Upsilon(., y_m) e_j`` evaluated at ``x_n`` with normal ``normals[n]``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    nu = np.atleast_2d(np.asarray(normals, dtype=float))
    rhat, r = _geometry(x, y)
    psi1, psi2, dpsi1, dpsi2 = radial_profiles(r, kp, ks, omega, mu)
    q = psi2 / r
    rn = np.einsum("nmi,ni->nm", rhat, nu)
    nub = np.broadcast_to(nu[:, None, :], rhat.shape)
    eye = np.eye(3)

    rr = rhat[..., :, None] * rhat[..., None, :]
    nr = nub[..., :, None] * rhat[..., None, :]  # nu_i rhat_j
    rnu = rhat[..., :, None] * nub[..., None, :]  # rhat_i nu_j

    div = (dpsi1 + dpsi2 + 2.0 * q)[..., None] * rhat  # index j
    lam_term = lam * nub[..., :, None] * div[..., None, :]

    # (J nu)_i + (J^T nu)_i for column j
    a = (dpsi1 * rn)[..., None, None] * eye
    a = a + (2.0 * dpsi2 * rn)[..., None, None] * rr
    a = a + q[..., None, None] * (2.0 * nr - 4.0 * rn[..., None, None] * rr + rnu)
    a = a + dpsi1[..., None, None] * rnu
    a = a + (q * rn)[..., None, None] * eye
    out = lam_term + mu * a
    return out.transpose(0, 2, 1, 3)


def kupradze_apply(x, y, coeffs, kp, ks, omega, mu):
    """Sum over sources ``sum_m Upsilon(x_n, y_m) c_m``, shape (N, 3)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty((x.shape[0], 3), dtype=complex)
    step = max(1, 200_000 // max(1, len(y)))
    for s in range(0, x.shape[0], step):
        blk = kupradze_block(x[s:s + step], y, kp, ks, omega, mu)
        out[s:s + step] = np.einsum("nimj,mj->ni", blk, coeffs)
    return out


def traction_apply(x, normals, y, coeffs, kp, ks, omega, mu, lam):
    """Traction of ``sum_m Upsilon(., y_m) c_m`` at ``x_n``, shape (N, 3)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    out = np.empty((x.shape[0], 3), dtype=complex)
    step = max(1, 100_000 // max(1, len(y)))
    for s in range(0, x.shape[0], step):
        blk = traction_block(x[s:s + step], normals[s:s + step], y, kp, ks, omega, mu, lam)
        out[s:s + step] = np.einsum("nimj,mj->ni", blk, coeffs)
    return out
