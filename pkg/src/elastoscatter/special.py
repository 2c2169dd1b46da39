"""Spherical Bessel/Hankel functions, Legendre functions and sphere quadrature."""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class ModeIndex:
    """Spherical-harmonic degree ``n`` and order ``m``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or abs(self.m) > self.n:
            raise IndexError(f"invalid mode (n={self.n}, m={self.m}): need n >= 0, |m| <= n")


def _check_arg(n, x):
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if not x > 0:
        raise ValueError(f"argument must be positive, got {x}")


def _miller_start(n, x):
    return n + 20 + int(math.sqrt(40.0 * n)) + int(x)


def sph_jn_all(nmax, x):
    """Return ``[j_0(x), ..., j_nmax(x)]`` for ``x > 0``.

    Uses upward recurrence while the order stays below the argument and
    Miller's downward recurrence otherwise.
    """
    _check_arg(nmax, x)
    out = np.empty(nmax + 1)
    s, c = math.sin(x), math.cos(x)
    j0 = s / x
    if nmax < x:
        out[0] = j0
        if nmax >= 1:
            out[1] = s / x**2 - c / x
        for k in range(1, nmax):
            out[k + 1] = (2 * k + 1) / x * out[k] - out[k - 1]
        return out

    top = _miller_start(nmax, x)
    fp1, f = 0.0, 1e-300
    vals = np.empty(top + 1)
    vals[top] = f
    for k in range(top, 0, -1):
        fm1 = (2 * k + 1) / x * f - fp1
        fp1, f = f, fm1
        vals[k - 1] = f
        if abs(f) > 1e250:
            vals[k - 1:] *= 1e-250
            fp1 *= 1e-250
            f *= 1e-250
    # normalise against whichever closed form is better conditioned
    j1 = s / x**2 - c / x
    if abs(j0) >= abs(j1):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    return vals[: nmax + 1] * scale


def sph_yn_all(nmax, x):
    """Return ``[y_0(x), ..., y_nmax(x)]`` by upward recurrence."""
    _check_arg(nmax, x)
    out = np.empty(nmax + 1)
    s, c = math.sin(x), math.cos(x)
    out[0] = -c / x
    if nmax >= 1:
        out[1] = -c / x**2 - s / x
    for k in range(1, nmax):
        out[k + 1] = (2 * k + 1) / x * out[k] - out[k - 1]
    return out


def sph_bessel_j(n, x):
    """Spherical Bessel function of the first kind ``j_n(x)``."""
    return float(sph_jn_all(n, x)[n])


def sph_bessel_y(n, x):
    """Spherical Bessel function of the second kind ``y_n(x)``."""
    return float(sph_yn_all(n, x)[n])


def sph_hankel1(n, x):
    """Outgoing spherical Hankel function ``h_n^(1)(x) = j_n + i y_n``."""
    return complex(sph_bessel_j(n, x), sph_bessel_y(n, x))


def sph_hankel2(n, x):
    """Incoming spherical Hankel function ``h_n^(2)(x) = j_n - i y_n``."""
    return complex(sph_bessel_j(n, x), -sph_bessel_y(n, x))


def assoc_legendre(n, m, t):
    """Associated Legendre function ``P_n^m(t)`` without Condon-Shortley phase.

    Only meant for modest degrees; the normalised variant below is what the
    harmonics use.
    """
    if m < 0 or m > n:
        raise IndexError(f"need 0 <= m <= n, got n={n}, m={m}")
    t = np.asarray(t, dtype=float)
    pmm = np.ones_like(t)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    for k in range(1, m + 1):
        pmm = pmm * (2 * k - 1) * s
    if n == m:
        return pmm
    pm1 = t * (2 * m + 1) * pmm
    for k in range(m + 2, n + 1):
        pm1, pmm = (t * (2 * k - 1) * pm1 - (k + m - 1) * pmm) / (k - m), pm1
    return pm1


def normalized_legendre_table(nmax, t):
    """Orthonormalised Legendre functions for all ``0 <= m <= n <= nmax``.

    Returns an array of shape ``(nmax + 1, nmax + 1) + t.shape`` holding
    ``sqrt((2n+1)/4pi (n-m)!/(n+m)!) P_n^m(t)`` at ``[n, m]`` (zero for m > n).
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    out = np.zeros((nmax + 1, nmax + 1) + t.shape)
    out[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, nmax + 1):
        out[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * out[m - 1, m - 1]
    for m in range(0, nmax):
        out[m + 1, m] = math.sqrt(2 * m + 3) * t * out[m, m]
        for n in range(m + 2, nmax + 1):
            a = math.sqrt((4 * n * n - 1) / (n * n - m * m))
            b = math.sqrt(((n - 1) ** 2 - m * m) / (4 * (n - 1) ** 2 - 1))
            out[n, m] = a * (t * out[n - 1, m] - b * out[n - 2, m])
    return out


def normalized_legendre_dtheta(table, theta):
    """Polar-angle derivative of every entry of ``normalized_legendre_table``.

    ``theta`` must avoid the poles.
    """
    theta = np.asarray(theta, dtype=float)
    t, s = np.cos(theta), np.sin(theta)
    nmax = table.shape[0] - 1
    out = np.zeros_like(table)
    for n in range(1, nmax + 1):
        for m in range(0, n + 1):
            lower = table[n - 1, m] if m <= n - 1 else 0.0
            c = math.sqrt((2 * n + 1) / (2 * n - 1) * (n * n - m * m)) if m < n else 0.0
            out[n, m] = (n * t * table[n, m] - c * lower) / s
    return out


def sph_harmonic(mode, theta, phi):
    """Spherical harmonic ``Y_n^m`` built on ``P_n^|m|`` with no sign alternation."""
    if not isinstance(mode, ModeIndex):
        mode = ModeIndex(*mode)
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi):
        raise ValueError("theta must lie in [0, pi]")
    am = abs(mode.m)
    p = normalized_legendre_table(mode.n, np.cos(theta))[mode.n, am]
    val = p * np.exp(1j * mode.m * np.asarray(phi, dtype=float))
    return complex(val) if val.ndim == 0 else val


def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1], ascending nodes."""
    if n < 1:
        raise ValueError("need at least one node")
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature on the unit sphere.

    Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``.
    Arrays are flattened in (theta, phi) row-major order.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int

    @property
    def directions(self):
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)


def sphere_grid(n_theta, n_phi):
    t, w = gauss_legendre(n_theta)
    # north pole first
    t, w = t[::-1], w[::-1]
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    th = np.arccos(t)
    TH, PH = np.meshgrid(th, phi, indexing="ij")
    W = np.repeat(w[:, None], n_phi, axis=1) * (2.0 * math.pi / n_phi)
    return SphereGrid(TH.ravel(), PH.ravel(), W.ravel(), n_theta, n_phi)


def harmonic_table(nmax, theta, phi):
    """All ``Y_n^m`` up to ``nmax`` at the given angles.

    Returns ``(modes, values)`` with ``values[k]`` the harmonic ``modes[k]``.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    table = normalized_legendre_table(nmax, np.cos(theta))
    modes, vals = [], []
    for n in range(nmax + 1):
        for m in range(-n, n + 1):
            modes.append(ModeIndex(n, m))
            vals.append(table[n, abs(m)] * np.exp(1j * m * phi))
    return modes, np.array(vals)
