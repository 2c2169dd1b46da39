"""Backend selection for the batched Kupradze kernels.

The compiled extension ``_kernels_c`` is used when it imports; otherwise the
numpy implementation in ``_kernels_py`` is used. Setting
``ELASTOSCATTER_BACKEND=python`` forces the fallback.
"""

import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("ELASTOSCATTER_BACKEND", "").lower() != "python":
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        logger.debug("compiled kernels unavailable, using numpy fallback")
        _impl = _kernels_py


def thread_count():
    """Thread cap for the compiled kernels, from ``ELASTOSCATTER_THREADS``."""
    raw = os.environ.get("ELASTOSCATTER_THREADS")
    if not raw:
        return 0
    try:
        return max(1, int(raw))
    except ValueError:
        return 0


def kupradze_block(x, y, kp, ks, omega, mu):
    return _impl.kupradze_block(x, y, kp, ks, omega, mu)


def traction_block(x, normals, y, kp, ks, omega, mu, lam):
    return _impl.traction_block(x, normals, y, kp, ks, omega, mu, lam)


def kupradze_apply(x, y, coeffs, kp, ks, omega, mu):
    return _impl.kupradze_apply(x, y, coeffs, kp, ks, omega, mu)


def traction_apply(x, normals, y, coeffs, kp, ks, omega, mu, lam):
    return _impl.traction_apply(x, normals, y, coeffs, kp, ks, omega, mu, lam)
