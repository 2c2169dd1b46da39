"""Time-harmonic elastic scattering by bounded obstacles in three dimensions."""

import os

# ELASTOSCATTER_THREADS also caps the BLAS/OpenMP pools; this only takes
# effect if numpy has not been imported yet.
if os.environ.get("ELASTOSCATTER_THREADS", "").isdigit():
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["ELASTOSCATTER_THREADS"])

from .core import Material, PlaneWave, WaveKind, kupradze_tensor, kupradze_traction, wave_numbers
from .geometry import Ellipsoid, Sphere, StarShape, build_mesh
from .kernels import BACKEND
from .solver import BoundaryCondition, PointSource, SolverParams, solve_exterior

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryCondition",
    "Ellipsoid",
    "Material",
    "PlaneWave",
    "PointSource",
    "SolverParams",
    "Sphere",
    "StarShape",
    "WaveKind",
    "build_mesh",
    "kupradze_tensor",
    "kupradze_traction",
    "solve_exterior",
    "wave_numbers",
]
