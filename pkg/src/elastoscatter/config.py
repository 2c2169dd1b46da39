"""JSON experiment configuration.

A config is one JSON document. Every section is optional and falls back to
the rigid unit sphere at ``lambda = 2, mu = 1, omega = 2`` hit by a full
plane wave travelling along ``+z``::

    {
      "material": {"lambda": 2.0, "mu": 1.0, "omega": 2.0},
      "obstacles": [
        {"shape": {"kind": "sphere", "radius": 1.0, "center": [0, 0, 0]},
         "bc": {"kind": "dirichlet"},
         "solver": {"n_theta": 32}}
      ],
      "incident": {"kind": "full", "alpha": [0, 0, 1], "eta": [1, 0, 1]},
      "solver": {"n_theta": 24, "n_phi": 48, "shrink": 0.3, "svd_threshold": 1e-12,
                 "source_layout": "auto"},
      "farfield": {"n_theta": 24, "n_phi": 48, "max_residual": 1e-2},
      "uniqueness": {"cap_half_angle_deg": 30.0, "cap_axis": [0, 0, 1]},
      "diff_identity": {"eta": [1, 0, 0]},
      "outputs": {"directory": "out", "formats": ["csv", "json"]}
    }

Complex entries (Robin ``h``, polarizations) are a number or an ``[re, im]``
pair. A per-obstacle ``solver`` block overrides the global one.
"""

from dataclasses import dataclass, field, replace
import json
import math
from pathlib import Path

import numpy as np

from .core import InvalidMaterial, Material, PlaneWave, WaveKind
from .geometry import SOURCE_LAYOUTS, Ellipsoid, InvalidShape, shape_from_dict
from .solver import BCKind, BoundaryCondition, SolverParams

FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, path, problem):
        super().__init__(f"{path}: {problem}")
        self.path = path


@dataclass(frozen=True)
class Obstacle:
    shape: object
    bc: BoundaryCondition
    solver: SolverParams

    def to_dict(self):
        return {"shape": self.shape.to_dict(), "bc": self.bc.to_dict(), "solver": dict(self.solver.__dict__)}


@dataclass(frozen=True)
class Outputs:
    directory: Path = Path("out")
    formats: tuple = FORMATS


@dataclass(frozen=True)
class ExperimentConfig:
    material: Material = Material(2.0, 1.0, 2.0)
    obstacles: tuple = ()
    incident: PlaneWave = PlaneWave((0.0, 0.0, 1.0), (1.0, 0.0, 1.0))
    solver: SolverParams = SolverParams()
    farfield_grid: tuple = (24, 48)
    max_residual: float = 1e-2
    cap_half_angle_deg: float = 30.0
    cap_axis: tuple = (0.0, 0.0, 1.0)
    diff_eta: tuple = (1.0, 0.0, 0.0)
    outputs: Outputs = field(default_factory=Outputs)
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def obstacle(self):
        return self.obstacles[0]

    def require_obstacles(self, count):
        if len(self.obstacles) != count:
            raise ConfigError("obstacles", f"this experiment needs exactly {count}, got {len(self.obstacles)}")

    def require_disjoint(self):
        a, b = (o.shape for o in self.obstacles)
        gap = np.linalg.norm(np.subtract(a.center, b.center))
        if gap <= a.bounding_radius + b.bounding_radius:
            raise ConfigError("obstacles", f"obstacles overlap: center distance {gap:.6g} "
                                           f"<= {a.bounding_radius + b.bounding_radius:.6g}")

    def echo(self):
        """Normalized, JSON-ready view of the parsed config."""
        return {
            "material": {"lambda": self.material.lam, "mu": self.material.mu, "omega": self.material.omega},
            "obstacles": [o.to_dict() for o in self.obstacles],
            "incident": {"kind": self.incident.kind.value, "alpha": list(self.incident.direction),
                         "eta": [_complex_out(v) for v in self.incident.polarization]},
            "solver": dict(self.solver.__dict__),
            "farfield": {"n_theta": self.farfield_grid[0], "n_phi": self.farfield_grid[1],
                         "max_residual": self.max_residual},
            "uniqueness": {"cap_half_angle_deg": self.cap_half_angle_deg, "cap_axis": list(self.cap_axis)},
            "diff_identity": {"eta": [_complex_out(v) for v in self.diff_eta]},
            "outputs": {"directory": str(self.outputs.directory), "formats": list(self.outputs.formats)},
        }


def _complex_out(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _section(d, key, path):
    v = d.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError(f"{path}{key}", "must be an object")
    return v


def _number(d, key, path, default, kind=float, positive=False):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}", f"must be a number, got {v!r}")
    if kind is int and v != int(v):
        raise ConfigError(f"{path}{key}", f"must be an integer, got {v!r}")
    v = kind(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}{key}", "must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{path}{key}", f"must be positive, got {v!r}")
    return v


def _complex(v, path):
    if isinstance(v, bool):
        raise ConfigError(path, f"must be a number or [re, im], got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ConfigError(path, f"must be a number or [re, im], got {v!r}")


def _vec3(v, path, cplx=False):
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(path, f"must be a list of 3 numbers, got {v!r}")
    if cplx:
        return tuple(_complex(t, f"{path}[{k}]") for k, t in enumerate(v))
    out = []
    for k, t in enumerate(v):
        if isinstance(t, bool) or not isinstance(t, (int, float)):
            raise ConfigError(f"{path}[{k}]", f"must be a number, got {t!r}")
        out.append(float(t))
    return tuple(out)


def _unit(v, path):
    n = float(np.linalg.norm(v))
    if n == 0:
        raise ConfigError(path, "must be nonzero")
    return tuple(float(t) / n for t in v)


def parse_material(d):
    sec = _section(d, "material", "")
    lam = _number(sec, "lambda", "material.", 2.0)
    mu = _number(sec, "mu", "material.", 1.0, positive=True)
    omega = _number(sec, "omega", "material.", 2.0, positive=True)
    try:
        return Material(lam, mu, omega)
    except InvalidMaterial as exc:
        raise ConfigError("material.lambda", str(exc)) from None


def parse_solver(sec, path, base=None):
    base = base or SolverParams()
    if not isinstance(sec, dict):
        raise ConfigError(path.rstrip("."), "must be an object")
    unknown = set(sec) - set(base.__dict__)
    if unknown:
        raise ConfigError(f"{path}{sorted(unknown)[0]}", "unknown solver option")
    nt = _number(sec, "n_theta", path, base.n_theta, int, positive=True)
    nph = _number(sec, "n_phi", path, base.n_phi, int, positive=True)
    shrink = _number(sec, "shrink", path, base.shrink)
    thr = _number(sec, "svd_threshold", path, base.svd_threshold, positive=True)
    layout = sec.get("source_layout", base.source_layout)
    if layout not in SOURCE_LAYOUTS:
        raise ConfigError(f"{path}source_layout", f"must be one of {list(SOURCE_LAYOUTS)}, got {layout!r}")
    if nt < 4 or nph < 8:
        raise ConfigError(f"{path}n_theta", "mesh needs n_theta >= 4 and n_phi >= 8")
    if not 0 < shrink < 1:
        raise ConfigError(f"{path}shrink", f"must lie in (0, 1), got {shrink}")
    return replace(base, n_theta=nt, n_phi=nph, shrink=shrink, svd_threshold=thr, source_layout=layout)


def parse_bc(sec, path):
    if not isinstance(sec, dict):
        raise ConfigError(path, "must be an object")
    try:
        kind = BCKind(sec.get("kind", "dirichlet"))
    except ValueError:
        raise ConfigError(f"{path}.kind", f"unknown boundary condition {sec.get('kind')!r}") from None
    h = _complex(sec.get("h", 0), f"{path}.h")
    if kind == BCKind.ROBIN and h.imag < 0:
        raise ConfigError(f"{path}.h", f"Robin constant needs Im h >= 0, got {h}")
    return BoundaryCondition(kind, h if kind == BCKind.ROBIN else 0j)


def parse_obstacle(sec, path, solver):
    if not isinstance(sec, dict):
        raise ConfigError(path, "must be an object")
    shape_d = sec.get("shape", {"kind": "sphere"})
    if not isinstance(shape_d, dict):
        raise ConfigError(f"{path}.shape", "must be an object")
    try:
        if "center" in shape_d:
            _vec3(shape_d["center"], f"{path}.shape.center")
        shape = shape_from_dict(shape_d)
    except (InvalidShape, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.shape", str(exc)) from None
    bc = parse_bc(sec.get("bc", {}), f"{path}.bc")
    params = parse_solver(sec.get("solver", {}), f"{path}.solver.", solver)
    if params.source_layout == "confocal" and not isinstance(shape, Ellipsoid):
        raise ConfigError(f"{path}.solver.source_layout", "confocal sources need an ellipsoid")
    return Obstacle(shape, bc, params)


def parse_incident(d):
    sec = _section(d, "incident", "")
    try:
        kind = WaveKind(sec.get("kind", "full"))
    except ValueError:
        raise ConfigError("incident.kind", f"unknown wave kind {sec.get('kind')!r}") from None
    alpha = _unit(_vec3(sec.get("alpha", [0, 0, 1]), "incident.alpha"), "incident.alpha")
    eta = _vec3(sec.get("eta", [1, 0, 1]), "incident.eta", cplx=True)
    eta = tuple(v.real if v.imag == 0 else v for v in eta)
    return PlaneWave(alpha, eta, kind)


def parse_config(d):
    """Validate a decoded JSON document and build an ``ExperimentConfig``."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    mat = parse_material(d)
    solver = parse_solver(d.get("solver", {}), "solver.")
    obs_raw = d.get("obstacles", [{}])
    if not isinstance(obs_raw, list) or not obs_raw:
        raise ConfigError("obstacles", "must be a non-empty list")
    if len(obs_raw) > 2:
        raise ConfigError("obstacles", f"at most 2 obstacles are supported, got {len(obs_raw)}")
    obstacles = tuple(parse_obstacle(o, f"obstacles[{k}]", solver) for k, o in enumerate(obs_raw))
    incident = parse_incident(d)

    ff = _section(d, "farfield", "")
    grid = (_number(ff, "n_theta", "farfield.", 24, int, positive=True),
            _number(ff, "n_phi", "farfield.", 48, int, positive=True))
    if grid[0] < 2 or grid[1] < 2:
        raise ConfigError("farfield.n_theta", "direction grid needs at least 2 x 2 points")
    max_res = _number(ff, "max_residual", "farfield.", 1e-2, positive=True)

    uq = _section(d, "uniqueness", "")
    cap = _number(uq, "cap_half_angle_deg", "uniqueness.", 30.0, positive=True)
    if cap > 180:
        raise ConfigError("uniqueness.cap_half_angle_deg", f"must be at most 180, got {cap}")
    axis = _unit(_vec3(uq.get("cap_axis", [0, 0, 1]), "uniqueness.cap_axis"), "uniqueness.cap_axis")

    di = _section(d, "diff_identity", "")
    diff_eta = _vec3(di.get("eta", [1, 0, 0]), "diff_identity.eta", cplx=True)

    out = _section(d, "outputs", "")
    directory = out.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("outputs.directory", "must be a non-empty string")
    formats = out.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError("outputs.formats", f"must be a list drawn from {list(FORMATS)}, got {formats!r}")

    return ExperimentConfig(mat, obstacles, incident, solver, grid, max_res, cap, axis, diff_eta,
                            Outputs(Path(directory), tuple(formats)), d)


def load_config(path):
    """Read and validate a JSON config file; raises ``ConfigError``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(d)
