"""Experiment drivers behind the command line.

Each driver takes a parsed ``ExperimentConfig``, runs its computation and
writes CSV/JSON files into ``config.outputs.directory``. Drivers raise
``NumericalFailure`` when a result is unusable; files written by a failed
run are removed.
"""

from contextlib import contextmanager
import csv
from dataclasses import asdict, dataclass
import json
import math
from pathlib import Path
import subprocess

import numpy as np

from . import __version__, kernels
from .core import (
    PlaneWave,
    WaveKind,
    kupradze_tensor,
    navier_residual_fd,
    traction,
    traction_curl_form,
)
from .farfield import (
    farfield_from_sources,
    farfield_matrix,
    loglog_slope,
    outgoing_purity,
    rellich_modes,
    scaled_field_remainder,
    solution_farfield_integral,
    split_pattern,
)
from .geometry import Sphere, build_mesh, signed_gap
from .potentials import SurfaceDensity, betti_representation, jump_estimate
from .solver import (
    GeometryError,
    IllConditioned,
    ZeroIncidence,
    eval_scattered,
    eval_total,
    green_solution,
    held_out_mesh,
    scattered_traction,
    solve_exterior,
    total_traction,
)
from .special import sph_hankel1, sph_hankel2, sphere_grid

SUITES = ("kernels", "potentials", "solver", "farfield", "rellich")
CSV_DIGITS = 17


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Check:
    """One verification outcome; ``passed`` compares ``value`` with ``tolerance``."""

    name: str
    value: float
    tolerance: float
    passed: bool

    @classmethod
    def at_most(cls, name, value, tolerance):
        value = float(value)
        return cls(name, value, float(tolerance), bool(value <= tolerance))

    @classmethod
    def near(cls, name, value, target, tolerance):
        value = float(value)
        return cls(name, value, float(tolerance), bool(abs(value - target) <= tolerance))

    @classmethod
    def at_least(cls, name, value, minimum):
        value = float(value)
        return cls(name, value, float(minimum), bool(value >= minimum))


# ---------------------------------------------------------------- file output


def version_string():
    """``v<version>`` plus ``-g<commit>`` when run from a git checkout."""
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5, check=True).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"v{__version__}-g{rev}" if rev else f"v{__version__}"


def fmt(x):
    return f"{x:.{CSV_DIGITS}g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, allow_nan=True)
        fh.write("\n")


class OutputSet:
    """Tracks files written by one run so a failure can remove them."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.paths = []

    def path(self, name):
        p = self.directory / name
        self.paths.append(p)
        return p

    def discard(self):
        for p in self.paths:
            p.unlink(missing_ok=True)


@contextmanager
def outputs(directory):
    out = OutputSet(directory)
    out.directory.mkdir(parents=True, exist_ok=True)
    try:
        yield out
    except BaseException:
        out.discard()
        raise


# ---------------------------------------------------------------- verify suites


def _rng():
    return np.random.default_rng(20240601)


def _random_pairs(rng, n):
    x = rng.uniform(-2, 2, (n, 3))
    y = rng.uniform(-2, 2, (n, 3))
    close = np.linalg.norm(x - y, axis=1) < 0.2
    y[close] += 1.0
    return x, y


def kupradze_column(mat, y, j):
    """Column ``j`` of ``Upsilon(., y)`` as a vector field of (N, 3) points."""
    coeff = np.eye(3)[j][None, :]
    src = np.reshape(y, (1, 3))

    def f(x):
        return kernels.kupradze_apply(np.reshape(x, (1, 3)), src, coeff,
                                      mat.kappa_p, mat.kappa_s, mat.omega, mat.mu)[0]
    return f


def fd_order(field, x, mat, h):
    """Observed order of ``navier_residual_fd`` from steps ``h`` and ``h / 2``."""
    r1 = np.linalg.norm(navier_residual_fd(field, x, mat, h))
    r2 = np.linalg.norm(navier_residual_fd(field, x, mat, h / 2))
    return math.log2(r1 / r2)


def suite_kernels(cfg):
    mat = cfg.material
    rng = _rng()
    x, y = _random_pairs(rng, 100)
    sym = swap = 0.0
    for a, b in zip(x, y):
        u = kupradze_tensor(a, b, mat)
        scale = np.abs(u).max()
        sym = max(sym, np.abs(u - u.T).max() / scale)
        swap = max(swap, np.abs(u - kupradze_tensor(b, a, mat)).max() / scale)
    checks = [Check.at_most("kupradze_transpose_symmetry", sym, 1e-13),
              Check.at_most("kupradze_argument_swap", swap, 1e-13)]

    src = np.zeros(3)
    orders = [fd_order(kupradze_column(mat, src, j), np.array([0.7, -0.4, 0.5]), mat, 0.02) for j in range(3)]
    checks.append(Check.near("kupradze_fd_residual_order", max(orders, key=lambda o: abs(o - 2)), 2.0, 0.2))

    jac = rng.normal(size=(100, 3, 3)) + 1j * rng.normal(size=(100, 3, 3))
    nu = rng.normal(size=(100, 3))
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    t1, t2 = traction(mat, nu, jac), traction_curl_form(mat, nu, jac)
    checks.append(Check.at_most("traction_forms_agree", np.abs(t1 - t2).max() / np.abs(t1).max(), 1e-13))

    checks.extend(_plane_wave_checks(mat, rng))
    return checks


def _plane_wave_checks(mat, rng):
    checks = []
    par = orth = resid = 0.0
    pts = rng.uniform(-1, 1, (5, 3))
    for _ in range(10):
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        eta = rng.normal(size=3)
        p = PlaneWave(tuple(a), tuple(eta), WaveKind.PRESSURE).field(pts, mat)
        s = PlaneWave(tuple(a), tuple(eta), WaveKind.SHEAR).field(pts, mat)
        par = max(par, np.abs(np.cross(p, a)).max() / np.abs(p).max())
        orth = max(orth, np.abs(s @ a).max() / np.abs(s).max())
        full = PlaneWave(tuple(a), tuple(eta))
        for x in pts[:2]:
            r = navier_residual_fd(lambda z: full.field(z, mat), x, mat, 5e-4)
            resid = max(resid, np.linalg.norm(r) / (mat.omega**2 * np.linalg.norm(full.field(x, mat))))
    checks += [Check.at_most("p_wave_parallel", par, 1e-14),
               Check.at_most("s_wave_orthogonal", orth, 1e-14),
               Check.at_most("plane_wave_fd_residual", resid, 1e-6)]
    along = PlaneWave((0.0, 0.0, 1.0), (0.0, 0.0, 2.0))
    across = PlaneWave((0.0, 0.0, 1.0), (1.0, -1.0, 0.0))
    p_a, s_a = along.amplitudes(mat)
    p_c, s_c = across.amplitudes(mat)
    checks.append(Check.at_most("aligned_polarization_no_shear", float(np.abs(s_a).max()), 0.0))
    checks.append(Check.at_most("orthogonal_polarization_no_pressure", float(np.abs(p_c).max()), 0.0))
    checks.append(Check.at_least("aligned_polarization_has_pressure", float(np.abs(p_a).max()), 1e-12))
    checks.append(Check.at_least("orthogonal_polarization_has_shear", float(np.abs(s_c).max()), 1e-12))
    return checks


JUMP_PROTOCOL = ((32, (0.3, 0.2, 0.1)), (48, (0.15, 0.1, 0.05)))


def jump_error(mat, n_theta, offsets, samples=13):
    """Max ``|jump + phi|`` for ``phi = nu`` on the unit sphere over sampled nodes."""
    mesh = build_mesh(Sphere(), n_theta, 2 * n_theta)
    dens = SurfaceDensity(mesh, mesh.normals)
    worst = 0.0
    for n in range(0, len(mesh), max(1, len(mesh) // samples)):
        est = jump_estimate(dens, n, offsets, mat)
        worst = max(worst, float(np.linalg.norm(est + mesh.normals[n])))
    return worst


def exterior_probe_points(shape, count=5, factor=2.0, seed=7):
    """``count`` points at ``factor`` times the bounding radius in random directions."""
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return np.asarray(shape.center) + factor * shape.bounding_radius * d


def betti_error(sol, n_theta=32):
    mesh = build_mesh(sol.shape, n_theta, 2 * n_theta)
    u = eval_scattered(sol, mesh.nodes, check=False)
    tu = scattered_traction(sol, mesh.nodes, mesh.normals)
    x = exterior_probe_points(sol.shape)
    rep = betti_representation(mesh, u, tu, x, sol.material)
    ref = eval_scattered(sol, x)
    return float(np.max(np.linalg.norm(rep - ref, axis=1)) / np.max(np.linalg.norm(ref, axis=1)))


def suite_potentials(cfg):
    mat = cfg.material
    (n1, h1), (n2, h2) = JUMP_PROTOCOL
    e1, e2 = jump_error(mat, n1, h1), jump_error(mat, n2, h2)
    checks = [Check.at_most(f"jump_relation_{n1}x{2 * n1}", e1, 5e-2),
              Check.at_least(f"jump_refinement_gain_{n2}x{2 * n2}", e1 / e2, 2.0)]
    for k, obs in enumerate(cfg.obstacles):
        sol = solve_exterior(obs.shape, obs.bc, cfg.incident, mat, obs.solver)
        checks.append(Check.at_most(f"betti_representation_obstacle{k}", betti_error(sol), 1e-3))
    return checks


def solver_checks(shape, bc, mat, incident, params, tag="", residual_tol=1e-4):
    sol = solve_exterior(shape, bc, incident, mat, params)
    checks = [Check.at_most(f"held_out_residual{tag}", sol.residual_report, residual_tol)]
    zero = solve_exterior(shape, bc, ZeroIncidence(), mat, params)
    checks.append(Check.at_most(f"zero_incident_zero_field{tag}", float(np.abs(zero.coefficients).max()), 0.0))
    a = incident.direction
    w1, w2 = PlaneWave(a, (1.0, 0.0, 0.0)), PlaneWave(a, (0.0, 1.0, 0.0))
    w12 = PlaneWave(a, (2.0, -3.0, 0.0))
    pts = held_out_mesh(sol).nodes * 1.5
    s1, s2, s12 = (solve_exterior(shape, bc, w, mat, params) for w in (w1, w2, w12))
    lhs = eval_scattered(s12, pts, check=False)
    rhs = 2 * eval_scattered(s1, pts, check=False) - 3 * eval_scattered(s2, pts, check=False)
    checks.append(Check.at_most(f"linearity{tag}", np.abs(lhs - rhs).max() / np.abs(lhs).max(), 1e-10))
    return checks


def suite_solver(cfg):
    checks = []
    for k, obs in enumerate(cfg.obstacles):
        checks += solver_checks(obs.shape, obs.bc, cfg.material, cfg.incident, obs.solver, tag=f"_obstacle{k}")
    return checks


REMAINDER_RADII = np.geomspace(20, 320, 9)
REMAINDER_DIRECTION = (0.6, 0.0, 0.8)


def farfield_checks(sol, directions, tag=""):
    p, s = farfield_from_sources(sol, directions)
    checks = [Check.at_most(f"p_part_parallel{tag}", p.invariant_violation(), 1e-10),
              Check.at_most(f"s_part_tangential{tag}", s.invariant_violation(), 1e-10)]
    pi, si = solution_farfield_integral(sol, directions)
    full = p.values + s.values
    dev = np.linalg.norm(pi + si - full, axis=1).max() / np.linalg.norm(full, axis=1).max()
    checks.append(Check.at_most(f"route_agreement{tag}", dev, 1e-3))
    rp, rs = scaled_field_remainder(sol, REMAINDER_DIRECTION, REMAINDER_RADII)
    checks.append(Check.near(f"p_remainder_slope{tag}", loglog_slope(REMAINDER_RADII, rp), -1.0, 0.1))
    checks.append(Check.near(f"s_remainder_slope{tag}", loglog_slope(REMAINDER_RADII, rs), -1.0, 0.1))
    return checks


def decomposition_error(shape, bc, mat, wave, params, directions, m=None):
    """Max relative deviation of ``U_inf eta`` from ``P_inf eta + S_inf eta``."""
    m = m if m is not None else farfield_matrix(shape, bc, mat, wave.direction, params, directions)
    eta = np.asarray(wave.polarization)
    full = m.apply(eta)
    parts = []
    for kind in (WaveKind.PRESSURE, WaveKind.SHEAR):
        sol = solve_exterior(shape, bc, PlaneWave(wave.direction, wave.polarization, kind), mat, params)
        p, s = farfield_from_sources(sol, directions)
        parts.append(p.values + s.values)
    return float(np.linalg.norm(full - sum(parts), axis=1).max() / np.linalg.norm(full, axis=1).max())


def split_error(m):
    worst = 0.0
    for d, blk in zip(m.directions, m.values):
        worst = max(worst, np.abs(sum(split_pattern(blk, d, m.alpha)) - blk).max() / np.abs(blk).max())
    return float(worst)


def suite_farfield(cfg):
    grid = sphere_grid(*cfg.farfield_grid)
    d = grid.directions
    checks = []
    for k, obs in enumerate(cfg.obstacles):
        tag = f"_obstacle{k}"
        sol = solve_exterior(obs.shape, obs.bc, cfg.incident, cfg.material, obs.solver)
        checks += farfield_checks(sol, d, tag)
        m = farfield_matrix(obs.shape, obs.bc, cfg.material, cfg.incident.direction, obs.solver, d)
        col = np.linalg.norm(m.apply(cfg.incident.polarization) - _pattern(sol, d), axis=1).max()
        checks.append(Check.at_most(f"matrix_matches_direct_solve{tag}",
                                    col / np.linalg.norm(_pattern(sol, d), axis=1).max(), 1e-8))
        checks.append(Check.at_most(f"pressure_shear_decomposition{tag}",
                                    decomposition_error(obs.shape, obs.bc, cfg.material, cfg.incident,
                                                        obs.solver, d, m), 1e-4))
        checks.append(Check.at_most(f"four_block_split{tag}", split_error(m), 1e-14))
    return checks


def _pattern(sol, d):
    p, s = farfield_from_sources(sol, d)
    return p.values + s.values


RELLICH_RADII = np.geomspace(10, 80, 6)


def hankel_monopole(mat, outgoing=True):
    """``h_0(kappa_s |x|) e_1`` with the outgoing or incoming Hankel function."""
    h = sph_hankel1 if outgoing else sph_hankel2

    def f(x):
        r = np.linalg.norm(x, axis=1)
        out = np.zeros((len(x), 3), dtype=complex)
        out[:, 0] = [h(0, mat.kappa_s * ri) for ri in r]
        return out
    return f


def synthetic_mode_errors(mat, outgoing=True):
    """(coefficient error, cross-branch leakage) for the synthetic monopole."""
    fits = rellich_modes(hankel_monopole(mat, outgoing), RELLICH_RADII, 4, mat)
    f0 = fits[(0, 0)]
    want = math.sqrt(4 * math.pi)
    got, other = (f0.beta_s, f0.gamma_s) if outgoing else (f0.gamma_s, f0.beta_s)
    err = abs(got[0] - want) / want
    leak = max(np.abs(other).max(), np.abs(got[1:]).max())
    for key, f in fits.items():
        leak = max(leak, np.abs(f.beta_p).max(), np.abs(f.gamma_p).max())
        if key != (0, 0):
            leak = max(leak, np.abs(f.beta_s).max(), np.abs(f.gamma_s).max())
    return float(err), float(leak / want)


def suite_rellich(cfg):
    mat = cfg.material
    checks = []
    for outgoing, name in ((True, "outgoing"), (False, "incoming")):
        err, leak = synthetic_mode_errors(mat, outgoing)
        checks.append(Check.at_most(f"synthetic_{name}_coefficient", err, 1e-8))
        checks.append(Check.at_most(f"synthetic_{name}_leakage", leak, 1e-8))
    zero = rellich_modes(lambda x: np.zeros((len(x), 3), dtype=complex), RELLICH_RADII, 3, mat)
    zmax = max(max(np.abs(f.beta_p).max(), np.abs(f.gamma_p).max(), np.abs(f.beta_s).max(),
                   np.abs(f.gamma_s).max()) for f in zero.values())
    checks.append(Check.at_most("zero_field_zero_modes", zmax, 0.0))
    for k, obs in enumerate(cfg.obstacles):
        sol = solve_exterior(obs.shape, obs.bc, cfg.incident, mat, obs.solver)
        fits = rellich_modes(lambda x: eval_scattered(sol, x), RELLICH_RADII, 6, mat)
        checks.append(Check.at_most(f"outgoing_purity_obstacle{k}", outgoing_purity(fits), 1e-2))
    return checks


SUITE_FUNCTIONS = {
    "kernels": suite_kernels,
    "potentials": suite_potentials,
    "solver": suite_solver,
    "farfield": suite_farfield,
    "rellich": suite_rellich,
}


def run_verify(cfg, suite):
    """Run a suite, write ``verify_<suite>.json``; returns ``(checks, path)``."""
    if suite not in SUITE_FUNCTIONS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    checks = SUITE_FUNCTIONS[suite](cfg)
    with outputs(cfg.outputs.directory) as out:
        path = out.path(f"verify_{suite}.json")
        write_json(path, {"suite": suite, "backend": kernels.BACKEND, "version": version_string(),
                          "passed": all(c.passed for c in checks), "checks": [asdict(c) for c in checks]})
    return checks, path


# ---------------------------------------------------------------- far field


PATTERN_COLUMNS = ["theta", "phi"] + [f"{tag}_{part}{c}" for tag in ("p_part", "s_part", "full")
                                     for c in ("x", "y", "z") for part in ("re_", "im_")]


def pattern_rows(grid, p, s):
    full = p + s
    for k in range(len(grid.theta)):
        row = [fmt(grid.theta[k]), fmt(grid.phi[k])]
        for vals in (p, s, full):
            for c in range(3):
                row += [fmt(vals[k, c].real), fmt(vals[k, c].imag)]
        yield row


def read_pattern_csv(path):
    """Parse a pattern CSV back into (theta, phi, p, s, full) arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    theta, phi = data[:, 0], data[:, 1]
    cplx = data[:, 2::2] + 1j * data[:, 3::2]
    return theta, phi, cplx[:, 0:3], cplx[:, 3:6], cplx[:, 6:9]


def _solve_checked(shape, bc, incident, mat, params, limit):
    try:
        sol = solve_exterior(shape, bc, incident, mat, params)
    except IllConditioned as exc:
        raise NumericalFailure(str(exc)) from exc
    if not sol.residual_report <= limit:
        raise NumericalFailure(f"held-out residual {sol.residual_report:.3e} exceeds {limit:.3e}")
    return sol


def run_farfield(cfg):
    """Pattern CSV, far-field matrix JSON and metadata JSON for one obstacle."""
    cfg.require_obstacles(1)
    obs, mat = cfg.obstacle, cfg.material
    grid = sphere_grid(*cfg.farfield_grid)
    d = grid.directions
    with outputs(cfg.outputs.directory) as out:
        sol = _solve_checked(obs.shape, obs.bc, cfg.incident, mat, obs.solver, cfg.max_residual)
        p, s = farfield_from_sources(sol, d)
        written = {}
        if "csv" in cfg.outputs.formats:
            path = out.path("pattern.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(PATTERN_COLUMNS)
                w.writerows(pattern_rows(grid, p.values, s.values))
            written["pattern"] = path.name
        residuals = []
        if "json" in cfg.outputs.formats:
            try:
                m = farfield_matrix(obs.shape, obs.bc, mat, cfg.incident.direction, obs.solver, d)
            except IllConditioned as exc:
                raise NumericalFailure(str(exc)) from exc
            residuals = list(m.residuals)
            if max(residuals) > cfg.max_residual:
                raise NumericalFailure(f"far-field matrix solve residual {max(residuals):.3e} "
                                       f"exceeds {cfg.max_residual:.3e}")
            path = out.path("farfield_matrix.json")
            write_json(path, {
                "alpha": list(cfg.incident.direction),
                "layout": "matrix[i][j] = [re, im] of U_inf(xhat, alpha)[i, j]",
                "directions": {str(k): {"theta": grid.theta[k], "phi": grid.phi[k],
                                        "matrix": m.values[k], "p_matrix": m.p_values[k],
                                        "s_matrix": m.s_values[k]} for k in range(len(d))},
            })
            written["matrix"] = path.name
        meta_path = out.path("metadata.json")
        meta = {
            "version": version_string(),
            "backend": kernels.BACKEND,
            "config": cfg.echo(),
            "residual_report": sol.residual_report,
            "matrix_residuals": residuals,
            "collocation_rank": sol.rank,
            "direction_grid": {"n_theta": grid.n_theta, "n_phi": grid.n_phi, "count": len(d)},
            "invariant_violation": {"p_part": p.invariant_violation(), "s_part": s.invariant_violation()},
            "files": written,
        }
        write_json(meta_path, meta)
    return meta


# ---------------------------------------------------------------- uniqueness


def cap_mask(grid, axis, half_angle_deg):
    cosang = grid.directions @ np.asarray(axis, dtype=float)
    return cosang >= math.cos(math.radians(half_angle_deg)) - 1e-14


def pattern_distance(a, b, weights):
    """Relative sup and L2 distances of ``b`` from ``a`` (vector patterns on a grid)."""
    diff = np.linalg.norm(a - b, axis=1)
    mag = np.linalg.norm(a, axis=1)
    sup = float(diff.max() / mag.max())
    l2 = float(math.sqrt(np.sum(weights * diff**2) / np.sum(weights * mag**2)))
    return sup, l2


def uniqueness_report(cfg):
    """Far-field distance of two obstacles on a polar cap versus the solver-error bound.

    The bound is the sum of both held-out residuals. The verdict is
    ``distinct`` above ten times the bound, ``indistinguishable`` below twice
    the bound and ``inconclusive`` between.
    """
    cfg.require_obstacles(2)
    grid = sphere_grid(*cfg.farfield_grid)
    mask = cap_mask(grid, cfg.cap_axis, cfg.cap_half_angle_deg)
    if not np.any(mask):
        raise NumericalFailure("no grid directions inside the cap; refine the far-field grid or widen the cap")
    d, w = grid.directions[mask], grid.weights[mask]
    pats, res = [], []
    for obs in cfg.obstacles:
        sol = _solve_checked(obs.shape, obs.bc, cfg.incident, cfg.material, obs.solver, cfg.max_residual)
        pats.append(_pattern(sol, d))
        res.append(sol.residual_report)
    sup, l2 = pattern_distance(pats[0], pats[1], w)
    bound = res[0] + res[1]
    if sup > 10 * bound:
        verdict = "distinct"
    elif sup < 2 * bound:
        verdict = "indistinguishable"
    else:
        verdict = "inconclusive"
    return {
        "cap_half_angle_deg": cfg.cap_half_angle_deg,
        "cap_axis": list(cfg.cap_axis),
        "cap_directions": int(mask.sum()),
        "residuals": res,
        "error_bound": bound,
        "sup_distance": sup,
        "l2_distance": l2,
        "sup_over_bound": sup / bound if bound > 0 else math.inf,
        "verdict": verdict,
    }


def run_uniqueness(cfg):
    report = uniqueness_report(cfg)
    with outputs(cfg.outputs.directory) as out:
        write_json(out.path("uniqueness.json"),
                   {"version": version_string(), "config": cfg.echo(), **report})
    return report


# ---------------------------------------------------------------- difference identity


def _require_exterior(shape, x, what):
    if signed_gap(shape, x)[0] <= 0:
        raise GeometryError(f"{what} {list(np.ravel(x))} is not outside obstacle {shape}")


def difference_identity(obstacles, mat, x, y, eta):
    """Both sides of the two-obstacle Green difference identity.

    ``G1(x, y) eta - G2(x, y) eta`` against the integral over both
    boundaries of ``(T G2(w, x))^T G1(w, y) eta - G2(w, x)^T T G1(w, y) eta``
    (real transposes, outward normals). Green tensors come from point-source
    solves; their tractions use the closed-form kernel traction for both the
    incident part and the source-sum corrector.
    """
    (s1, b1, p1), (s2, b2, p2) = ((o.shape, o.bc, o.solver) for o in obstacles)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=complex)
    for shape in (s1, s2):
        _require_exterior(shape, x, "test point x")
        _require_exterior(shape, y, "source point y")
    if not np.any(eta):
        return np.zeros(3, dtype=complex), np.zeros(3, dtype=complex), []
    g1 = green_solution(s1, b1, mat, y, eta, p1)
    g2y = green_solution(s2, b2, mat, y, eta, p2)
    lhs = eval_total(g1, x) - eval_total(g2y, x)
    g2 = [green_solution(s2, b2, mat, x, e, p2) for e in np.eye(3)]
    rhs = np.zeros(3, dtype=complex)
    for shape, params in ((s1, p1), (s2, p2)):
        mesh = build_mesh(shape, params.n_theta, params.n_phi)
        u1 = eval_total(g1, mesh.nodes, check=False)
        t1 = total_traction(g1, mesh.nodes, mesh.normals)
        u2 = np.stack([eval_total(g, mesh.nodes, check=False) for g in g2], axis=-1)
        t2 = np.stack([total_traction(g, mesh.nodes, mesh.normals) for g in g2], axis=-1)
        rhs += np.einsum("m,mij,mi->j", mesh.weights, t2, u1) - np.einsum("m,mij,mi->j", mesh.weights, u2, t1)
    residuals = [g1.residual_report, g2y.residual_report] + [g.residual_report for g in g2]
    return lhs, rhs, residuals


def run_difference_identity(cfg, x, y):
    cfg.require_obstacles(2)
    cfg.require_disjoint()
    lhs, rhs, residuals = difference_identity(cfg.obstacles, cfg.material, x, y, cfg.diff_eta)
    scale = np.abs(lhs).max()
    mismatch = float(np.abs(lhs - rhs).max() / scale) if scale > 0 else float(np.abs(rhs).max())
    report = {
        "version": version_string(),
        "config": cfg.echo(),
        "x": list(map(float, x)),
        "y": list(map(float, y)),
        "lhs": lhs,
        "rhs": rhs,
        "componentwise_mismatch": (np.abs(lhs - rhs) / scale if scale > 0 else np.abs(rhs)),
        "relative_mismatch": mismatch,
        "solve_residuals": residuals,
    }
    with outputs(cfg.outputs.directory) as out:
        write_json(out.path("diff_identity.json"), report)
    return report
