"""The thirteen acceptance criteria at their stated tolerances and time limits.

Each test records one line in the acceptance summary printed at the end of
the session, then asserts the same condition.
"""

import math
import time

import numpy as np
import pytest

from elastoscatter import Material, PlaneWave, Sphere
from elastoscatter.config import parse_config
from elastoscatter.experiments import (
    JUMP_PROTOCOL,
    REMAINDER_RADII,
    REMAINDER_DIRECTION,
    betti_error,
    decomposition_error,
    difference_identity,
    jump_error,
    split_error,
    suite_kernels,
    synthetic_mode_errors,
    uniqueness_report,
    RELLICH_RADII,
    _plane_wave_checks,
)
from elastoscatter.farfield import (
    farfield_from_sources,
    farfield_matrix,
    green_asymptotics_check,
    loglog_slope,
    outgoing_purity,
    rellich_modes,
    scaled_field_remainder,
    solution_farfield_integral,
)
from elastoscatter.solver import (
    DIRICHLET,
    NEUMANN,
    BoundaryCondition,
    SolverParams,
    eval_scattered,
    green_tensor_eval,
    solve_exterior,
)
from elastoscatter.special import sphere_grid

pytestmark = pytest.mark.slow

MAT = Material(2.0, 1.0, 2.0)
WAVE = PlaneWave((0.0, 0.0, 1.0), (1.0, 0.0, 1.0))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def record(log, n, conditions, seconds, limit):
    """Log criterion ``n`` from ``{label: (value, passed)}`` plus its time limit."""
    timed = seconds < limit
    passed = timed and all(ok for _, ok in conditions.values())
    parts = [f"{k}={v:.3g}{'' if ok else '(!)'}" for k, (v, ok) in conditions.items()]
    parts.append(f"time={seconds:.1f}s/{limit:g}s{'' if timed else '(!)'}")
    log[n] = (passed, " ".join(parts))
    assert passed, log[n][1]


def _checks(checks, names):
    by_name = {c.name: c for c in checks}
    return {n: (by_name[n].value, by_name[n].passed) for n in names}


def test_criterion_01_kernel_suite(acceptance_log):
    with Timer() as t:
        checks = suite_kernels(parse_config({}))
    names = ["kupradze_transpose_symmetry", "kupradze_argument_swap", "kupradze_fd_residual_order"]
    record(acceptance_log, 1, _checks(checks, names), t.seconds, 10)


def test_criterion_02_traction_forms(acceptance_log):
    from elastoscatter.core import traction, traction_curl_form

    with Timer() as t:
        rng = np.random.default_rng(2)
        jac = rng.normal(size=(100, 3, 3)) + 1j * rng.normal(size=(100, 3, 3))
        nu = rng.normal(size=(100, 3))
        nu /= np.linalg.norm(nu, axis=1)[:, None]
        t1, t2 = traction(MAT, nu, jac), traction_curl_form(MAT, nu, jac)
        dev = float(np.abs(t1 - t2).max() / np.abs(t1).max())
    record(acceptance_log, 2, {"forms": (dev, dev < 1e-13)}, t.seconds, 1)


def test_criterion_03_plane_waves(acceptance_log):
    with Timer() as t:
        checks = _plane_wave_checks(MAT, np.random.default_rng(3))
    names = ["p_wave_parallel", "s_wave_orthogonal", "plane_wave_fd_residual",
             "aligned_polarization_no_shear", "orthogonal_polarization_no_pressure",
             "aligned_polarization_has_pressure", "orthogonal_polarization_has_shear"]
    record(acceptance_log, 3, _checks(checks, names), t.seconds, 5)


def test_criterion_04_jump_relation(acceptance_log):
    (n1, h1), (n2, h2) = JUMP_PROTOCOL
    with Timer() as t:
        e1 = jump_error(MAT, n1, h1)
        e2 = jump_error(MAT, n2, h2)
    record(acceptance_log, 4, {f"err_{n1}x{2 * n1}": (e1, e1 < 5e-2), "gain": (e1 / e2, e1 / e2 >= 2)},
           t.seconds, 120)


def test_criterion_05_solver_residual(acceptance_log):
    axial = PlaneWave((0.0, 0.0, 1.0), (0.0, 0.0, 1.0))
    params = SolverParams(24, 48, shrink=0.7)
    cases = {"dirichlet": (DIRICHLET, 1e-6), "neumann": (NEUMANN, 1e-4),
             "robin_i": (BoundaryCondition("robin", 1j), 1e-4)}
    conditions, slowest = {}, 0.0
    for name, (bc, tol) in cases.items():
        with Timer() as t:
            res = solve_exterior(Sphere(), bc, axial, MAT, params).residual_report
        slowest = max(slowest, t.seconds)
        conditions[name] = (res, res < tol)
    record(acceptance_log, 5, conditions, slowest, 60)


def test_criterion_06_betti(acceptance_log):
    with Timer() as t:
        err = betti_error(solve_exterior(Sphere(), DIRICHLET, WAVE, MAT))
    record(acceptance_log, 6, {"betti": (err, err < 1e-3)}, t.seconds, 60)


def test_criterion_07_farfield_consistency(acceptance_log):
    with Timer() as t:
        sol = solve_exterior(Sphere(), DIRICHLET, WAVE, MAT)
        d = sphere_grid(12, 24).directions
        p, s = farfield_from_sources(sol, d)
        pi, si = solution_farfield_integral(sol, d)
        full = p.values + s.values
        dev = float(np.linalg.norm(pi + si - full, axis=1).max() / np.linalg.norm(full, axis=1).max())
        rp, rs = scaled_field_remainder(sol, REMAINDER_DIRECTION, REMAINDER_RADII)
        sp, ss = loglog_slope(REMAINDER_RADII, rp), loglog_slope(REMAINDER_RADII, rs)
    record(acceptance_log, 7, {"routes": (dev, dev < 1e-3), "p_slope": (sp, abs(sp + 1) <= 0.1),
                               "s_slope": (ss, abs(ss + 1) <= 0.1)}, t.seconds, 120)


def test_criterion_08_farfield_structure(acceptance_log):
    # a generic polarization; eta = alpha-plane choices make the decomposition trivial
    wave = PlaneWave((0.0, 0.6, 0.8), (1.0, 0.5, -0.3))
    with Timer() as t:
        params = SolverParams()
        d = sphere_grid(12, 24).directions
        sol = solve_exterior(Sphere(), DIRICHLET, wave, MAT, params)
        p, s = farfield_from_sources(sol, d)
        inv = max(p.invariant_violation(), s.invariant_violation())
        m = farfield_matrix(Sphere(), DIRICHLET, MAT, wave.direction, params, d)
        dec = decomposition_error(Sphere(), DIRICHLET, MAT, wave, params, d, m)
        split = split_error(m)
    record(acceptance_log, 8, {"invariants": (inv, inv < 1e-10), "decomposition": (dec, dec < 1e-4),
                               "split": (split, split < 1e-14)}, t.seconds, 180)


def test_criterion_09_reciprocity(acceptance_log):
    rng = np.random.default_rng(9)
    worst = 0.0
    with Timer() as t:
        for _ in range(5):
            dirs = rng.normal(size=(2, 3))
            x, y = rng.uniform(1.5, 3.0, (2, 1)) * dirs / np.linalg.norm(dirs, axis=1)[:, None]
            e1, e2 = rng.normal(size=3), rng.normal(size=3)
            a = e2 @ green_tensor_eval(Sphere(), DIRICHLET, MAT, y, e1, x)
            b = e1 @ green_tensor_eval(Sphere(), DIRICHLET, MAT, x, e2, y)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    record(acceptance_log, 9, {"reciprocity": (worst, worst < 1e-4)}, t.seconds, 180)


def test_criterion_10_green_asymptotics(acceptance_log):
    sigmas = [20.0, 40.0, 80.0]
    with Timer() as t:
        rows = green_asymptotics_check(Sphere(), DIRICHLET, MAT, (0.0, 0.0, 1.0), (1.0, 0.0, 1.0),
                                       [[1.5, 0.0, 0.0], [0.0, 1.5, 0.3], [-1.2, 0.4, 1.0]], sigmas)
    scaled = [r.scaled for r in rows]
    ratios = [b / a for a, b in zip(scaled, scaled[1:])]
    worst = max(max(r, 1 / r) for r in ratios)
    record(acceptance_log, 10, {"max_ratio": (worst, worst <= 1.3)}, t.seconds, 300)


def test_criterion_11_rellich(acceptance_log):
    with Timer() as t:
        _, leak_out = synthetic_mode_errors(MAT, True)
        _, leak_in = synthetic_mode_errors(MAT, False)
        sol = solve_exterior(Sphere(), DIRICHLET, WAVE, MAT)
        purity = outgoing_purity(rellich_modes(lambda x: eval_scattered(sol, x), RELLICH_RADII, 6, MAT))
    record(acceptance_log, 11, {"leak_outgoing": (leak_out, leak_out < 1e-8),
                                "leak_incoming": (leak_in, leak_in < 1e-8),
                                "purity": (purity, purity < 1e-2)}, t.seconds, 120)


def _two_spheres(n_theta):
    solver = {"n_theta": n_theta, "n_phi": 2 * n_theta}
    return parse_config({"solver": solver, "obstacles": [
        {"shape": {"kind": "sphere"}},
        {"shape": {"kind": "sphere", "center": [4.0, 0.0, 0.0]}}]}).obstacles


def test_criterion_12_difference_identity(acceptance_log):
    x, y, eta = np.array([2.0, 0.0, 2.0]), np.array([2.0, 0.0, -2.0]), np.array([1.0, 0.0, 0.0])
    errs = []
    with Timer() as t:
        for n in (16, 24):
            lhs, rhs, _ = difference_identity(_two_spheres(n), MAT, x, y, eta)
            errs.append(float(np.abs(lhs - rhs).max() / np.abs(lhs).max()))
    record(acceptance_log, 12, {"coarse": (errs[0], errs[0] < 5e-2), "fine": (errs[1], errs[1] < errs[0])},
           t.seconds, 600)


def _uniqueness(second):
    eta = (1 / math.sqrt(2), 0.0, 1 / math.sqrt(2))
    return uniqueness_report(parse_config({
        "incident": {"alpha": [0, 0, 1], "eta": list(eta)},
        "obstacles": [{"shape": {"kind": "sphere"}}, second],
        "uniqueness": {"cap_half_angle_deg": 30},
    }))


def test_criterion_13_uniqueness(acceptance_log):
    with Timer() as t:
        distinct = _uniqueness({"shape": {"kind": "ellipsoid", "axes": [1.3, 1.0, 1.0]}})
        same = _uniqueness({"shape": {"kind": "sphere"}})
        remeshed = _uniqueness({"shape": {"kind": "sphere"}, "solver": {"n_theta": 32, "n_phi": 64}})
    conditions = {
        "ellipsoid_over_bound": (distinct["sup_over_bound"], distinct["sup_distance"] > 10 * distinct["error_bound"]),
        "identical_over_bound": (same["sup_over_bound"], same["sup_distance"] < 2 * same["error_bound"]),
        "remeshed_over_bound": (remeshed["sup_over_bound"],
                                remeshed["sup_distance"] < 2 * remeshed["error_bound"]),
    }
    record(acceptance_log, 13, conditions, t.seconds, 300)
