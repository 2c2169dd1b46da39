import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from elastoscatter import PlaneWave, Sphere
from elastoscatter.experiments import decomposition_error, hankel_monopole, split_error
from elastoscatter.farfield import (
    FarFieldPattern,
    ModeFitError,
    PatternTag,
    farfield_boundary_integral,
    farfield_from_sources,
    farfield_matrix,
    green_asymptotics_check,
    loglog_slope,
    outgoing_purity,
    projector,
    rellich_modes,
    scaled_field_remainder,
    solution_farfield_integral,
    split_pattern,
)
from elastoscatter.geometry import build_mesh
from elastoscatter.solver import DIRICHLET, NEUMANN, SolverParams, eval_scattered, solve_exterior
from elastoscatter.special import sphere_grid


def test_projector_examples():
    a = projector(np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(a @ [0, 0, 5], [0, 0, 5])
    np.testing.assert_allclose((np.eye(3) - a) @ [0, 0, 5], 0)
    np.testing.assert_allclose(a @ [1, 0, 0], 0)
    np.testing.assert_allclose((np.eye(3) - a) @ [1, 0, 0], [1, 0, 0])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_projector_algebra(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=3)
    x /= np.linalg.norm(x)
    eta = rng.normal(size=3)
    a = projector(x)
    eye = np.eye(3)
    assert np.abs(a @ a - a).max() < 1e-15
    assert np.abs(a - a.T).max() == 0
    assert np.abs((eye - a) @ a).max() < 1e-15
    assert np.linalg.matrix_rank(a) == 1
    # tangential projection is minus the double cross product
    np.testing.assert_allclose((eye - a) @ eta, -np.cross(x, np.cross(x, eta)), atol=1e-14)


def test_projector_rejects_non_unit():
    with pytest.raises(ValueError):
        projector(np.array([1.0, 1.0, 0.0]))


def test_zero_solution_has_zero_patterns(mat):
    sol = solve_exterior(Sphere(), DIRICHLET, None, mat)
    p, s = farfield_from_sources(sol, sphere_grid(4, 8).directions)
    assert np.all(p.values == 0) and np.all(s.values == 0)


def test_zero_traces_give_zero(mat):
    m = build_mesh(Sphere(), 8, 16)
    z = np.zeros((len(m), 3), dtype=complex)
    p, s = farfield_boundary_integral(m, z, z, np.array([0.0, 0.0, 1.0]), mat)
    assert np.all(p == 0) and np.all(s == 0)


def test_pattern_invariants(rigid_sphere):
    p, s = farfield_from_sources(rigid_sphere, sphere_grid(24, 48).directions)
    assert p.invariant_violation() < 1e-12
    assert s.invariant_violation() < 1e-12
    assert (p + s).tag == PatternTag.FULL


def test_invariant_detects_violation():
    d = np.array([[0.0, 0.0, 1.0]])
    assert FarFieldPattern(d, np.array([[1.0, 0.0, 0.0]]), "p_part").invariant_violation() == 1.0
    assert FarFieldPattern(d, np.array([[0.0, 0.0, 1.0]]), "s_part").invariant_violation() == 1.0


def test_routes_agree(rigid_sphere):
    d = sphere_grid(12, 24).directions
    p, s = farfield_from_sources(rigid_sphere, d)
    pi, si = solution_farfield_integral(rigid_sphere, d)
    scale = np.abs(p.values + s.values).max()
    assert np.abs(pi - p.values).max() < 1e-3 * scale
    assert np.abs(si - s.values).max() < 1e-3 * scale


def test_boundary_integral_single_direction(rigid_sphere):
    m = build_mesh(rigid_sphere.shape, 24, 48)
    from elastoscatter.solver import scattered_traction

    u = eval_scattered(rigid_sphere, m.nodes, check=False)
    tu = scattered_traction(rigid_sphere, m.nodes, m.normals)
    x = np.array([0.0, 0.6, 0.8])
    p1, s1 = farfield_boundary_integral(m, u, tu, x, rigid_sphere.material)
    pn, sn = farfield_boundary_integral(m, u, tu, x[None, :], rigid_sphere.material)
    np.testing.assert_allclose(p1, pn[0])
    np.testing.assert_allclose(s1, sn[0])


def test_neumann_routes_agree(mat):
    sol = solve_exterior(Sphere(), NEUMANN, PlaneWave((0.6, 0.0, 0.8), (0.0, 1.0, 0.5)), mat)
    d = sphere_grid(8, 16).directions
    p, s = farfield_from_sources(sol, d)
    pi, si = solution_farfield_integral(sol, d)
    assert np.abs(pi + si - p.values - s.values).max() < 1e-3 * np.abs(p.values + s.values).max()


def test_scaled_remainder_slope(rigid_sphere):
    radii = np.geomspace(20, 320, 9)
    rp, rs = scaled_field_remainder(rigid_sphere, (0.6, 0.0, 0.8), radii)
    assert loglog_slope(radii, rp) == pytest.approx(-1.0, abs=0.1)
    assert loglog_slope(radii, rs) == pytest.approx(-1.0, abs=0.1)


@pytest.fixture(scope="module")
def matrix(mat):
    d = sphere_grid(8, 16).directions
    return farfield_matrix(Sphere(), DIRICHLET, mat, (0.0, 0.6, 0.8), SolverParams(), d)


def test_matrix_column_matches_direct_solve(mat, matrix):
    sol = solve_exterior(Sphere(), DIRICHLET, PlaneWave((0.0, 0.6, 0.8), (1.0, 0.0, 0.0)), mat)
    p, s = farfield_from_sources(sol, matrix.directions)
    np.testing.assert_allclose(matrix.values[:, :, 0], p.values + s.values, atol=1e-10)


def test_matrix_linearity(mat, matrix):
    eta = np.array([0.3, -1.0, 2.0 + 1j])
    sol = solve_exterior(Sphere(), DIRICHLET, PlaneWave((0.0, 0.6, 0.8), tuple(eta)), mat)
    p, s = farfield_from_sources(sol, matrix.directions)
    full = p.values + s.values
    assert np.abs(matrix.apply(eta) - full).max() < 1e-10 * np.abs(full).max()


def test_pressure_shear_decomposition(mat, matrix):
    wave = PlaneWave((0.0, 0.6, 0.8), (1.0, 0.5, -0.3))
    assert decomposition_error(Sphere(), DIRICHLET, mat, wave, SolverParams(), matrix.directions, matrix) < 1e-4


def test_four_block_split_reassembles(matrix):
    assert split_error(matrix) < 1e-14


def test_split_of_identity():
    z = np.array([0.0, 0.0, 1.0])
    a = projector(z)
    blocks = split_pattern(np.eye(3), z, z)
    for got, want in zip(blocks, (a, np.zeros((3, 3)), np.zeros((3, 3)), np.eye(3) - a)):
        np.testing.assert_allclose(got, want, atol=1e-15)


def test_split_stable_under_remeshing(mat):
    d = sphere_grid(6, 12).directions
    m1 = farfield_matrix(Sphere(), DIRICHLET, mat, (0.0, 0.0, 1.0), SolverParams(24, 48), d)
    m2 = farfield_matrix(Sphere(), DIRICHLET, mat, (0.0, 0.0, 1.0), SolverParams(32, 64), d)
    scale = np.abs(m1.values).max()
    for x, a, b in zip(d, m1.values, m2.values):
        for ba, bb in zip(split_pattern(a, x, m1.alpha), split_pattern(b, x, m2.alpha)):
            assert np.abs(ba - bb).max() < 1e-4 * scale


def test_green_asymptotics_zero_polarization(mat):
    rows = green_asymptotics_check(Sphere(), DIRICHLET, mat, (0, 0, 1), (0, 0, 0), [[1.5, 0, 0]], [20, 40])
    assert all(r.residual == 0 and r.scaled == 0 for r in rows)


def test_aligned_polarization_is_pure_pressure(mat):
    p_amp, s_amp = PlaneWave((0.0, 0.0, 1.0), (0.0, 0.0, 1.0)).amplitudes(mat)
    assert np.all(s_amp == 0) and np.any(p_amp != 0)


def test_green_asymptotics_bounded(mat):
    rows = green_asymptotics_check(Sphere(), DIRICHLET, mat, (0.0, 0.0, 1.0), (1.0, 0.0, 1.0),
                                   [[1.5, 0.0, 0.0], [0.0, 1.5, 0.3]], [20, 40, 80])
    scaled = [r.scaled for r in rows]
    assert max(scaled) < 1.5 * min(scaled)
    assert rows[0].residual / rows[-1].residual > 10


@pytest.mark.parametrize("outgoing", [True, False])
def test_rellich_synthetic_monopole(mat, outgoing):
    fits = rellich_modes(hankel_monopole(mat, outgoing), np.geomspace(10, 80, 6), 3, mat)
    f = fits[(0, 0)]
    got, other = (f.beta_s[0], f.gamma_s[0]) if outgoing else (f.gamma_s[0], f.beta_s[0])
    assert got == pytest.approx(math.sqrt(4 * math.pi), rel=1e-8)
    assert abs(other) < 1e-8


def test_rellich_zero_field(mat):
    fits = rellich_modes(lambda x: np.zeros((len(x), 3), dtype=complex), np.geomspace(10, 80, 5), 2, mat)
    assert all(np.all(f.beta_p == 0) and np.all(f.gamma_s == 0) for f in fits.values())
    assert outgoing_purity(fits) == 0.0


def test_rellich_purity_of_scattered_field(rigid_sphere):
    fits = rellich_modes(lambda x: eval_scattered(rigid_sphere, x), np.geomspace(10, 80, 6), 5,
                         rigid_sphere.material)
    assert outgoing_purity(fits) < 1e-2
    assert max(np.linalg.norm(f.beta_s) for f in fits.values()) > 1e-3


def test_rellich_needs_four_radii(mat):
    with pytest.raises(ModeFitError):
        rellich_modes(hankel_monopole(mat), [10.0, 20.0, 40.0], 2, mat)
