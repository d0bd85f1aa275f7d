"""Mode III solver tests on reduced grids (the acceptance suite runs the
full-size configurations)."""

import dataclasses

import numpy as np
import pytest

from interfrac import materials as mat
from interfrac import mode3
from interfrac.errors import ValidationError


def sym_loading(F=1.0, l=1.0):
    return mat.Loading(
        terms=(
            mat.LoadTerm(face="upper", c=(-F / l,), l=l, n=0),
            mat.LoadTerm(face="lower", c=(-F / l,), l=l, n=0),
        )
    )


def asym_loading(F=1.0, l=1.0):
    return mat.Loading(
        terms=(
            mat.LoadTerm(face="upper", c=(-F / l,), l=l, n=0),
            mat.LoadTerm(face="lower", c=(F / l,), l=l, n=1),
        )
    )


def make_problem(mat2="C", kappa_star=5.0, loading=None, n=120, formulation="t-only"):
    A = mat.material_preset("A")
    bc = mat.bimaterial_constants(A, mat.material_preset(mat2))
    kappa = kappa_star * A.out_of_plane_root()
    loading = loading if loading is not None else sym_loading()
    grid = mode3.default_grid(bc, kappa, loading, n=n)
    return mode3.Mode3Problem(
        constants=bc, kappa=kappa, loading=loading, grid=grid, formulation=formulation
    )


@pytest.fixture(scope="module")
def solved_default():
    prob = make_problem()
    return prob, mode3.solve_mode3(prob)


def test_zero_loading_gives_zero_solution():
    zero = mat.Loading(terms=(mat.LoadTerm(face="upper", c=(0.0,), l=1.0, n=0),))
    prob = make_problem(loading=zero)
    sol = mode3.solve_mode3(prob)
    assert np.allclose(sol.jump, 0.0)
    assert np.allclose(sol.traction, 0.0)


def test_validation_paths():
    A = mat.material_preset("A")
    bc = mat.bimaterial_constants(A, A)
    load = sym_loading()
    grid = mode3.default_grid(bc, 5.0, load, n=60)
    unbalanced = mat.Loading(terms=(mat.LoadTerm(face="upper", c=(-1.0,), l=1.0, n=0),))
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=bc, kappa=5.0, loading=unbalanced, grid=grid)
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=bc, kappa=-1.0, loading=load, grid=grid)
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=bc, kappa=5.0, loading=load, grid=grid,
                           formulation="p-only")
    # vector loading rejected
    vec = mat.Loading(terms=(mat.LoadTerm(face="upper", c=(0.0, 1.0), l=1.0, n=0),))
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=bc, kappa=5.0, loading=vec, grid=grid)
    # near-perfect interface rejected before solving
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=bc, kappa=1e-4, loading=load, grid=grid)
    inc = mat.bimaterial_constants(
        mat.material_preset("incompressible-I"), mat.material_preset("incompressible-I")
    )
    with pytest.raises(ValidationError):
        mode3.Mode3Problem(constants=inc, kappa=5.0, loading=load, grid=grid)


def test_cross_formulation_agreement():
    sols = {}
    for form in mode3.FORMULATIONS:
        prob = make_problem(formulation=form, loading=asym_loading(), n=100)
        sols[form] = mode3.solve_mode3(prob).jump
    ref = sols["t-only"]
    scale = np.max(np.abs(ref))
    for form, jump in sols.items():
        assert np.max(np.abs(jump - ref)) <= 1e-4 * scale, form


def test_residual_in_other_formulations(solved_default):
    prob, sol = solved_default
    n_crack = prob.grid.neg_nodes.size
    jump_crack = sol.jump[:n_crack]
    for form in mode3.FORMULATIONS:
        assert mode3.residual_in_formulation(prob, jump_crack, form) < 1e-8


def test_linearity_in_amplitude():
    base = mode3.solve_mode3(make_problem(loading=sym_loading(F=1.0), n=80))
    scaled = mode3.solve_mode3(make_problem(loading=sym_loading(F=3.5), n=80))
    assert np.allclose(scaled.jump, 3.5 * base.jump, rtol=1e-10, atol=1e-12)


def test_superposition():
    a = mode3.solve_mode3(make_problem(loading=sym_loading(), n=80))
    b = mode3.solve_mode3(make_problem(loading=asym_loading(), n=80))
    combined = mat.Loading(terms=sym_loading().terms + asym_loading().terms)
    ab = mode3.solve_mode3(make_problem(loading=combined, n=80))
    assert np.allclose(ab.jump, a.jump + b.jump, rtol=1e-9, atol=1e-11)


def test_delta3_independence_for_symmetric_loading():
    prob = make_problem(mat2="C", loading=sym_loading(), n=80)
    sol = mode3.solve_mode3(prob)
    bumped = dataclasses.replace(prob.constants, delta3=prob.constants.delta3 + 0.1)
    sol2 = mode3.solve_mode3(
        mode3.Mode3Problem(
            constants=bumped, kappa=prob.kappa, loading=prob.loading,
            grid=prob.grid, formulation=prob.formulation,
        )
    )
    assert np.array_equal(sol.jump, sol2.jump)
    assert np.array_equal(sol.traction, sol2.traction)


def test_delta3_enters_for_asymmetric_loading():
    prob = make_problem(mat2="C", loading=asym_loading(), n=80)
    sol = mode3.solve_mode3(prob)
    bumped = dataclasses.replace(prob.constants, delta3=prob.constants.delta3 + 0.1)
    sol2 = mode3.solve_mode3(
        mode3.Mode3Problem(
            constants=bumped, kappa=prob.kappa, loading=prob.loading,
            grid=prob.grid, formulation=prob.formulation,
        )
    )
    assert not np.allclose(sol.jump, sol2.jump)


def test_kappa_monotonicity_pointwise():
    A = mat.material_preset("A")
    bc = mat.bimaterial_constants(A, mat.material_preset("B"))
    load = sym_loading()
    jumps = []
    for ks in (5.0, 10.0, 20.0):
        kappa = ks * A.out_of_plane_root()
        grid = mode3.default_grid(bc, kappa, load, n=100)
        sol = mode3.solve_mode3(
            mode3.Mode3Problem(constants=bc, kappa=kappa, loading=load, grid=grid)
        )
        sol = mode3.normalize(sol, F=1.0, l=1.0, mat_one=A)
        jumps.append(np.interp([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], sol.x1, sol.jump_star))
    assert np.all(np.asarray(jumps[1]) > np.asarray(jumps[0]))
    assert np.all(np.asarray(jumps[2]) > np.asarray(jumps[1]))


def test_tip_consistency_and_transmission(solved_default):
    prob, sol = solved_default
    assert sol.meta["tip_consistency"] <= 1e-2
    # interface rows satisfy jump = kappa * traction identically
    mask = sol.x1 > 0
    assert np.allclose(sol.jump[mask], prob.kappa * sol.traction[mask], rtol=1e-13)


def test_traction_far_field_decays(solved_default):
    prob, sol = solved_default
    mask = sol.x1 > 0
    t = np.abs(sol.traction[mask])
    x = sol.x1[mask]
    far = t[x > 20.0]
    assert far.max() < np.abs(t).max() / 10.0
    # decreasing in the far region
    assert np.all(np.diff(t[x > 20.0]) < 0)


def test_fixed_point_matches_direct():
    # compact truncation: the iteration's contraction rate falls off with
    # domain length, so the default iteration cap suits short grids
    from interfrac import operators as op

    A = mat.material_preset("A")
    bc = mat.bimaterial_constants(A, A)
    kappa = 5.0 * A.out_of_plane_root()
    load = sym_loading()
    half = 10.0 / (bc.h33 / kappa)
    grid = op.build_grid(half, half, 100, 100, 3.0)
    prob = mode3.Mode3Problem(constants=bc, kappa=kappa, loading=load, grid=grid)
    direct = mode3.solve_mode3(prob, method="direct")
    fp = mode3.solve_mode3(prob, method="fixed-point")
    scale = np.max(np.abs(direct.jump))
    assert np.max(np.abs(direct.jump - fp.jump)) < 1e-6 * scale
    assert fp.meta["iterations"] > 0
    with pytest.raises(ValidationError):
        mode3.solve_mode3(make_problem(formulation="s-only", n=80), method="fixed-point")
    with pytest.raises(ValidationError):
        mode3.solve_mode3(prob, method="magic")


def test_normalize():
    A = mat.material_preset("A")
    prob = make_problem(kappa_star=5.0, n=80)
    sol = mode3.solve_mode3(prob)
    nsol = mode3.normalize(sol, F=1.0, l=1.0, mat_one=A)
    assert nsol.meta["kappa_star"] == pytest.approx(5.0, rel=1e-13)
    assert A.out_of_plane_root() == pytest.approx(np.sqrt(1.5), rel=1e-15)
    # doubling F with the same geometry leaves the starred jump unchanged
    prob2 = make_problem(kappa_star=5.0, loading=sym_loading(F=2.0), n=80)
    nsol2 = mode3.normalize(mode3.solve_mode3(prob2), F=2.0, l=1.0, mat_one=A)
    assert np.allclose(nsol2.jump_star, nsol.jump_star, rtol=1e-10)
    # starred transmission: jump* = kappa* traction* on the interface
    mask = nsol.x1 > 0
    assert np.allclose(
        nsol.jump_star[mask],
        nsol.meta["kappa_star"] * nsol.traction_star[mask],
        rtol=1e-12,
    )
    with pytest.raises(ValidationError):
        mode3.normalize(sol, F=-1.0, l=1.0, mat_one=A)


def test_evaluate_traction_zero_jump_zero_loading():
    zero = mat.Loading(terms=(mat.LoadTerm(face="upper", c=(0.0,), l=1.0, n=0),))
    prob = make_problem(loading=zero, n=80)
    t = mode3.evaluate_traction(prob, np.zeros(prob.grid.neg_nodes.size))
    assert np.allclose(t, 0.0)
    with pytest.raises(ValidationError):
        mode3.evaluate_traction(prob, np.zeros(3))
