import numpy as np
import pytest
import scipy.sparse.linalg as spla

from fecert.fem import assemble_load, assemble_residual, laplacian_stiffness
from fecert.mesh import gen_structured
from fecert.problem import SourceField
from fecert.solver import ConvergenceError, SolveOptions, solve_picard
from helpers import jittered, smooth_field, spec_from

TANH = {"family": "tanh", "a": 2.0, "b": 1.0, "c": 1.0}
B = {"k_alpha": 1.0, "k_beta": 3.0, "K_eta": 1.0, "G_eta": 2.0}


def test_linear_problem_one_step():
    m = gen_structured("three_direction", 6)
    spec = spec_from({"family": "constant", "a": 1.0}, {"family": "zero"}, B, f=1.0)
    res = solve_picard(m, spec)
    assert res.iterations <= 2
    K = laplacian_stiffness(m).tocsc()
    W = spla.spsolve(K, assemble_load(m, spec.f))
    np.testing.assert_allclose(res.u[m.interior_vertices], W, atol=1e-13)
    assert np.all(res.u[m.boundary_mask] == 0)


def test_tanh_problem_converges():
    m = gen_structured("three_direction", 8)
    spec = spec_from(TANH, {"family": "zero"}, B, f=1.0)
    res = solve_picard(m, spec)
    assert res.converged
    assert res.residual_norm <= 1e-9
    assert np.all(res.u[m.interior_vertices] > 0)
    r = assemble_residual(m, spec, res.u)
    assert np.max(np.abs(r)) == pytest.approx(res.residual_norm)


def test_manufactured_solution_recovered():
    """Pick u*, shift the load by -R(u*) so u* is the exact discrete solution."""
    m = jittered(6, 0.2, np.random.default_rng(0))
    spec = spec_from(TANH, {"family": "arctan", "a": 0.2, "b": 1.0, "c": 1.0}, B,
                     f={"family": "poly", "c0": 0.5, "cx": 1.0})
    u_star = smooth_field(m, np.random.default_rng(1), 0.8)
    shift = assemble_residual(m, spec, u_star)
    res = solve_picard(m, spec, rhs_shift=shift, opts=SolveOptions(tol=1e-12))
    np.testing.assert_allclose(res.u, u_star, atol=1e-10)
    assert res.residual_norm <= 1e-10


def test_distinct_initial_guesses_agree():
    m = gen_structured("three_direction", 8)
    spec = spec_from(TANH, {"family": "cubic", "a": 0.5}, B, f=2.0)
    a = solve_picard(m, spec)
    guess = np.where(m.boundary_mask, 0.0, -1.0)
    b = solve_picard(m, spec, opts=SolveOptions(initial_guess=guess))
    assert np.max(np.abs(a.u - b.u)) <= 1e-8


def test_non_convergence_carries_trace():
    m = gen_structured("three_direction", 6)
    spec = spec_from(TANH, {"family": "zero"}, B, f=SourceField.from_config(50.0))
    with pytest.raises(ConvergenceError) as err:
        solve_picard(m, spec, opts=SolveOptions(max_iters=2, tol=1e-14))
    trace = err.value.trace
    assert not trace.converged and len(trace.increments) == 2


def test_options_validated():
    with pytest.raises(ValueError):
        SolveOptions(tol=0)
    with pytest.raises(ValueError):
        SolveOptions(max_iters=0)


def test_deterministic():
    m = jittered(5, 0.2, np.random.default_rng(2))
    spec = spec_from(TANH, {"family": "linear", "a": 1.0}, B, f=1.0)
    a, b = solve_picard(m, spec), solve_picard(m, spec)
    assert np.array_equal(a.u, b.u) and a.increments == b.increments


def test_sparse_path_matches_dense():
    m = gen_structured("three_direction", 7)
    spec = spec_from(TANH, {"family": "zero"}, B, f=1.0)
    a = solve_picard(m, spec)
    b = solve_picard(m, spec, opts=SolveOptions(dense_limit=0))
    np.testing.assert_allclose(a.u, b.u, atol=1e-13)
