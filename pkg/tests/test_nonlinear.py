import numpy as np
import pytest

from pintbdf.nonlinear import (NewtonDivergenceError, allen_cahn, linear_problem, newton_pint_solve,
                               solve_semilinear_reference)
from pintbdf.presets import example2, example4
from pintbdf.spatial import assemble, nodal
from pintbdf.stepper import ProblemData, TimeGrid, observed_order, solve_sequential


@pytest.fixture(scope="module")
def ac_small():
    s = example4(1, h=1 / 200, alpha=0.25)
    p = allen_cahn(s.disc, s.data, s.grid, 1.0)
    return s, p, solve_semilinear_reference(p, 1)


def test_zero_nonlinearity_reduces_to_linear_solve():
    s = example2(2, N=30, h=1 / 100)
    p = linear_problem(s.disc, s.data, s.grid)
    lin = solve_sequential(2, s.disc, s.data, s.grid)
    assert np.allclose(solve_semilinear_reference(p, 2).U, lin.U, rtol=1e-12, atol=1e-12)
    U, st = newton_pint_solve(p, 2, 0.1, L=3)
    assert np.abs(U.U - lin.U).max() <= 1e-9 * np.abs(lin.U).max()
    # after one outer step only roundoff corrections remain
    assert st.corrections[1] <= 1e-9 * st.corrections[0]


def test_outer_errors_decay_linearly_with_small_rate(ac_small):
    s, p, ref = ac_small
    _, st = newton_pint_solve(p, 1, 0.1, L=3, reference=ref)
    e = st.outer_errors
    assert all(b / a < 1e-3 for a, b in zip(e[:3], e[1:3]))
    assert st.inner_counts == sorted(st.inner_counts, reverse=True)
    assert max(st.inner_counts) <= 6


def test_one_plan_per_outer_step(ac_small):
    _, p, _ = ac_small
    _, st = newton_pint_solve(p, 1, 0.1, L=4)
    assert st.plans_built == len(st.corrections)


def test_threads_do_not_change_bits(ac_small):
    _, p, _ = ac_small
    a = newton_pint_solve(p, 1, 0.1, L=2, threads=1)[0].U
    b = newton_pint_solve(p, 1, 0.1, L=2, threads=4)[0].U
    assert np.array_equal(a, b)


def test_reference_first_order_in_time():
    errs = []
    for N in (25, 50):
        s = example4(1, N=N, alpha=0.75, h=1e-3)
        ref = solve_semilinear_reference(allen_cahn(s.disc, s.data, s.grid, 1.0), 1)
        errs.append(s.disc.mass_norm(ref.final - s.exact(s.disc.node_coords, 0.4)))
    assert abs(observed_order(*errs) - 1.0) <= 0.2


def test_classical_allen_cahn_route():
    s = example4(2, alpha=1.0, h=1 / 200)
    p = allen_cahn(s.disc, s.data, s.grid, 1.0)
    ref = solve_semilinear_reference(p, 2)
    U, st = newton_pint_solve(p, 2, 0.1, L=6, reference=ref)
    assert st.outer_errors[-1] < 1e-11
    assert s.disc.mass_norm(ref.final - s.exact(s.disc.node_coords, 0.4)) < 1e-4


def test_strong_nonlinearity_reported():
    d = assemble(1, 1 / 50)
    v = 1.5 * nodal(d, lambda x: np.sin(np.pi * x[:, 0]) * np.cos(3 * np.pi * x[:, 0]))
    p = allen_cahn(d, ProblemData.build(d, 1.0, v), TimeGrid(0.4, 50), eps_w=0.05)
    with pytest.raises(NewtonDivergenceError, match="diverg"):
        newton_pint_solve(p, 1, 0.1, L=20)


def test_g_load_is_mass_weighted_nodal():
    s = example4(1, h=1 / 50)
    p = allen_cahn(s.disc, s.data, s.grid, 0.5)
    u = np.linspace(-1, 1, s.disc.n_dof)
    assert np.allclose(p.g_load(u), s.disc.mass @ ((u**3 - u) / 0.25))
