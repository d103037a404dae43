import math

import numpy as np
import pytest

from pintbdf.bdf import BdfTableau
from pintbdf.paradiag import build_plan
from pintbdf.presets import example1, example2
from pintbdf.spatial import assemble, nodal
from pintbdf.stepper import ProblemData, TimeGrid, corrected_rhs_all, solve_sequential
from pintbdf.waveform import (ConvergenceReport, DivergenceError, PintConfig, choose_kappa, estimate_gamma, iterate,
                              roundoff_floor, run_waveform)


def _run(builder, k, kappa, N=100, h=1 / 200, **cfg):
    s = builder(k, N=N, h=h)
    ref = solve_sequential(k, s.disc, s.data, s.grid)
    U, rep = run_waveform(k, s.disc, s.data, s.grid, PintConfig(kappa=kappa, **cfg), reference=ref)
    return s, ref, U, rep


@pytest.mark.parametrize("builder,kappa", [(example1, 0.5), (example2, 0.1)])
@pytest.mark.parametrize("k", [1, 3])
def test_converges_to_sequential(builder, k, kappa):
    s, ref, U, rep = _run(builder, k, kappa, max_iters=30, initial_guess="zero")
    assert rep.converged
    assert np.abs(U.U - ref.U).max() <= 1e-9 * np.abs(ref.U).max()
    pre = rep.errors[: 4]
    assert all(b < a for a, b in zip(pre, pre[1:]))


def test_zero_guess_reproduces_heat_table_column():
    _, _, _, rep = _run(example1, 1, 0.5, h=1e-3, max_iters=3, initial_guess="zero", stop_on_tol=False)
    assert np.allclose(rep.errors[1:4], [4.88e-4, 1.98e-6, 8.05e-9], rtol=0.02)


def test_gamma_scales_with_kappa():
    gammas = [_run(example1, 2, kap, max_iters=12, initial_guess="zero")[3].gamma_est for kap in (0.5, 0.1, 0.02)]
    assert gammas[0] > gammas[1] > gammas[2]
    # bounded by kappa / (1 - kappa)
    assert all(g < kap / (1 - kap) for g, kap in zip(gammas, (0.5, 0.1, 0.02)))


def test_initial_guess_v_also_converges():
    _, ref, U, rep = _run(example2, 2, 0.1, max_iters=30)
    assert rep.converged and np.abs(U.U - ref.U).max() <= 1e-8 * np.abs(ref.U).max()


def test_threads_do_not_change_bits():
    outs = [_run(example2, 3, 0.1, N=40, max_iters=4, threads=t)[2].U for t in (1, 2, 8)]
    assert np.array_equal(outs[0], outs[1]) and np.array_equal(outs[0], outs[2])


def test_full_spectrum_path_agrees():
    a = _run(example1, 3, 0.5, N=40, max_iters=4, stop_on_tol=False)[2].U
    b = _run(example1, 3, 0.5, N=40, max_iters=4, stop_on_tol=False, half=False)[2].U
    assert np.abs(a - b).max() <= 1e-12 * np.abs(a).max()


def test_divergence_detected_for_growing_problem():
    d = assemble(1, 1 / 50)
    grid = TimeGrid(1.0, 50)
    v = nodal(d, lambda x: np.sin(np.pi * x[:, 0]))
    K = -5.0 * d.mass  # u' = 5 u: solution grows like e^5
    data = ProblemData(1.0, v, lambda t: 0 * v, [0 * v], K @ v)
    tab = BdfTableau.of_order(2)
    plan = build_plan(tab, d, grid, 0.5, stiffness=K)
    with pytest.raises(DivergenceError, match="reduce kappa") as exc:
        iterate(plan, corrected_rhs_all(tab, data, grid), v, PintConfig(kappa=0.5, max_iters=30))
    assert exc.value.report.iters >= 4


def test_gamma_and_floor_estimators():
    errs = [1e-1, 4.4e-4, 1.6e-6, 5.8e-9, 2.0e-11, 1.1e-12, 1.2e-12, 1.0e-12]
    g = estimate_gamma(errs)
    assert 3e-3 < g < 5e-3
    assert roundoff_floor(errs) == pytest.approx(1.1e-12)
    # published heat column, k=1: the 5th ratio (0.169) already belongs to the floor
    assert estimate_gamma([1.20e-01, 4.88e-04, 1.98e-06, 8.05e-09, 2.81e-11, 4.76e-12]) == pytest.approx(3.9e-3,
                                                                                                       rel=0.1)
    with pytest.raises(ValueError):
        estimate_gamma([1.0, 0.9, 0.95])
    assert math.isnan(ConvergenceReport(errors=[1.0, 0.9]).gamma_est)


def test_kappa_rules():
    assert choose_kappa(100, rule="log") == pytest.approx(1 / math.log(100))
    assert choose_kappa(4, rule="log") == 0.5
    assert PintConfig(kappa=None, kappa_rule="log").kappa_for(1000, 0.5) == pytest.approx(1 / math.log(1000))
    with pytest.raises(ValueError):
        PintConfig(kappa=1.2)
    with pytest.raises(ValueError):
        PintConfig(kappa_rule="sqrt")
