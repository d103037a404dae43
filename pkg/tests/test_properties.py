import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pintbdf.bdf import BdfTableau, delta_eval
from pintbdf.cq import cq_weights
from pintbdf.harness import ExperimentSpec
from pintbdf.paradiag import build_plan, causal_convolve, perturbed_matrix, pint_solve_once, upper_toeplitz_apply
from pintbdf.spatial import assemble
from pintbdf.stepper import TimeGrid

orders = st.integers(1, 6)
alphas = st.floats(0.05, 0.95)
fast = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@fast
@given(orders, alphas, st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_weights_are_taylor_coefficients(k, a, re, im):
    z = complex(re, im)
    w = cq_weights(k, a, 400).w
    assert abs(np.polyval(w[::-1], z) - delta_eval(k, z) ** a) <= 1e-11 * max(1, abs(delta_eval(k, z) ** a))


@fast
@given(orders, st.floats(0.05, 0.5), st.floats(0.05, 0.5))
def test_weights_semigroup(k, a, b):
    n = 60
    wa, wb, wab = cq_weights(k, a, n).w, cq_weights(k, b, n).w, cq_weights(k, a + b, n).w
    conv = np.convolve(wa, wb)[: n + 1]
    assert np.allclose(conv, wab, rtol=1e-10, atol=1e-12)


@fast
@given(st.integers(1, 40), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_toeplitz_helpers_match_dense(N, m, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(N + 1)
    U = rng.standard_normal((N, m))
    n, p = np.indices((N, N))
    lower = np.where(n >= p, w[np.minimum(n - p, N)], 0.0)
    upper = np.where(p > n, w[np.clip(N + n - p, 0, N)], 0.0)
    assert np.allclose(causal_convolve(w, U), lower @ U, atol=1e-12)
    assert np.allclose(upper_toeplitz_apply(w, U), upper @ U, atol=1e-12)


@fast
@given(st.integers(1, 3), st.sampled_from([1.0, 0.3, 0.7]), st.floats(0.05, 0.9), st.integers(4, 12),
       st.integers(0, 2**32 - 1))
def test_pint_solve_matches_dense(k, alpha, kappa, N, seed):
    if alpha == 1.0 and N < k:
        return
    disc = assemble(1, 1 / 6)
    grid = TimeGrid(0.5, N)
    weights = BdfTableau.of_order(k) if alpha == 1.0 else cq_weights(k, alpha, N)
    plan = build_plan(weights, disc, grid, kappa)
    F = np.random.default_rng(seed).standard_normal((N, disc.n_dof))
    B = perturbed_matrix(plan.weights, N, kappa)
    A = np.kron(B, disc.mass.toarray()) / plan.scale + np.kron(np.eye(N), disc.stiffness.toarray())
    ref = np.linalg.solve(A, F.reshape(-1)).reshape(F.shape)
    assert np.linalg.norm(pint_solve_once(plan, F) - ref) <= 1e-9 * np.linalg.norm(ref)


@fast
@given(st.sampled_from([1, 2, 3, 4]), st.integers(1, 6), st.integers(2, 500), st.floats(0.01, 0.99),
       st.sampled_from(["fixed", "log"]), st.floats(1e-16, 1e-6), st.sampled_from(["1", "2", "auto"]))
def test_config_round_trip(example, k, N, kappa, rule, tol, threads):
    alpha = {1: 1.0, 2: 0.5, 3: 0.3, 4: 0.25}[example]
    if example == 4 and k > 3:
        k = 3
    spec = ExperimentSpec.preset(example, k=k, N=N, kappa=kappa, kappa_rule=rule, tol=tol, threads=threads,
                                 alpha=alpha)
    text = spec.to_config()
    assert ExperimentSpec.from_config(text).to_config() == text
