"""Semilinear problems: modified CQ-BDFk, modified Newton with a time-averaged
Jacobian, and waveform relaxation on each Newton correction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bdf import BdfTableau
from .cq import cq_weights
from .paradiag import build_plan, causal_convolve, time_weights
from .stepper import ProblemData, SpaceTimeState, TimeGrid, corrected_rhs_all
from .waveform import DivergenceError, PintConfig, iterate


class NewtonDivergenceError(RuntimeError):
    pass


@dataclass
class NonlinearProblem:
    """``d_t^alpha u + A u + g(u) = f``; g acts nodally on coefficient vectors."""
    disc: object
    data: ProblemData
    grid: TimeGrid
    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    eps_w: float | None = None

    def g_load(self, U):
        """Mass-weighted nodal interpolant of g(U); rows of U are levels."""
        G = self.g(U)
        return np.asarray((self.disc.mass @ np.atleast_2d(G).T).T).reshape(np.shape(U))

    def corrected_data(self) -> ProblemData:
        """Copy of the data whose start defect includes ``-g(v)``."""
        d = self.data
        defect = d.source_derivs[0] - d.Av - self.disc.mass @ self.g(d.v)
        return ProblemData(d.alpha, d.v, d.source, d.source_derivs, d.Av, start_defect=defect, name=d.name)


def allen_cahn(disc, data, grid, eps_w: float = 1.0) -> NonlinearProblem:
    e2 = eps_w**2
    return NonlinearProblem(
        disc, data, grid,
        g=lambda u: (u**3 - u) / e2,
        g_prime=lambda u: (3 * u**2 - 1) / e2,
        eps_w=eps_w,
    )


def linear_problem(disc, data, grid) -> NonlinearProblem:
    return NonlinearProblem(disc, data, grid, g=np.zeros_like, g_prime=np.zeros_like)


def _weights(k, alpha, N):
    tab = BdfTableau.of_order(k)
    src = tab if alpha == 1.0 else cq_weights(k, alpha, N)
    w, _, _ = time_weights(src, N)
    return tab, src, w


def solve_semilinear_reference(problem: NonlinearProblem, k: int, tol: float = 1e-13,
                               max_newton: int = 30) -> SpaceTimeState:
    """Sequential modified CQ-BDFk; each level solved by Newton's method."""
    disc, grid = problem.disc, problem.grid
    data = problem.corrected_data()
    tab, _, w = _weights(k, data.alpha, grid.N)
    fbar = corrected_rhs_all(tab, data, grid)
    M, K = disc.mass, disc.stiffness
    s = grid.tau**data.alpha
    base = ((w[0] / s) * M + K).tocsr()
    N = grid.N
    U = np.empty((N, disc.n_dof))
    S = np.cumsum(w)
    v = data.v
    window = k if data.alpha == 1.0 else None
    for n in range(1, N + 1):
        jmax = n - 1 if window is None else min(n - 1, window)
        hist = w[1 : jmax + 1] @ U[n - 2 :: -1][:jmax] if jmax > 0 else 0.0
        rhs = fbar[n - 1] - (M @ (hist - S[n - 1] * v)) / s
        x = (U[n - 2] if n > 1 else v).copy()
        scale = max(1.0, float(np.max(np.abs(rhs))))
        for _ in range(max_newton):
            res = base @ x + M @ problem.g(x) - rhs
            if np.max(np.abs(res)) <= tol * scale:
                break
            J = base + M @ sp.diags(problem.g_prime(x))
            x -= spla.spsolve(J.tocsc(), res)
        else:
            raise NewtonDivergenceError(f"Newton did not converge at time level n={n}")
        U[n - 1] = x
    return SpaceTimeState(U, v.copy())


@dataclass
class NewtonState:
    U_l: np.ndarray
    U_bar: np.ndarray
    inner_counts: list = field(default_factory=list)
    outer_errors: list = field(default_factory=list)
    corrections: list = field(default_factory=list)
    plans_built: int = 0


def discrete_caputo_all(w, alpha, tau, U, v):
    """(1/tau^a)(sum_{j<n} w_j U^{n-j} - S_{n-1} v) for every level n = 1..N."""
    N = U.shape[0]
    S = np.cumsum(w[:N])
    return (causal_convolve(w, U) - np.outer(S, v)) / tau**alpha


def newton_pint_solve(problem: NonlinearProblem, k: int, kappa: float, L: int = 10,
                      outer_tol: float = 1e-12, inner_tol: float = 1e-12, inner_max: int = 50,
                      reference=None, threads: int = 1):
    """Modified Newton outer loop with parallel-in-time inner solves.

    Returns the final iterate and a :class:`NewtonState` whose
    ``outer_errors[l]`` is ``||U_l^N - U_ref^N||_M`` (l = 0 included) when a
    reference is supplied.
    """
    disc, grid = problem.disc, problem.grid
    data = problem.corrected_data()
    tab, src, w = _weights(k, data.alpha, grid.N)
    fbar = corrected_rhs_all(tab, data, grid)
    M, K = disc.mass, disc.stiffness
    N = grid.N
    v = data.v
    U = np.tile(v, (N, 1))
    state = NewtonState(U, U.mean(axis=0))
    ref = None
    if reference is not None:
        ref = reference.final if isinstance(reference, SpaceTimeState) else np.asarray(reference)

    def err(X):
        d = X[-1] - ref
        return float(np.sqrt(abs(d @ (M @ d))))

    if ref is not None:
        state.outer_errors.append(err(U))
    cfg = PintConfig(kappa=kappa, max_iters=inner_max, tol=inner_tol, threads=threads, initial_guess="zero")
    zero = np.zeros(disc.n_dof)
    for ell in range(1, L + 1):
        U_bar = U.mean(axis=0)
        K_shift = (K + M @ sp.diags(problem.g_prime(U_bar))).tocsr()
        try:
            plan = build_plan(src, disc, grid, kappa, threads=threads, stiffness=K_shift)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergenceError(
                f"linearized operator is singular at outer step {ell}; the nonlinearity is too strong "
                f"for the time-averaged Jacobian: {exc}"
            ) from exc
        state.plans_built += 1
        resid = (fbar - np.asarray((M @ discrete_caputo_all(w, data.alpha, grid.tau, U, v).T).T)
                 - np.asarray((K @ U.T).T) - problem.g_load(U))
        try:
            Wst, rep = iterate(plan, resid, zero, cfg, U0=np.zeros_like(U))
        except DivergenceError as exc:
            raise NewtonDivergenceError(f"inner waveform relaxation diverged at outer step {ell}") from exc
        W = Wst.U
        U = U + W
        wmax = float(np.max(np.abs(W)))
        state.U_l, state.U_bar = U, U_bar
        state.inner_counts.append(rep.iters)
        state.corrections.append(wmax)
        if ref is not None:
            state.outer_errors.append(err(U))
        if not np.isfinite(wmax) or (len(state.corrections) >= 3 and
                                     state.corrections[-1] > state.corrections[-2] > state.corrections[-3]):
            raise NewtonDivergenceError(f"modified Newton iteration diverges at outer step {ell}")
        if wmax < outer_tol:
            break
    return SpaceTimeState(U, v.copy()), state
