"""Sequential BDFk / CQ-BDFk time stepping with corrected starting steps.

This is the serial baseline: its trajectory is the fixed point of the
parallel-in-time iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .bdf import BdfTableau
from .cq import FractionalWeights, cq_weights
from .spatial import SpatialDiscretization


@dataclass(frozen=True)
class TimeGrid:
    T: float
    N: int

    def __post_init__(self):
        if self.N < 1 or self.T <= 0:
            raise ValueError(f"need T > 0 and N >= 1, got T={self.T}, N={self.N}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.tau


@dataclass
class ProblemData:
    """Initial data and source for ``d_t^alpha u + A u = f``.

    ``source(t)`` returns the load vector of f(., t). ``source_derivs[l]`` is the
    load vector of the l-th time derivative of f at t = 0 (entry 0 is f(0)).
    ``start_defect`` replaces the default ``f(0) - A v`` in the a_n corrections.
    """
    alpha: float
    v: np.ndarray
    source: Callable[[float], np.ndarray]
    source_derivs: Sequence[np.ndarray]
    Av: np.ndarray
    start_defect: np.ndarray | None = None
    name: str = field(default="", compare=False)

    @classmethod
    def build(cls, disc: SpatialDiscretization, alpha, v, source=None, source_derivs=None, **kw):
        v = np.asarray(v, dtype=float)
        if v.shape != (disc.n_dof,):
            raise ValueError(f"initial vector has shape {v.shape}, expected ({disc.n_dof},)")
        zero = np.zeros(disc.n_dof)
        if source is None:
            source = lambda t: zero  # noqa: E731
        if source_derivs is None:
            source_derivs = [source(0.0)]
        return cls(float(alpha), v, source, list(source_derivs), disc.stiffness @ v, **kw)

    @property
    def defect(self) -> np.ndarray:
        if self.start_defect is not None:
            return self.start_defect
        return self.source_derivs[0] - self.Av

    def check_order(self, k: int) -> None:
        if k >= 3 and len(self.source_derivs) < k - 1:
            raise ValueError(
                f"BDF{k} starting corrections need d^l f/dt^l(0) for l=0..{k - 2}; "
                f"got {len(self.source_derivs)} derivative(s)"
            )


@dataclass
class SpaceTimeState:
    """Row n-1 of ``U`` holds U^n; levels at or before 0 equal ``v``."""
    U: np.ndarray
    v: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.U[-1]


def corrected_rhs(tableau: BdfTableau, data: ProblemData, grid: TimeGrid, n: int) -> np.ndarray:
    """Load at level n including the a_n / b_{l,n} starting corrections."""
    if not 1 <= n <= grid.N:
        raise ValueError(f"level n={n} outside 1..{grid.N}")
    out = np.array(data.source(n * grid.tau), dtype=float)
    if n >= tableau.k:
        return out
    data.check_order(tableau.k)
    out += tableau.a(n) * data.defect
    for ell in range(1, tableau.k - 1):
        c = tableau.b(ell, n)
        if c:
            out += c * grid.tau**ell * data.source_derivs[ell]
    return out


def corrected_rhs_all(tableau: BdfTableau, data: ProblemData, grid: TimeGrid) -> np.ndarray:
    data.check_order(tableau.k)
    return np.stack([corrected_rhs(tableau, data, grid, n) for n in range(1, grid.N + 1)])


def _march(disc, data, grid, w, alpha, fbar, window=None, stiffness=None):
    K = disc.stiffness if stiffness is None else stiffness
    M = disc.mass
    s = grid.tau**alpha
    system = (w[0] / s) * M + K
    try:
        lu = spla.splu(system.tocsc())
    except RuntimeError as exc:  # pragma: no cover - SPD systems are never singular
        raise np.linalg.LinAlgError(f"time-step matrix is singular: {exc}") from exc
    N = grid.N
    U = np.empty((N, disc.n_dof))
    S = np.cumsum(w[: N + 1])
    v = data.v
    for n in range(1, N + 1):
        # sum_{j=1}^{n-1} w_j U^{n-j}, truncated to j <= window for BDF
        jmax = n - 1 if window is None else min(n - 1, window)
        hist = w[1 : jmax + 1] @ U[n - 2 :: -1][:jmax] if jmax > 0 else 0.0
        rhs = fbar[n - 1] - (M @ (hist - S[n - 1] * v)) / s
        U[n - 1] = lu.solve(rhs)
    return SpaceTimeState(U, v.copy())


def solve_heat(tableau: BdfTableau, disc: SpatialDiscretization, data: ProblemData,
               grid: TimeGrid, stiffness=None) -> SpaceTimeState:
    """Corrected BDFk for ``u' + A u = f`` with ``U^{-j} = v``."""
    if data.alpha != 1.0:
        raise ValueError("solve_heat requires alpha = 1")
    if grid.N < tableau.k:
        raise ValueError(f"need N >= k, got N={grid.N}, k={tableau.k}")
    w = np.zeros(grid.N + 1)
    m = min(tableau.k, grid.N) + 1
    w[:m] = tableau.omega[:m]
    fbar = corrected_rhs_all(tableau, data, grid)
    return _march(disc, data, grid, w, 1.0, fbar, window=tableau.k, stiffness=stiffness)


def solve_subdiffusion(tableau: BdfTableau, weights: FractionalWeights, disc: SpatialDiscretization,
                       data: ProblemData, grid: TimeGrid, stiffness=None) -> SpaceTimeState:
    """Corrected CQ-BDFk with the full O(M N^2) history sum."""
    if weights.n_max < grid.N:
        raise ValueError(f"need at least N+1={grid.N + 1} weights, have {len(weights.w)}")
    if weights.k != tableau.k or weights.alpha != data.alpha:
        raise ValueError("weights do not match the tableau order / problem alpha")
    fbar = corrected_rhs_all(tableau, data, grid)
    return _march(disc, data, grid, weights.w, data.alpha, fbar, stiffness=stiffness)


def solve_sequential(k: int, disc: SpatialDiscretization, data: ProblemData, grid: TimeGrid) -> SpaceTimeState:
    tab = BdfTableau.of_order(k)
    if data.alpha == 1.0:
        return solve_heat(tab, disc, data, grid)
    return solve_subdiffusion(tab, cq_weights(k, data.alpha, grid.N), disc, data, grid)


def observed_order(err_coarse: float, err_fine: float) -> float:
    """log2 of the error ratio between step sizes tau and tau/2."""
    if err_coarse <= 0 or err_fine <= 0:
        raise ValueError("errors must be positive; an exactly resolved run has no observable order")
    return float(np.log2(err_coarse / err_fine))
