"""All-at-once kappa-perturbed BDF/CQ system and its diagonalization solve.

Conventions
-----------
The perturbed time matrix is ``B = Lam C Lam^{-1}`` with
``Lam = diag(kappa^{-n/N})`` (n = 0..N-1) and ``C`` circulant with first
column ``c_j = w_j kappa^{j/N}``. With ``fft`` the unnormalized forward DFT
(``x_hat[n] = sum_j x[j] exp(-2 pi i j n / N)``), ``C = ifft o diag(fft(c)) o fft``.

One solve of ``(1/s)(B (x) M) U + (I (x) K) U = F`` with ``s = tau^alpha``:

1. ``H = fft(Lam^{-1} F)`` along time,
2. ``(d_n M + s K) q_n = s h_n`` for every frequency n,
3. ``U = Lam ifft(Q)``.

``F`` holds Galerkin load vectors, so no extra mass factor enters step 2.
For real data only the first ``N//2 + 1`` frequencies are solved (rfft).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bdf import BdfTableau, delta_eval
from .cq import FractionalWeights
from .kernels import TridiagonalBatch

# A(theta_k)-stability angles of BDF1..BDF6 in degrees
STABILITY_ANGLES = (90.0, 90.0, 86.03, 73.35, 51.84, 17.84)

stats = {"plans_built": 0}


class ImaginaryResidueError(RuntimeError):
    pass


def _tridiagonal_parts(A: sp.spmatrix):
    A = sp.dia_matrix(A)
    if np.any(np.abs(A.offsets) > 1):
        return None
    A = A.tocsr()
    return A.diagonal(-1), A.diagonal(0), A.diagonal(1)


class ShiftedSystems:
    """Factorizations of ``d_n M + s K`` for a vector of complex shifts ``d``."""

    def __init__(self, mass, stiffness, shifts, scale, threads=1, backend=None):
        self.shifts = np.asarray(shifts, dtype=complex)
        self.scale = float(scale)
        self.threads = max(1, int(threads))
        self.n = mass.shape[0]
        mp = _tridiagonal_parts(mass)
        kp = _tridiagonal_parts(stiffness)
        if mp is not None and kp is not None:
            d = self.shifts[:, None]
            lower = d * mp[0][None, :] + scale * kp[0][None, :]
            diag = d * mp[1][None, :] + scale * kp[1][None, :]
            upper = d * mp[2][None, :] + scale * kp[2][None, :]
            try:
                self._tri = TridiagonalBatch(lower, diag, upper, threads=self.threads, backend=backend)
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError(f"shifted system singular: {exc}") from exc
            self._lus = None
        else:
            self._tri = None
            M = sp.csc_matrix(mass, dtype=complex)
            K = sp.csc_matrix(stiffness, dtype=complex)
            self._lus = []
            for i, dn in enumerate(self.shifts):
                try:
                    self._lus.append(spla.splu((dn * M + scale * K).tocsc()))
                except RuntimeError as exc:
                    raise np.linalg.LinAlgError(f"shifted system {i} (d={dn:.3g}) is singular: {exc}") from exc

    @property
    def kind(self) -> str:
        return "tridiagonal" if self._tri is not None else "sparse-lu"

    def __len__(self):
        return len(self.shifts)

    def solve(self, rhs: np.ndarray, order=None) -> np.ndarray:
        """Solve system n against ``rhs[n]``; ``order`` forces a serial visiting order."""
        if self._tri is not None:
            return self._tri.solve(rhs, order=order)
        out = np.empty_like(rhs, dtype=complex)

        def work(idx):
            for i in idx:
                out[i] = self._lus[i].solve(rhs[i])

        if order is not None:
            work(order)
        elif self.threads == 1:
            work(range(len(self._lus)))
        else:
            parts = np.array_split(np.arange(len(self._lus)), self.threads)
            with ThreadPoolExecutor(self.threads) as pool:
                list(pool.map(work, parts))
        return out


def time_weights(weights, N: int) -> tuple[np.ndarray, float, int | None]:
    """Padded weights w_0..w_N, alpha, and the stencil width (None if nonlocal)."""
    w = np.zeros(N + 1)
    if isinstance(weights, BdfTableau):
        m = min(weights.k, N) + 1
        w[:m] = weights.omega[:m]
        return w, 1.0, weights.k
    if isinstance(weights, FractionalWeights):
        if weights.n_max < N:
            raise ValueError(f"need at least N+1={N + 1} weights, have {len(weights.w)}")
        w[:] = weights.w[: N + 1]
        return w, weights.alpha, (weights.k if weights.alpha == 1.0 else None)
    raise TypeError("weights must be a BdfTableau or FractionalWeights")


def perturbed_matrix(w: np.ndarray, N: int, kappa: float) -> np.ndarray:
    """Dense B(kappa): lower Toeplitz part w_{n-p}, wrap-around part kappa w_{N+n-p}."""
    w = np.asarray(w, dtype=float)
    full = np.zeros(2 * N)
    full[: min(len(w), 2 * N)] = w[: 2 * N]
    n, p = np.indices((N, N))
    return np.where(n >= p, full[np.abs(n - p)], kappa * full[(N + n - p) % (2 * N)])


@dataclass(eq=False)
class PintPlan:
    kappa: float
    N: int
    tau: float
    alpha: float
    weights: np.ndarray
    window: int | None
    lambda_scale: np.ndarray
    first_col: np.ndarray
    eigenvalues: np.ndarray
    solver: ShiftedSystems
    mass: sp.csr_matrix
    threads: int = 1
    half: bool = True
    partial_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.partial_sums = np.cumsum(self.weights)

    @property
    def scale(self) -> float:
        return self.tau**self.alpha


def build_plan(weights, disc, grid, kappa: float, threads: int = 1, half: bool = True,
               stiffness=None, backend=None) -> PintPlan:
    """Eigenvalues and factored shifted systems for one kappa.

    ``weights`` is a :class:`BdfTableau` (heat) or :class:`FractionalWeights`.
    ``stiffness`` overrides the discretization's stiffness matrix (used for the
    linearized nonlinear problem).
    """
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    N = grid.N
    w, alpha, window = time_weights(weights, N)
    if window is not None and N < window:
        raise ValueError(f"need N >= k, got N={N}, k={window}")
    j = np.arange(N)
    down = kappa ** (j / N)
    first_col = w[:N] * down
    eig = np.fft.fft(first_col)
    shifts = eig[: N // 2 + 1] if half else eig
    K = disc.stiffness if stiffness is None else stiffness
    solver = ShiftedSystems(disc.mass, K, shifts, grid.tau**alpha, threads=threads, backend=backend)
    stats["plans_built"] += 1
    return PintPlan(kappa, N, grid.tau, alpha, w, window, 1.0 / down, first_col, eig, solver,
                    disc.mass, threads=max(1, int(threads)), half=half)


def heat_eigenvalues(k: int, N: int, kappa: float) -> np.ndarray:
    """delta_k(kappa^{1/N} e^{-2 pi i n / N}), n = 0..N-1."""
    n = np.arange(N)
    return delta_eval(k, kappa ** (1.0 / N) * np.exp(-2j * np.pi * n / N))


# ------------------------------------------------------------------ RHS

def upper_toeplitz_apply(w: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Rows ``Y[n-1] = sum_{j=n}^{N-1} w_j U^{N+n-j}`` for n = 1..N via a 2N circulant.

    ``U`` has one time level per row. The strictly upper-triangular Toeplitz
    matrix is the top-right block of a 2N circulant whose first column is
    ``(0, w_1, ..., w_{N-1}, 0, ..., 0)``; applying it to ``(0, U)`` and keeping
    the first N rows gives ``Y``.
    """
    U = np.asarray(U, dtype=float)
    N = U.shape[0]
    c = np.zeros(2 * N)
    c[1:N] = w[1:N]
    x = np.zeros((2 * N,) + U.shape[1:])
    x[N:] = U
    c_hat = sfft.rfft(c)
    x_hat = sfft.rfft(x, axis=0)
    shape = (-1,) + (1,) * (U.ndim - 1)
    return sfft.irfft(c_hat.reshape(shape) * x_hat, n=2 * N, axis=0)[:N]


def causal_convolve(w: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Rows ``Y[n-1] = sum_{j=0}^{n-1} w_j U^{n-j}`` for n = 1..N (zero-padded FFT)."""
    U = np.asarray(U, dtype=float)
    N = U.shape[0]
    L = sfft.next_fast_len(2 * N)
    c_hat = sfft.rfft(np.asarray(w[:N], dtype=float), n=L)
    x_hat = sfft.rfft(U, n=L, axis=0)
    shape = (-1,) + (1,) * (U.ndim - 1)
    return sfft.irfft(c_hat.reshape(shape) * x_hat, n=L, axis=0)[:N]


def _rows_times_mass(mass, Y):
    return np.asarray((mass @ Y.T).T)


def assemble_rhs_heat(plan: PintPlan, U_prev: np.ndarray, v: np.ndarray, fbar: np.ndarray) -> np.ndarray:
    """F_n = fbar_n + (kappa/tau) M sum_{j=n}^{k} w_j U_prev^{N+n-j} + (1/tau) S_{n-1} M v."""
    N, k = plan.N, plan.window
    if U_prev.shape != fbar.shape or U_prev.shape[0] != N:
        raise ValueError(f"shape mismatch: U_prev {U_prev.shape}, fbar {fbar.shape}, N={N}")
    s = plan.scale
    Y = np.zeros_like(fbar)
    for n in range(1, min(k, N) + 1):
        for j in range(n, k + 1):
            if j < N:
                Y[n - 1] += plan.weights[j] * U_prev[N + n - j - 1]
    F = fbar + (plan.kappa / s) * _rows_times_mass(plan.mass, Y)
    Mv = plan.mass @ v
    S = plan.partial_sums[:N]
    nz = np.nonzero(np.abs(S) > 0)[0]
    F[nz] += np.outer(S[nz] / s, Mv)
    return F


def assemble_rhs_subdiffusion(plan: PintPlan, U_prev: np.ndarray, v: np.ndarray, fbar: np.ndarray) -> np.ndarray:
    """F_n = fbar_n + (kappa/tau^a) M sum_{j=n}^{N-1} w_j U_prev^{N+n-j} + (1/tau^a) S_{n-1} M v."""
    N = plan.N
    if U_prev.shape != fbar.shape or U_prev.shape[0] != N:
        raise ValueError(f"shape mismatch: U_prev {U_prev.shape}, fbar {fbar.shape}, N={N}")
    s = plan.scale
    Y = upper_toeplitz_apply(plan.weights, U_prev)
    F = fbar + (plan.kappa / s) * _rows_times_mass(plan.mass, Y)
    F += np.outer(plan.partial_sums[:N] / s, plan.mass @ v)
    return F


def assemble_rhs(plan: PintPlan, U_prev, v, fbar) -> np.ndarray:
    if plan.window is not None:
        return assemble_rhs_heat(plan, U_prev, v, fbar)
    return assemble_rhs_subdiffusion(plan, U_prev, v, fbar)


# ---------------------------------------------------------------- solve

def pint_solve_once(plan: PintPlan, F: np.ndarray, order=None, imag_tol: float = 1e-8) -> np.ndarray:
    """Solve the all-at-once system for right-hand side ``F`` (N x M)."""
    F = np.asarray(F, dtype=float)
    if F.shape[0] != plan.N or F.shape[1] != plan.solver.n:
        raise ValueError(f"F has shape {F.shape}, plan expects ({plan.N}, {plan.solver.n})")
    s = plan.scale
    G = F / plan.lambda_scale[:, None]
    if plan.half:
        H = sfft.rfft(G, axis=0, workers=plan.threads)
        Q = plan.solver.solve(s * H, order=order)
        return sfft.irfft(Q, n=plan.N, axis=0, workers=plan.threads) * plan.lambda_scale[:, None]
    H = sfft.fft(G, axis=0, workers=plan.threads)
    Q = plan.solver.solve(s * H, order=order)
    Uc = sfft.ifft(Q, axis=0, workers=plan.threads) * plan.lambda_scale[:, None]
    big = np.abs(Uc.real).max()
    resid = np.abs(Uc.imag).max()
    if resid > imag_tol * max(big, np.finfo(float).tiny):
        raise ImaginaryResidueError(
            f"imaginary residue {resid:.3e} exceeds {imag_tol:g} x {big:.3e}; plan and RHS are inconsistent"
        )
    return Uc.real.copy()


# ------------------------------------------------------------- roundoff

def roundoff_bound(k: int, kappa: float, N: int, alpha: float, mu0: float, T: float) -> float:
    """Upper bound on the relative roundoff of one diagonalization solve."""
    eps = np.finfo(float).eps
    theta = math.radians(STABILITY_ANGLES[k - 1])
    d_minus_one = float(delta_eval(k, -1.0).real)
    if alpha == 1.0:
        c_k = 3 * (1 + (d_minus_one / T) / mu0) / math.sin(theta)
        return c_k * eps * kappa**-2 * N**2
    c_k = 3 * (1 + (d_minus_one / T) ** alpha / mu0) / math.sin(max(alpha * (math.pi - theta), math.pi / 2))
    return c_k * eps * kappa**-2 * N ** (1 + alpha)
