"""Waveform-relaxation outer iteration around the diagonalization solve."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bdf import BdfTableau
from .cq import cq_weights
from .paradiag import assemble_rhs, build_plan, pint_solve_once
from .stepper import SpaceTimeState, corrected_rhs_all


class DivergenceError(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass
class PintConfig:
    kappa: float | None = 0.5
    kappa_rule: str = "fixed"
    max_iters: int = 20
    tol: float = 1e-12
    threads: int = 1
    # stop as soon as the max-norm increment drops below tol
    stop_on_tol: bool = True
    # "v": U_0^n = v; "zero": U_0^n = 0
    initial_guess: str = "v"
    half: bool = True

    def __post_init__(self):
        if self.kappa_rule not in ("fixed", "log"):
            raise ValueError(f"kappa_rule must be 'fixed' or 'log', got {self.kappa_rule!r}")
        if self.kappa_rule == "fixed" and (self.kappa is None or not 0 < self.kappa < 1):
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.initial_guess not in ("v", "zero"):
            raise ValueError("initial_guess must be 'v' or 'zero'")

    def kappa_for(self, N: int, alpha: float) -> float:
        return choose_kappa(N, alpha, self.kappa_rule, self.kappa)


@dataclass
class ConvergenceReport:
    errors: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    iters: int = 0
    converged: bool = False
    kappa: float = float("nan")
    wall_ms: float = 0.0

    @property
    def ratios(self) -> list:
        e = self.errors
        return [e[i + 1] / e[i] if e[i] > 0 else float("inf") for i in range(len(e) - 1)]

    @property
    def gamma_est(self) -> float:
        try:
            return estimate_gamma(self)
        except ValueError:
            return float("nan")

    @property
    def floor(self) -> float:
        return roundoff_floor(self.errors)


def choose_kappa(N: int, alpha: float = 1.0, rule: str = "fixed", value: float | None = 0.5) -> float:
    """Relaxation parameter: the fixed value, or ``min(1/ln N, 0.5)``."""
    if N < 2:
        raise ValueError("need N >= 2")
    if rule == "fixed":
        return float(value)
    if rule == "log":
        return min(1.0 / math.log(N), 0.5)
    raise ValueError(f"unknown kappa rule {rule!r}")


def _split_floor(errors):
    """Index of the last pre-floor error.

    A ratio e_{m+1}/e_m belongs to the floor once it exceeds 0.5, or exceeds
    ten times the geometric mean of the earlier ratios.
    """
    e = [float(x) for x in errors]
    logs = []
    for m in range(len(e) - 1):
        if e[m] <= 0 or e[m + 1] <= 0:
            return m
        r = e[m + 1] / e[m]
        if r > 0.5 or (logs and r > 10 * math.exp(sum(logs) / len(logs))):
            return m
        logs.append(math.log(r))
    return len(e) - 1


def estimate_gamma(report_or_errors) -> float:
    """Geometric mean of successive error ratios before the roundoff floor."""
    errors = getattr(report_or_errors, "errors", report_or_errors)
    last = _split_floor(errors)
    if last < 2:
        raise ValueError(f"need at least 3 errors above the roundoff floor, have {last + 1}")
    e = np.asarray(errors[: last + 1], dtype=float)
    return float(np.exp(np.mean(np.log(e[1:] / e[:-1]))))


def roundoff_floor(errors) -> float:
    """Median error level after the floor sets in (last error if never reached)."""
    last = _split_floor(errors)
    tail = list(errors[last + 1 :])
    if not tail:
        return float(errors[-1]) if len(errors) else float("nan")
    return float(np.median(tail))


def iterate(plan, fbar, v, config: PintConfig, U0=None, reference=None, mass=None):
    """Run the waveform relaxation for a built plan.

    ``reference`` (final-level vector or full trajectory) enables the e_m^N
    record, measured in the mass norm when ``mass`` is given.
    """
    N, m_dof = fbar.shape
    if U0 is None:
        U0 = np.zeros((N, m_dof)) if config.initial_guess == "zero" else np.tile(v, (N, 1))
    U = np.array(U0, dtype=float)
    ref = None
    if reference is not None:
        ref = reference.final if isinstance(reference, SpaceTimeState) else np.asarray(reference)
        ref = ref[-1] if ref.ndim == 2 else ref

    def err(X):
        d = X[-1] - ref
        return float(np.sqrt(abs(d @ (mass @ d)))) if mass is not None else float(np.linalg.norm(d))

    report = ConvergenceReport(kappa=plan.kappa)
    if ref is not None:
        report.errors.append(err(U))
    t0 = time.perf_counter()
    grow = 0
    for m in range(1, config.max_iters + 1):
        F = assemble_rhs(plan, U, v, fbar)
        U_new = pint_solve_once(plan, F)
        inc = float(np.max(np.abs(U_new - U)))
        U = U_new
        report.iters = m
        report.increments.append(inc)
        if ref is not None:
            report.errors.append(err(U))
        if not np.isfinite(inc):
            report.wall_ms = 1e3 * (time.perf_counter() - t0)
            raise DivergenceError(f"non-finite iterate at m={m}", report)
        if m >= 2 and inc > report.increments[-2]:
            grow += 1
        else:
            grow = 0
        if grow >= 3 and inc > report.increments[0]:
            report.wall_ms = 1e3 * (time.perf_counter() - t0)
            raise DivergenceError(
                f"waveform relaxation diverges (increment {inc:.3e} grew 3 times in a row); reduce kappa",
                report,
            )
        if config.stop_on_tol and inc < config.tol:
            report.converged = True
            break
    else:
        report.converged = bool(report.increments) and report.increments[-1] < config.tol
    report.wall_ms = 1e3 * (time.perf_counter() - t0)
    return SpaceTimeState(U, np.array(v, dtype=float)), report


def make_plan(k: int, disc, data, grid, kappa: float, threads: int = 1, half: bool = True,
              stiffness=None, backend=None):
    weights = BdfTableau.of_order(k) if data.alpha == 1.0 else cq_weights(k, data.alpha, grid.N)
    return build_plan(weights, disc, grid, kappa, threads=threads, half=half, stiffness=stiffness,
                      backend=backend)


def run_waveform(k: int, disc, data, grid, config: PintConfig, reference=None, U0=None):
    """Parallel-in-time solve of the corrected BDFk / CQ-BDFk scheme.

    Returns the final iterate and a :class:`ConvergenceReport`.
    """
    kappa = config.kappa_for(grid.N, data.alpha)
    plan = make_plan(k, disc, data, grid, kappa, threads=config.threads, half=config.half)
    fbar = corrected_rhs_all(BdfTableau.of_order(k), data, grid)
    return iterate(plan, fbar, data.v, config, U0=U0, reference=reference, mass=disc.mass)
