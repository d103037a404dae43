"""Parallel-in-time BDF and convolution-quadrature solvers for (sub)diffusion."""
from .bdf import BdfTableau, bdf_weights, correction_table, delta_eval
from .cq import FractionalWeights, cq_weights, cq_weights_fft, discrete_caputo_apply
from .kernels import BACKEND, TridiagonalBatch
from .nonlinear import (NewtonDivergenceError, NonlinearProblem, allen_cahn, newton_pint_solve,
                        solve_semilinear_reference)
from .paradiag import PintPlan, build_plan, pint_solve_once, roundoff_bound
from .spatial import Indicator, PointMass, SpatialDiscretization, assemble, l2_project
from .stepper import ProblemData, SpaceTimeState, TimeGrid, solve_heat, solve_sequential, solve_subdiffusion
from .waveform import ConvergenceReport, DivergenceError, PintConfig, estimate_gamma, run_waveform

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BdfTableau", "ConvergenceReport", "DivergenceError", "FractionalWeights", "Indicator",
    "NewtonDivergenceError", "NonlinearProblem", "PintConfig", "PintPlan", "PointMass", "ProblemData",
    "SpaceTimeState", "SpatialDiscretization", "TimeGrid", "TridiagonalBatch", "allen_cahn", "assemble",
    "bdf_weights", "build_plan", "correction_table", "cq_weights", "cq_weights_fft", "delta_eval",
    "discrete_caputo_apply", "estimate_gamma", "l2_project", "newton_pint_solve", "pint_solve_once",
    "roundoff_bound", "run_waveform", "solve_heat", "solve_semilinear_reference", "solve_sequential",
    "solve_subdiffusion",
]
