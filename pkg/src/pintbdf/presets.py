"""Problem setups of the four benchmark examples."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spatial import Indicator, PointMass, assemble, l2_project, rhs_vector
from .stepper import ProblemData, TimeGrid

# defaults per example: dim, alpha, T, N, h, kappa (None -> 1/log N), k
DEFAULTS = {
    1: dict(dim=1, alpha=1.0, T=0.5, N=100, h=1e-3, kappa=0.5, k=3),
    2: dict(dim=1, alpha=0.5, T=0.1, N=100, h=1e-3, kappa=0.1, k=3),
    3: dict(dim=2, alpha=0.5, T=0.1, N=100, h=1e-2, kappa=None, k=3),
    4: dict(dim=1, alpha=0.25, T=0.4, N=100, h=1e-3, kappa=0.1, k=1, eps_w=1.0),
}


@dataclass
class Setup:
    disc: object
    data: ProblemData
    grid: TimeGrid
    exact: object = None  # callable (x, t) for manufactured solutions


def example1(k=3, T=0.5, N=100, h=1e-3, alpha=1.0, disc=None):
    """1D heat: v = indicator of (0, 1/2), f = e^t cos x."""
    if alpha != 1.0:
        raise ValueError("example 1 is the heat equation (alpha = 1)")
    disc = disc or assemble(1, h)
    v = l2_project(disc, Indicator((0.0,), (0.5,)))
    cos_load = rhs_vector(disc, lambda x: np.cos(x[:, 0]))
    data = ProblemData.build(disc, 1.0, v, source=lambda t: math.exp(t) * cos_load,
                             source_derivs=[cos_load] * max(k - 1, 1), name="example1")
    return Setup(disc, data, TimeGrid(T, N))


def example2(k=3, T=0.1, N=100, h=1e-3, alpha=0.5, disc=None):
    """1D subdiffusion: v = projected Dirac mass at 1/2, f = 0."""
    if not 0 < alpha < 1:
        raise ValueError("example 2 needs a fractional order 0 < alpha < 1")
    disc = disc or assemble(1, h)
    v = l2_project(disc, PointMass((0.5,)))
    zero = np.zeros(disc.n_dof)
    data = ProblemData.build(disc, alpha, v, source=lambda t: zero,
                             source_derivs=[zero] * max(k - 1, 1), name="example2")
    return Setup(disc, data, TimeGrid(T, N))


def example3(k=3, T=0.1, N=100, h=1e-2, alpha=0.5, disc=None):
    """2D subdiffusion on the unit square with box data and f = cos(t) on the upper box."""
    disc = disc or assemble(2, h)
    v = l2_project(disc, Indicator((0.0, 0.0), (0.5, 0.5)))
    box = rhs_vector(disc, Indicator((0.5, 0.5), (1.0, 1.0)))
    cos_derivs = [1.0, 0.0, -1.0, 0.0]
    derivs = [cos_derivs[ell % 4] * box for ell in range(max(k - 1, 1))]
    data = ProblemData.build(disc, alpha, v, source=lambda t: math.cos(t) * box,
                             source_derivs=derivs, name="example3")
    return Setup(disc, data, TimeGrid(T, N))


def allen_cahn_source(alpha: float, eps_w: float):
    """Source making u = t^2/2 sin(2 pi x) exact for the Allen-Cahn problem."""
    if alpha == 1.0:
        def time_part(t):
            return t
    else:
        c = 1.0 / math.gamma(3.0 - alpha)

        def time_part(t):
            return c * t ** (2.0 - alpha)

    def f(x, t):
        s = np.sin(2 * np.pi * x[:, 0])
        u = 0.5 * t * t * s
        return time_part(t) * s + 4 * np.pi**2 * u + (u**3 - u) / eps_w**2

    def exact(x, t):
        return 0.5 * t * t * np.sin(2 * np.pi * np.asarray(x)[..., 0])

    return f, exact


def example4(k=1, T=0.4, N=100, h=1e-3, alpha=0.25, eps_w=1.0, disc=None):
    """Allen-Cahn with g(u) = (u^3 - u)/eps^2 and manufactured u = t^2/2 sin(2 pi x).

    Returns the setup; the nonlinearity is attached by :mod:`pintbdf.nonlinear`.
    """
    from .spatial import load_vector

    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if alpha < 1 and k > 3:
        raise ValueError("the manufactured source has no second time derivative at t=0 for alpha < 1; use k <= 3")
    disc = disc or assemble(1, h)
    f, exact = allen_cahn_source(alpha, eps_w)
    sin_load = rhs_vector(disc, lambda x: np.sin(2 * np.pi * x[:, 0]))
    # d^l f / dt^l at t = 0: f(0) = 0; for alpha = 1, f' = sin, f'' = (4 pi^2 - 1/eps^2) sin
    derivs = [np.zeros(disc.n_dof)]
    for ell in range(1, max(k - 1, 1)):
        if alpha < 1:
            derivs.append(np.zeros(disc.n_dof))
        elif ell == 1:
            derivs.append(sin_load.copy())
        elif ell == 2:
            derivs.append((4 * np.pi**2 - 1 / eps_w**2) * sin_load)
        else:
            derivs.append(np.zeros(disc.n_dof))
    data = ProblemData.build(disc, alpha, np.zeros(disc.n_dof), source=lambda t: load_vector(disc, f, t),
                             source_derivs=derivs, name="example4")
    return Setup(disc, data, TimeGrid(T, N), exact=exact)


BUILDERS = {1: example1, 2: example2, 3: example3, 4: example4}
