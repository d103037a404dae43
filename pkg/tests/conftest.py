import mpmath
import numpy as np
import pytest

from pintbdf.bdf import BdfTableau
from pintbdf.cq import cq_weights
from pintbdf.spatial import assemble, nodal
from pintbdf.stepper import ProblemData, TimeGrid, solve_heat, solve_subdiffusion


def mittag_leffler(alpha, z, terms=800, dps=80):
    """E_alpha(z) by its power series in high precision (fine for |z| <= ~30)."""
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        return float(mpmath.fsum(z**j / mpmath.gamma(alpha * j + 1) for j in range(terms)))


class EigenProblem:
    """v = discrete eigenvector s of K s = lam M s, f = c M s constant in time.

    The semidiscrete solution is u(t) s with
    u(t) = c/lam + (1 - c/lam) E_alpha(-lam t^alpha).
    """

    def __init__(self, h=1 / 8, c=1.0):
        self.disc = assemble(1, h)
        self.s = nodal(self.disc, lambda x: np.sin(np.pi * x[:, 0]))
        self.Ms = self.disc.mass @ self.s
        self.lam = float(self.s @ (self.disc.stiffness @ self.s) / (self.s @ self.Ms))
        self.c = c

    def exact(self, alpha, T):
        decay = np.exp(-self.lam * T) if alpha == 1.0 else mittag_leffler(alpha, -self.lam * T**alpha)
        return self.c / self.lam + (1 - self.c / self.lam) * decay

    def data(self, alpha, k):
        f = self.c * self.Ms
        return ProblemData.build(self.disc, alpha, self.s.copy(), source=lambda t: f,
                                 source_derivs=[f] + [0 * f] * max(k - 2, 0))

    def error(self, alpha, k, N, T=0.2, corrected=True):
        tab = BdfTableau.of_order(k)
        if not corrected:
            tab = BdfTableau(k, tab.omega, np.zeros_like(tab.a_corr), np.zeros_like(tab.b_corr))
        grid = TimeGrid(T, N)
        data = self.data(alpha, k)
        if alpha == 1.0:
            U = solve_heat(tab, self.disc, data, grid)
        else:
            U = solve_subdiffusion(tab, cq_weights(k, alpha, N), self.disc, data, grid)
        coef = U.final @ self.Ms / (self.s @ self.Ms)
        return abs(coef - self.exact(alpha, T))


@pytest.fixture(scope="session")
def eigen_problem():
    return EigenProblem()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
