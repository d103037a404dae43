"""BDFk weights, the generating polynomial and the starting-step corrections."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

MAX_ORDER = 6

# Starting-step corrections a_n^(k), n = 1..k-1, as (numerator, denominator).
_A_CORR = {
    2: [(1, 2)],
    3: [(11, 12), (-5, 12)],
    4: [(31, 24), (-7, 6), (3, 8)],
    5: [(1181, 720), (-177, 80), (341, 240), (-251, 720)],
    6: [(2837, 1440), (-2543, 720), (17, 5), (-1201, 720), (95, 288)],
}

# b_{l,n}^(k): one row per l = 1..k-2, columns n = 1..k-1.
_B_CORR = {
    3: [[(1, 12), (0, 1)]],
    4: [[(1, 6), (-1, 12), (0, 1)],
        [(0, 1), (0, 1), (0, 1)]],
    5: [[(59, 240), (-29, 120), (19, 240), (0, 1)],
        [(1, 240), (-1, 240), (0, 1), (0, 1)],
        [(-1, 720), (0, 1), (0, 1), (0, 1)]],  # sign fixed by the 1/delta^4 expansion
    6: [[(77, 240), (-7, 15), (73, 240), (-3, 40), (0, 1)],
        [(1, 96), (-1, 60), (1, 160), (0, 1), (0, 1)],
        [(-1, 360), (1, 720), (0, 1), (0, 1), (0, 1)],
        [(0, 1), (0, 1), (0, 1), (0, 1), (0, 1)]],
}


def check_order(k: int, lowest: int = 1) -> int:
    if int(k) != k or not lowest <= k <= MAX_ORDER:
        raise ValueError(f"BDF order k must be an integer in {lowest}..{MAX_ORDER}, got {k}")
    return int(k)


@lru_cache(maxsize=None)
def bdf_weights_exact(k: int) -> tuple[Fraction, ...]:
    """Coefficients of ``sum_{l=1}^k (1 - z)^l / l`` in powers of ``z``, exactly."""
    k = check_order(k)
    return tuple(
        sum((Fraction(comb(ell, j), ell) * (-1) ** j for ell in range(max(j, 1), k + 1)), Fraction(0))
        for j in range(k + 1)
    )


def bdf_weights(k: int) -> np.ndarray:
    """BDFk weights omega_0..omega_k as floats."""
    return np.array([float(w) for w in bdf_weights_exact(k)])


def delta_eval(k: int, zeta):
    """Evaluate the BDFk generating polynomial at (complex) ``zeta``."""
    k = check_order(k)
    z = 1 - np.asarray(zeta, dtype=complex)
    out = np.zeros_like(z)
    term = np.ones_like(z)
    for ell in range(1, k + 1):
        term = term * z
        out = out + term / ell
    return out if out.ndim else complex(out)


def correction_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, b)`` with ``a[n-1] = a_n^(k)`` and ``b[l-1, n-1] = b_{l,n}^(k)``.

    For k = 1 both tables are empty.
    """
    k = check_order(k)
    a = np.array([p / q for p, q in _A_CORR.get(k, [])])
    rows = _B_CORR.get(k, [])
    b = np.array([[p / q for p, q in row] for row in rows]).reshape(max(k - 2, 0), max(k - 1, 0))
    return a, b


@dataclass(frozen=True)
class BdfTableau:
    k: int
    omega: np.ndarray
    a_corr: np.ndarray
    b_corr: np.ndarray

    @classmethod
    def of_order(cls, k: int) -> "BdfTableau":
        a, b = correction_table(k)
        return cls(check_order(k), bdf_weights(k), a, b)

    def a(self, n: int) -> float:
        """a_n^(k); zero for n >= k."""
        return float(self.a_corr[n - 1]) if 1 <= n < self.k else 0.0

    def b(self, ell: int, n: int) -> float:
        if 1 <= n < self.k and 1 <= ell <= self.k - 2:
            return float(self.b_corr[ell - 1, n - 1])
        return 0.0
