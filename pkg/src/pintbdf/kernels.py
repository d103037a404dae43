"""Backend selection for the hot kernels.

The compiled extension ``pintbdf._ckernels`` is used when it imports; the
pure-Python module ``pintbdf._pykernels`` is the fallback. Set
``PINTBDF_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

try:
    if os.environ.get("PINTBDF_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

BACKEND = "compiled" if _ckernels is not None else "python"


def get_backend(name: str | None = None):
    name = BACKEND if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {sorted(BACKENDS)}") from None


def power_series(coef, alpha: float, n_max: int, backend: str | None = None) -> np.ndarray:
    coef = np.ascontiguousarray(coef, dtype=float)
    return get_backend(backend).power_series(coef, float(alpha), int(n_max))


def _chunks(count: int, parts: int):
    parts = max(1, min(parts, count))
    edges = np.linspace(0, count, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class TridiagonalBatch:
    """LU factors (partial pivoting) of a batch of complex tridiagonal matrices.

    Row ``b`` of ``lower``, ``diag``, ``upper`` holds the sub-, main and
    super-diagonal of system ``b``. Each system is factored and solved
    independently, so splitting the batch across threads changes no bits.
    """

    def __init__(self, lower, diag, upper, threads: int = 1, backend: str | None = None):
        self.kern = get_backend(backend)
        self.backend = BACKEND if backend is None else backend
        self.threads = max(1, int(threads))
        self.dl = np.ascontiguousarray(lower, dtype=complex).copy()
        self.d = np.ascontiguousarray(diag, dtype=complex).copy()
        self.du = np.ascontiguousarray(upper, dtype=complex).copy()
        nb, n = self.d.shape
        if self.dl.shape != (nb, n - 1) or self.du.shape != (nb, n - 1):
            raise ValueError("off-diagonals must have shape (batch, n - 1)")
        self.du2 = np.zeros((nb, max(n - 2, 0)), dtype=complex)
        self.ipiv = np.zeros((nb, n), dtype=np.intc)
        bad = [
            r
            for r in self._map(
                lambda a, b: self.kern.gttrf_batch(self.dl, self.d, self.du, self.du2, self.ipiv, a, b)
            )
            if r >= 0
        ]
        if bad:
            raise np.linalg.LinAlgError(f"tridiagonal system {min(bad)} of the batch is singular")

    @property
    def shape(self):
        return self.d.shape

    def _map(self, fn):
        spans = _chunks(self.d.shape[0], self.threads)
        if len(spans) == 1:
            return [fn(*spans[0])]
        with ThreadPoolExecutor(len(spans)) as pool:
            return list(pool.map(lambda s: fn(*s), spans))

    def solve(self, rhs: np.ndarray, order=None) -> np.ndarray:
        """Solve every system against the matching row of ``rhs`` (shape (batch, n))."""
        x = np.ascontiguousarray(rhs, dtype=complex).copy()
        if x.shape != self.d.shape:
            raise ValueError(f"rhs shape {x.shape} does not match batch {self.d.shape}")
        if order is not None:
            # explicit per-system order, used to check order independence
            for b in order:
                self.kern.gttrs_batch(self.dl, self.d, self.du, self.du2, self.ipiv, x, int(b), int(b) + 1)
            return x
        self._map(lambda a, b: self.kern.gttrs_batch(self.dl, self.d, self.du, self.du2, self.ipiv, x, a, b))
        return x
