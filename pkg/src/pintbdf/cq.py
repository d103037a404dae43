"""Convolution-quadrature weights for fractional powers of the BDF symbol.

The weights are the Taylor coefficients of ``delta_k(xi)**alpha``. They are
generated by the J.C.P. Miller recurrence for powers of a polynomial;
:func:`cq_weights_fft` is an independent contour-sampling route kept for
cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .bdf import bdf_weights, check_order, delta_eval

# 8 bytes per weight; 10^8 weights is far beyond any step count used here
MAX_WEIGHTS = 10**8


@dataclass(frozen=True)
class FractionalWeights:
    k: int
    alpha: float
    n_max: int
    w: np.ndarray

    @property
    def partial_sums(self) -> np.ndarray:
        """``partial_sums[n] = sum_{j<=n} w_j``."""
        return _partial_sums(self)

    def __len__(self):
        return len(self.w)


def _partial_sums(fw: FractionalWeights) -> np.ndarray:
    out = np.cumsum(fw.w)
    out.flags.writeable = False
    return out


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"fractional order alpha must lie in (0, 1], got {alpha}")
    return alpha


@lru_cache(maxsize=64)
def _cached(k: int, alpha: float, n_max: int, backend: str | None) -> FractionalWeights:
    if alpha == 1.0:
        w = np.zeros(n_max + 1)
        om = bdf_weights(k)
        m = min(k, n_max) + 1
        w[:m] = om[:m]
    else:
        w = kernels.power_series(bdf_weights(k), alpha, n_max, backend=backend)
    w.flags.writeable = False
    return FractionalWeights(k, alpha, n_max, w)


def cq_weights(k: int, alpha: float, n_max: int, backend: str | None = None) -> FractionalWeights:
    """Weights omega_0^(alpha)..omega_{n_max}^(alpha) of ``delta_k(xi)**alpha``.

    Results are cached per ``(k, alpha, n_max)`` and returned read-only.
    """
    k = check_order(k)
    alpha = _check_alpha(alpha)
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if n_max + 1 > MAX_WEIGHTS:
        raise MemoryError(f"n_max={n_max} exceeds the weight budget of {MAX_WEIGHTS}")
    return _cached(k, alpha, n_max, backend)


def cq_weights_fft(k: int, alpha: float, n_max: int, n_samples: int | None = None,
                   radius: float | None = None) -> np.ndarray:
    """Weights by trapezoidal sampling of ``delta_k(xi)**alpha`` on ``|xi| = radius``.

    The default radius makes the aliased tail ``radius**n_samples`` about
    1e-20 while keeping the amplification ``radius**-n_max`` near one.
    """
    k = check_order(k)
    alpha = _check_alpha(alpha)
    if n_samples is None:
        n_samples = max(1 << 14, 1 << int(np.ceil(np.log2(64 * (n_max + 1)))))
    if radius is None:
        radius = 10.0 ** (-20.0 / n_samples)
    theta = 2 * np.pi * np.arange(n_samples) / n_samples
    vals = delta_eval(k, radius * np.exp(1j * theta)) ** alpha
    coef = np.fft.fft(vals) / n_samples
    j = np.arange(n_max + 1)
    return (coef[: n_max + 1] * radius ** (-j.astype(float))).real


def discrete_caputo_apply(fw: FractionalWeights, tau: float, history, v) -> np.ndarray:
    """Discrete Caputo derivative at the newest level.

    ``history`` holds the levels U^1..U^n in chronological order (one row per
    level); levels at or before 0 equal ``v``. Returns
    ``tau**-alpha * sum_{j=0}^{n} w_j (U^{n-j} - v)``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    hist = np.asarray(history, dtype=float)
    scalar = hist.ndim == 1
    if scalar:
        hist = hist[:, None]
    if hist.shape[1] != v.shape[0]:
        raise ValueError(f"history rows of length {hist.shape[1]} do not match v of length {v.shape[0]}")
    n = hist.shape[0]
    if len(fw.w) < n + 1:
        raise ValueError(f"need {n + 1} weights, have {len(fw.w)}")
    out = (fw.w[:n] @ (hist[::-1] - v)) / tau**fw.alpha
    return out[0] if scalar else out
