import numpy as np
import pytest

from pintbdf.bdf import bdf_weights
from pintbdf.cq import cq_weights, cq_weights_fft, discrete_caputo_apply


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("k", range(1, 7))
def test_recurrence_matches_contour_oracle(k, alpha):
    w = cq_weights(k, alpha, 512).w
    ref = cq_weights_fft(k, alpha, 512)
    assert np.max(np.abs(w - ref) / np.abs(ref)) <= 1e-10


def test_alpha_one_is_bdf():
    w = cq_weights(4, 1.0, 10).w
    assert np.array_equal(w[:5], bdf_weights(4)) and not w[5:].any()


def test_bdf1_closed_form():
    # (1 - z)^a has w_j = (-1)^j binom(a, j)
    from scipy.special import binom

    a = 0.4
    j = np.arange(30)
    assert np.allclose(cq_weights(1, a, 29).w, (-1.0) ** j * binom(a, j), rtol=1e-13, atol=0)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("k", [1, 3, 6])
def test_decay_exponent(k, alpha):
    w = cq_weights(k, alpha, 10_000).w
    n = np.unique(np.geomspace(100, 10_000, 60).astype(int))
    slope = np.polyfit(np.log(n), np.log(np.abs(w[n])), 1)[0]
    assert abs(slope + 1 + alpha) <= 0.05


def test_partial_sums_and_read_only():
    fw = cq_weights(2, 0.5, 50)
    assert np.allclose(fw.partial_sums, np.cumsum(fw.w))
    with pytest.raises(ValueError):
        fw.w[0] = 1.0
    # S_n are the coefficients of delta(z)^a / (1 - z) ~ (1 - z)^(a-1), so S_n ~ n^-a / Gamma(1 - a)
    from math import gamma

    n = 20000
    assert cq_weights(2, 0.5, n).partial_sums[-1] == pytest.approx(n**-0.5 / gamma(0.5), rel=1e-3)


def test_caching_returns_same_object():
    assert cq_weights(3, 0.5, 64) is cq_weights(3, 0.5, 64)


def test_caputo_of_constant_is_zero():
    fw = cq_weights(3, 0.5, 20)
    v = np.array([1.0, -2.0])
    assert np.allclose(discrete_caputo_apply(fw, 0.1, np.tile(v, (10, 1)), v), 0.0)


def test_caputo_of_linear_function():
    # u(t) = t has Caputo derivative t^{1-a}/Gamma(2-a); BDF2-CQ is second order away from 0
    from math import gamma

    a, N, T = 0.5, 400, 1.0
    tau = T / N
    fw = cq_weights(2, a, N)
    hist = tau * np.arange(1, N + 1)
    got = discrete_caputo_apply(fw, tau, hist, 0.0)
    assert got == pytest.approx(T ** (1 - a) / gamma(2 - a), rel=1e-3)


@pytest.mark.parametrize("bad", [0.0, -0.5, 1.5])
def test_bad_alpha(bad):
    with pytest.raises(ValueError, match="alpha"):
        cq_weights(2, bad, 10)
