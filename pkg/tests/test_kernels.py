import numpy as np
import pytest
import scipy.linalg

from pintbdf import kernels
from pintbdf.kernels import TridiagonalBatch

BACKENDS = sorted(kernels.BACKENDS)


def _batch(nb, n, seed=0):
    rng = np.random.default_rng(seed)
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)  # noqa: E731
    return c(nb, n - 1), c(nb, n), c(nb, n - 1), c(nb, n)


def _dense(dl, d, du):
    return np.diag(d) + np.diag(dl, -1) + np.diag(du, 1)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 3, 17])
def test_batch_matches_dense_solve(backend, n):
    dl, d, du, rhs = _batch(5, n)
    x = TridiagonalBatch(dl, d, du, backend=backend).solve(rhs)
    for b in range(5):
        ref = scipy.linalg.solve(_dense(dl[b], d[b], du[b]), rhs[b])
        assert np.allclose(x[b], ref, rtol=1e-12, atol=1e-12)


def test_pivoting_handles_zero_diagonal():
    # a zero leading pivot needs a row swap
    dl = np.array([[1.0 + 0j]])
    d = np.array([[0.0, 1.0 + 0j]])
    du = np.array([[2.0 + 0j]])
    x = TridiagonalBatch(dl, d, du).solve(np.array([[4.0, 3.0 + 0j]]))
    assert np.allclose(x, [[1.0, 2.0]])


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree():
    dl, d, du, rhs = _batch(40, 60, seed=3)
    xs = [TridiagonalBatch(dl, d, du, backend=b).solve(rhs) for b in BACKENDS]
    assert np.max(np.abs(xs[0] - xs[1])) <= 1e-13 * np.max(np.abs(xs[0]))


@pytest.mark.parametrize("backend", BACKENDS)
def test_order_and_thread_independence(backend):
    dl, d, du, rhs = _batch(33, 20, seed=5)
    base = TridiagonalBatch(dl, d, du, backend=backend).solve(rhs)
    perm = np.random.default_rng(1).permutation(33)
    assert np.array_equal(TridiagonalBatch(dl, d, du, backend=backend).solve(rhs, order=perm), base)
    assert np.array_equal(TridiagonalBatch(dl, d, du, threads=4, backend=backend).solve(rhs), base)


@pytest.mark.parametrize("backend", BACKENDS)
def test_singular_system_reported(backend):
    dl, d, du, _ = _batch(3, 4)
    d[1] = 0
    dl[1] = 0
    with pytest.raises(np.linalg.LinAlgError, match="system 1"):
        TridiagonalBatch(dl, d, du, backend=backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_power_series_against_numpy_powers(backend):
    # integer exponent: compare with repeated polynomial multiplication
    coef = np.array([1.5, -2.0, 0.5])
    got = kernels.power_series(coef, 3.0, 6, backend=backend)
    ref = np.polynomial.polynomial.polypow(coef, 3)
    assert np.allclose(got, ref, rtol=1e-14, atol=1e-14)


def test_unknown_backend():
    with pytest.raises(ValueError, match="backend"):
        kernels.get_backend("fortran")
