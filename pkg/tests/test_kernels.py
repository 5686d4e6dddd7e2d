import math
import os
import subprocess
import sys

import numpy as np
import pytest

from skewflow import _kernels as K

BACKENDS = [False, True] if K.NUMBA_KERNELS else [False]


def random_Y(seed, N=9, zeros=False):
    rng = np.random.default_rng(seed)
    Y = np.triu(np.exp(rng.normal(0.0, 2.0, size=(N, N))))
    if zeros:
        Y[rng.random((N, N)) < 0.15] = 0.0
    return Y


def ratio(num, den):
    if den > 0:
        return num / den
    return math.inf if num > 0 else 0.0


# brute-force oracles written straight from the index definitions

def oracle_forward_ratios(Y, c, three):
    N = len(Y)
    out = np.full((N, N), np.nan)
    for p in range(N):
        for L in range(N - p):
            ns = range(0, p + 1) if three else [p]
            out[p, L] = max(ratio(Y[n, p + L] * math.exp(c * L), Y[n, p]) for n in ns)
    return out


def oracle_backward_ratios(Y, c, three):
    N = len(Y)
    out = np.full((N, N), np.nan)
    for m in range(N):
        for L in range(m + 1):
            ns = range(0, m - L + 1) if three else [m - L]
            out[m, L] = max(ratio(Y[n, m - L] * math.exp(c * L), Y[n, m]) for n in ns)
    return out


def oracle_forward_sums(Y, c, q, three):
    N = len(Y)
    out = np.full((N, N), np.nan)
    for p in range(N):
        for L in range(N - p):
            ns = range(0, p + 1) if three else [p]
            out[p, L] = max(ratio(math.fsum((math.exp(c * j) * Y[n, p + j]) ** q for j in range(L + 1)),
                                  Y[n, p] ** q) for n in ns)
    return out


def oracle_backward_sums(Y, c, q, three):
    N = len(Y)
    out = np.full((N, N), np.nan)
    for m in range(N):
        for L in range(m + 1):
            p = m - L
            ns = range(0, p + 1) if three else [p]
            out[m, L] = max(ratio(math.fsum((math.exp(c * (m - k)) * Y[n, k]) ** q
                                            for k in range(p, m + 1)) ** (1 / q), Y[n, m])
                            for n in ns)
    return out


def close(a, b, rtol=1e-12):
    fin = np.isfinite(b)
    assert np.array_equal(np.isnan(a), np.isnan(b))
    assert np.array_equal(np.isinf(a), np.isinf(b))
    np.testing.assert_allclose(a[fin], b[fin], rtol=rtol, atol=0)


@pytest.mark.parametrize("use_numba", BACKENDS)
@pytest.mark.parametrize("three", [False, True])
@pytest.mark.parametrize("zeros", [False, True])
def test_ratio_kernels_against_oracle(use_numba, three, zeros):
    Y = random_Y(1, zeros=zeros)
    for c in (-0.7, 0.0, 1.3):
        close(K.forward_ratios(Y, c, three, use_numba)[0], oracle_forward_ratios(Y, c, three))
        close(K.backward_ratios(Y, c, three, use_numba)[0], oracle_backward_ratios(Y, c, three))


@pytest.mark.parametrize("use_numba", BACKENDS)
@pytest.mark.parametrize("three", [False, True])
@pytest.mark.parametrize("q", [1.0, 2.0, 0.5])
def test_sum_kernels_against_oracle(use_numba, three, q):
    Y = random_Y(2)
    for c in (-0.4, 0.9):
        close(K.forward_sums(Y, c, q, three, use_numba)[0], oracle_forward_sums(Y, c, q, three))
        close(K.backward_sums(Y, c, q, three, use_numba)[0], oracle_backward_sums(Y, c, q, three))


@pytest.mark.parametrize("use_numba", BACKENDS)
def test_transition_products(use_numba):
    rng = np.random.default_rng(3)
    steps = rng.standard_normal((6, 3, 3))
    phi = K.transition_products(steps, use_numba)
    for n in range(7):
        assert np.array_equal(phi[n, n], np.eye(3))
        for k in range(n + 1, 7):
            ref = np.eye(3)
            for j in range(n, k):
                ref = steps[j] @ ref
            np.testing.assert_allclose(phi[n, k], ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("use_numba", BACKENDS)
@pytest.mark.parametrize("kind,order", [("l1", 1), ("l2", 2), ("linf", np.inf)])
def test_trajectory_norms(use_numba, kind, order):
    rng = np.random.default_rng(4)
    phi = K.transition_products(rng.standard_normal((4, 2, 2)))
    V = rng.standard_normal((3, 2))
    Y = K.trajectory_norms(phi, V, kind, use_numba)
    for i, v in enumerate(V):
        for n in range(5):
            for k in range(n, 5):
                assert Y[i, n, k] == pytest.approx(np.linalg.norm(phi[n, k] @ v, order), rel=1e-13)


def test_backends_agree_on_adjoint_sums():
    if len(BACKENDS) < 2:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(5)
    Q = np.abs(rng.standard_normal((7, 7, 7)))
    a = K.adjoint_sums(Q, 0.3, 2.0, 1.5, use_numba=True)
    b = K.adjoint_sums(Q, 0.3, 2.0, 1.5, use_numba=False)
    close(a, b)


def test_env_flag_selects_numpy_backend():
    code = ("from skewflow import _kernels as K; "
            "print(K.USE_NUMBA, K.get_kernels() is K.NUMPY_KERNELS)")
    env = dict(os.environ, SKEWFLOW_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["False", "True"]
