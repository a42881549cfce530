import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgetopo import kernels

py = kernels.python
cy = kernels.compiled()
needs_cython = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def _mats(seed, L, p):
    rng = np.random.default_rng(seed)
    c = lambda *s: rng.normal(size=s) + 1j * rng.normal(size=s)
    a = c(L, L) + 2 * np.eye(L)
    bs = c(p, L, L)
    bs = bs + np.swapaxes(bs, -1, -2).conj()
    return a, bs


def test_backend_name():
    assert kernels.BACKEND in ("python", "cython")
    if cy is not None:
        assert kernels.BACKEND == "cython"


def test_pure_python_override():
    env = dict(os.environ, EDGETOPO_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import edgetopo; print(edgetopo.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_transfer_product_single_cell():
    a, bs = _mats(0, 2, 1)
    ai = np.linalg.inv(a)
    cell = np.block([[(0.3 * np.eye(2) - bs[0]) @ ai, -a.conj().T], [ai, np.zeros((2, 2))]])
    np.testing.assert_allclose(py.transfer_product(ai, a.conj().T, bs, 0.3), cell, atol=1e-13)


def test_green_block_matches_dense_inverse():
    a, bs = _mats(1, 2, 3)
    n = 9
    h = np.zeros((2 * n, 2 * n), complex)
    for j in range(n):
        h[2 * j:2 * j + 2, 2 * j:2 * j + 2] = bs[j % 3]
        if j + 1 < n:
            h[2 * j:2 * j + 2, 2 * j + 2:2 * j + 4] = a
            h[2 * j + 2:2 * j + 4, 2 * j:2 * j + 2] = a.conj().T
    dense = np.linalg.inv(h - 0.1234 * np.eye(2 * n))[:2, :2]
    np.testing.assert_allclose(py.green_top_block(a, bs, 0.1234, n), dense, atol=1e-9)


@needs_cython
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 7), st.floats(-5, 5))
def test_backends_agree_transfer(seed, L, p, E):
    a, bs = _mats(seed, L, p)
    ai, aa = np.linalg.inv(a), np.ascontiguousarray(a.conj().T)
    ref = py.transfer_product(ai, aa, bs, E)
    got = cy.transfer_product(ai, aa, bs, E)
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())


@needs_cython
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 5), st.integers(2, 60))
def test_backends_agree_green(seed, L, p, n):
    a, bs = _mats(seed, L, p)
    E = 0.123
    ref = py.green_top_block(a, bs, E, n)
    got = cy.green_top_block(a, bs, E, n)
    np.testing.assert_allclose(got, ref, rtol=1e-8, atol=1e-8 * max(1, np.abs(ref).max()))


@needs_cython
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.integers(1, 3))
def test_backends_agree_links(seed, n, rank):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(n, n, 4, rank)) + 1j * rng.normal(size=(n, n, 4, rank))
    f, _ = np.linalg.qr(f)
    f = np.ascontiguousarray(f)
    np.testing.assert_allclose(np.exp(1j * cy.link_phases(f)), np.exp(1j * py.link_phases(f)),
                               atol=1e-10)


def test_link_phases_sum_to_multiple_of_two_pi(rng):
    f, _ = np.linalg.qr(rng.normal(size=(6, 6, 3, 1)) + 1j * rng.normal(size=(6, 6, 3, 1)))
    total = kernels.link_phases(np.ascontiguousarray(f)).sum() / (2 * np.pi)
    assert abs(total - round(total)) < 1e-10
