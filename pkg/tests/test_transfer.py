import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgetopo import (NonHyperbolicError, SingularFiberError, TightBindingModel,
                      build_harper, build_square_laplacian, build_triangular, classify,
                      contracting_frame, edge_unitary, stereographic, transfer_matrix)
from edgetopo.errors import FrameError
from edgetopo.transfer import J_matrix, unitary_phases


def random_model(seed, L=2, p=1):
    rng = np.random.default_rng(seed)
    c = lambda: rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    vs = []
    for _ in range(p):
        v = c()
        vs.append(v + v.conj().T)
    return TightBindingModel(c(), c() + 3 * np.eye(L), 0.5 * c(), tuple(vs), R=L)


seeds = st.integers(0, 2**32 - 1)
k1s = st.floats(-np.pi, np.pi)


@settings(max_examples=40, deadline=None)
@given(seeds, k1s, st.floats(-30, 30), st.integers(1, 3))
def test_transfer_matrix_is_j_unitary(seed, k1, E, p):
    tm = transfer_matrix(random_model(seed, p=p), E, k1)
    j = J_matrix(tm.L)
    np.testing.assert_allclose(tm.mat.conj().T @ j @ tm.mat, j, atol=1e-10 * np.linalg.norm(tm.mat) ** 2)


@settings(max_examples=40, deadline=None)
@given(seeds, k1s, st.floats(-30, 30), st.integers(1, 3))
def test_transfer_determinant(seed, k1, E, p):
    tm = transfer_matrix(random_model(seed, p=p), E, k1)
    d = np.linalg.det(tm.a2)
    np.testing.assert_allclose(np.linalg.det(tm.mat), (np.conj(d) / d) ** p, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, k1s, st.floats(-30, 30))
def test_eigenvalues_pair_under_inversion(seed, k1, E):
    tm = transfer_matrix(random_model(seed), E, k1)
    ev = np.linalg.eigvals(tm.mat)
    partner = 1 / np.conj(ev)
    dist = np.abs(ev[:, None] - partner[None, :]).min(axis=0)
    assert np.all(dist <= 1e-8 * np.maximum(1, np.abs(partner)))


@settings(max_examples=40, deadline=None)
@given(seeds, k1s, st.sampled_from([-1, 1]))
def test_frame_and_unitary_outside_spectrum(seed, k1, side):
    model = random_model(seed)
    E = side * 60.0
    fr = contracting_frame(transfer_matrix(model, E, k1))
    assert fr.isotropy <= 1e-8
    assert fr.contraction_rate < 1
    u = stereographic(fr).u
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-10)


def test_no_edge_state_far_below_spectrum():
    # far outside the spectrum the frame is close to the boundary plane, no phase at 0
    u = edge_unitary(build_harper(3, 7), -50.0, 0.3)
    assert np.min(np.abs(u.phases())) > 0.1


def test_classify_inside_and_outside(harper):
    ks = np.linspace(-np.pi, np.pi, 64, endpoint=False)
    assert not all(classify(transfer_matrix(harper, -2.57, k)).hyperbolic for k in ks)
    c = classify(transfer_matrix(harper, -2.4, 0.3))
    assert c.hyperbolic and c.n_inside == 1


def test_nonhyperbolic_raises():
    m = build_square_laplacian(1.0)
    with pytest.raises(NonHyperbolicError):
        contracting_frame(transfer_matrix(m, 0.0, 0.5))


def test_singular_fiber_raises():
    with pytest.warns(Warning):
        m = build_triangular(1.0, 1.0, 1.0)
    with pytest.raises(SingularFiberError):
        transfer_matrix(m, 10.0, np.pi)


def test_stereographic_rejects_non_lagrangian():
    frame = np.vstack([np.eye(1), 1j * np.eye(1)]) / np.sqrt(2)
    with pytest.raises(FrameError):
        stereographic(frame)


def test_stereographic_of_boundary_plane_is_identity():
    u = stereographic(np.vstack([np.eye(2), np.zeros((2, 2))])).u
    np.testing.assert_allclose(u, np.eye(2), atol=1e-14)


def test_kane_mele_time_reversal_of_u(kane_mele):
    i_ = kane_mele.tri_matrix
    for k in (0.3, 1.1, 2.9):
        u = edge_unitary(kane_mele, 0.0, k).u
        um = edge_unitary(kane_mele, 0.0, -k).u
        np.testing.assert_allclose(um, i_.conj().T @ u.T @ i_, atol=1e-8)


def test_unitary_phases_sorted_in_range(rng):
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    th, v = unitary_phases(q)
    assert np.all(np.diff(th) >= 0) and np.all((th > -np.pi) & (th <= np.pi))
    np.testing.assert_allclose(q @ v, v * np.exp(1j * th), atol=1e-12)
