"""Pure numpy versions of the hot kernels (same signatures as ``_kernels``)."""

import numpy as np

BACKEND = "python"


def transfer_product(a_inv, a_adj, bs, E):
    """Ordered product T_{p-1} ... T_0 of one-step transfer matrices.

    Cell c is ((E - B_c) A^{-1}, -A^*; A^{-1}, 0) with ``bs[c] = B_c``.
    """
    L = a_inv.shape[0]
    prod = np.eye(2 * L, dtype=complex)
    cell = np.zeros((2 * L, 2 * L), complex)
    cell[:L, L:] = -a_adj
    cell[L:, :L] = a_inv
    for b in bs:
        cell[:L, :L] = E * a_inv - b @ a_inv
        prod = cell @ prod
    return prod


def green_top_block(a, bs, E, n):
    """Top-left block of (H_n - E)^{-1} for the n-site Jacobi matrix.

    Site j carries B_{j mod p}; consecutive sites couple through ``a`` above
    the diagonal.  Uses the backward Schur-complement recursion.
    """
    L = a.shape[0]
    p = len(bs)
    eye = np.eye(L)
    g = np.linalg.inv(bs[(n - 1) % p] - E * eye)
    a_adj = a.conj().T
    for j in range(n - 2, -1, -1):
        g = np.linalg.inv(bs[j % p] - E * eye - a @ g @ a_adj)
    return g


def link_phases(frames):
    """Plaquette field strengths arg det(U1 U2 U3 U4) on a periodic grid.

    ``frames`` has shape (N1, N2, D, n); result has shape (N1, N2).
    """
    f = frames
    f1 = np.roll(f, -1, axis=0)
    f2 = np.roll(f, -1, axis=1)
    d1 = np.linalg.det(np.einsum("ijda,ijdb->ijab", f.conj(), f1))
    d2 = np.linalg.det(np.einsum("ijda,ijdb->ijab", f.conj(), f2))
    loop = d1 * np.roll(d2, -1, axis=0) * np.roll(d1, -1, axis=1).conj() * d2.conj()
    return np.angle(loop)
