"""Brute-force half-space checks: truncated Jacobi matrices and Green matrices.

These do not use transfer matrices and serve as an independent oracle for the
edge spectrum and for U^E(k1).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import kernels
from .errors import EdgeTopoError
from .model import fiber_blocks
from .transfer import contracting_frame, transfer_matrix

__all__ = [
    "TruncatedHalfSpace",
    "TruncatedState",
    "truncated_halfspace",
    "truncated_spectrum",
    "green_matrix",
    "green_unitary",
    "weyl_frame",
    "required_length",
]

DECAY_CUTOFF = 1e-6


@dataclass(frozen=True, eq=False)
class TruncatedHalfSpace:
    """N-site Dirichlet truncation of the half-space fiber Hamiltonian."""

    k1: float
    N: int
    matrix: np.ndarray


@dataclass(frozen=True)
class TruncatedState:
    E: float
    decay_rate: float

    @property
    def genuine(self):
        return self.decay_rate <= DECAY_CUTOFF


def _blocks(model, k1):
    a = model.T2 + np.exp(1j * k1) * model.T3
    bs = np.array([fiber_blocks(model, k1, c)[1] for c in range(model.p)])
    return a, bs


def truncated_halfspace(model, k1, N):
    """Block-tridiagonal matrix with B2 of cell (j mod p) on site j and A2 above the diagonal."""
    a, bs = _blocks(model, k1)
    L, p = model.L, model.p
    h = np.zeros((N * L, N * L), complex)
    for j in range(N):
        h[j * L:(j + 1) * L, j * L:(j + 1) * L] = bs[j % p]
        if j + 1 < N:
            h[j * L:(j + 1) * L, (j + 1) * L:(j + 2) * L] = a
            h[(j + 1) * L:(j + 2) * L, j * L:(j + 1) * L] = a.conj().T
    return TruncatedHalfSpace(float(k1), int(N), h)


def required_length(model, k1, E, N=200, target=1e-12, cap=4000):
    """Smallest N >= given N with contraction_rate^(N/p) below target."""
    rate = contracting_frame(transfer_matrix(model, E, k1)).contraction_rate
    if rate <= 0:
        return N
    need = int(np.ceil(model.p * np.log(target) / np.log(rate)))
    return int(min(cap, max(N, need)))


def truncated_spectrum(model, k1, N=200, window=(-np.inf, np.inf), auto_length=False):
    """Eigenvalues of the truncation inside ``window`` with their decay rates.

    The decay rate is the ratio of the eigenvector norm on the last N/4 sites
    to that on the first N/4 sites; states with rate above 1e-6 live at the
    artificial far wall or in the bulk and are flagged as not genuine.
    """
    if N < 50:
        raise ValueError("N must be at least 50")
    lo, hi = window
    if auto_length and np.isfinite(lo) and np.isfinite(hi):
        N = required_length(model, k1, 0.5 * (lo + hi), N)
    th = truncated_halfspace(model, k1, N)
    kw = {}
    if np.isfinite(lo) or np.isfinite(hi):
        kw["subset_by_value"] = (lo, hi)
    w, v = eigh(th.matrix, **kw)
    L = model.L
    q = max(1, N // 4) * L
    out = []
    for E, vec in zip(w, v.T):
        head = np.linalg.norm(vec[:q])
        tail = np.linalg.norm(vec[-q:])
        rate = tail / head if head > 0 else np.inf
        out.append(TruncatedState(float(E), float(rate)))
    return out


def green_matrix(model, k1, E, N=200):
    """Top-left L x L block of (H_N - E)^{-1} for the N-site truncation."""
    a, bs = _blocks(model, k1)
    try:
        g = kernels.green_top_block(np.ascontiguousarray(a), np.ascontiguousarray(bs),
                                    float(E), int(N))
    except np.linalg.LinAlgError:
        ev = np.linalg.eigvalsh(truncated_halfspace(model, k1, N).matrix)
        near = ev[np.argmin(np.abs(ev - E))]
        raise EdgeTopoError(f"resolvent singular at E={E}; nearest truncated eigenvalue {near}")
    if not np.all(np.isfinite(g)):
        raise EdgeTopoError(f"resolvent overflow at E={E}")
    return g


def weyl_frame(model, k1, E, N=200):
    """Frame (A G A^*; -1) of the decaying solutions built from the Green matrix.

    In the (A psi_n; psi_{n-1}) coordinates of the transfer matrices, the
    decaying solution started by a boundary source is (A G A^* chi; -chi).
    """
    a, _ = _blocks(model, k1)
    g = green_matrix(model, k1, E, N)
    return np.vstack([a @ g @ a.conj().T, -np.eye(model.L)])


def green_unitary(model, k1, E, N=200, conjugate=True):
    """U = (M + i)(M - i)^{-1} with M = A G A^* (default) or M = G.

    The plain form M = G agrees with the transfer-matrix U only when A2(k1)
    is unitary up to a real scale factor 1.
    """
    if conjugate:
        top = weyl_frame(model, k1, E, N)[: model.L]
    else:
        top = green_matrix(model, k1, E, N)
    one = np.eye(model.L)
    return np.linalg.solve((top - 1j * one).T, (top + 1j * one).T).T
