"""Transfer matrices, contracting Lagrangian frames and the edge unitary.

For a fiber Hamiltonian with blocks A = A2(k1) and B_c = B2(k1) of cell c the
one-step transfer matrix

    T_c = ((E - B_c) A^{-1}, -A^*; A^{-1}, 0)

maps (A psi_n; psi_{n-1}) to (A psi_{n+1}; psi_n) and is J-unitary for
J = ((0, -1); (1, 0)).  The Dirichlet half-space starts at cell 0, so the
boundary plane is (1; 0).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, schur

from . import kernels
from .errors import FrameError, NonHyperbolicError, SingularFiberError
from .model import fiber_blocks

__all__ = [
    "J_matrix",
    "TransferMatrix",
    "transfer_matrix",
    "Classification",
    "classify",
    "LagrangianFrame",
    "contracting_frame",
    "EdgeUnitary",
    "stereographic",
    "edge_unitary",
    "unitary_phases",
    "COND_MAX",
    "UNIT_CIRCLE_TOL",
]

COND_MAX = 1e12
UNIT_CIRCLE_TOL = 1e-8


def J_matrix(L):
    """The skew form J = ((0, -1); (1, 0)) on C^{2L}."""
    z, one = np.zeros((L, L)), np.eye(L)
    return np.block([[z, -one], [one, z]])


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """p-cell transfer matrix at energy E and quasi-momentum k1."""

    mat: np.ndarray
    E: float
    k1: float
    cells: int
    a2: np.ndarray

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def L(self):
        return self.mat.shape[0] // 2


def _a2_inverse(model, k1):
    a = model.T2 + np.exp(1j * k1) * model.T3
    # relative to the hopping scale, so that a 1 x 1 block can be singular too
    scale = np.linalg.norm(model.T2, 2) + np.linalg.norm(model.T3, 2)
    smin = np.linalg.svd(a, compute_uv=False)[-1]
    cond = scale / smin if smin > 0 else np.inf
    if not np.isfinite(cond) or cond > COND_MAX:
        raise SingularFiberError(k1, cond)
    return a, np.linalg.inv(a)


def transfer_matrix(model, E, k1):
    """Transfer matrix T_{p-1} ... T_0 over one period in direction 2.

    Raises
    ------
    SingularFiberError
        If A2(k1) has condition number above ``COND_MAX``.
    """
    a, a_inv = _a2_inverse(model, k1)
    bs = np.array([fiber_blocks(model, k1, c)[1] for c in range(model.p)])
    mat = kernels.transfer_product(np.ascontiguousarray(a_inv),
                                   np.ascontiguousarray(a.conj().T), bs, float(E))
    return TransferMatrix(mat, float(E), float(k1), model.p, a)


@dataclass(frozen=True)
class Classification:
    """Outcome of :func:`classify`."""

    hyperbolic: bool
    eigenvalues: tuple
    unimodular: tuple
    n_inside: int


def classify(tm, unit_circle_tol=UNIT_CIRCLE_TOL):
    """Decide whether a transfer matrix has eigenvalues on the unit circle."""
    ev = np.linalg.eigvals(tm.mat)
    mod = np.abs(ev)
    uni = tuple(complex(x) for x in ev[np.abs(mod - 1) <= unit_circle_tol])
    return Classification(not uni, tuple(complex(x) for x in ev), uni,
                          int(np.sum(mod < 1 - unit_circle_tol)))


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """Orthonormal 2L x L frame of the contracting subspace.

    ``isotropy`` is ||Phi^* J Phi|| and ``invariance`` the relative residual
    ||(1 - Phi Phi^*) T Phi|| / max(1, ||T||); both are diagnostics.
    """

    frame: np.ndarray
    contraction_rate: float
    E: float = np.nan
    k1: float = np.nan
    isotropy: float = 0.0
    invariance: float = 0.0

    @property
    def a(self):
        return self.frame[: self.frame.shape[1]]

    @property
    def b(self):
        return self.frame[self.frame.shape[1]:]


def contracting_frame(tm, unit_circle_tol=UNIT_CIRCLE_TOL):
    """Frame of the invariant subspace for eigenvalues inside the unit circle.

    Uses a complex Schur form reordered so that the interior eigenvalues lead.

    Raises
    ------
    NonHyperbolicError
        If some eigenvalue lies within ``unit_circle_tol`` of the unit circle or
        the interior count differs from L.
    """
    L = tm.L
    t, z, sdim = schur(tm.mat, output="complex", sort=lambda x: abs(x) < 1)
    ev = np.diag(t)
    mod = np.abs(ev)
    if np.any(np.abs(mod - 1) <= unit_circle_tol) or sdim != L:
        raise NonHyperbolicError(tm.E, tm.k1, ev[np.abs(mod - 1) <= unit_circle_tol])
    phi, _ = qr(z[:, :L], mode="economic")
    jm = J_matrix(L)
    iso = np.linalg.norm(phi.conj().T @ jm @ phi, 2)
    tp = tm.mat @ phi
    inv = np.linalg.norm(tp - phi @ (phi.conj().T @ tp), 2) / max(1.0, np.linalg.norm(tm.mat, 2))
    return LagrangianFrame(phi, float(mod[:L].max()), tm.E, tm.k1, float(iso), float(inv))


@dataclass(frozen=True, eq=False)
class EdgeUnitary:
    """Edge unitary U^E(k1)."""

    u: np.ndarray
    E: float = np.nan
    k1: float = np.nan

    def phases(self):
        """Sorted eigenphases in (-pi, pi]."""
        return unitary_phases(self.u)[0]


def unitary_phases(u):
    """Eigenphases in (-pi, pi] (ascending) and orthonormal eigenvectors of a unitary."""
    t, z = schur(u, output="complex")
    th = np.angle(np.diag(t))
    th = np.where(th <= -np.pi, th + 2 * np.pi, th)
    order = np.argsort(th, kind="stable")
    return th[order], z[:, order]


def stereographic(frame):
    """Unitary (a - ib)(a + ib)^{-1} of a Lagrangian frame (a; b).

    Raises
    ------
    FrameError
        If a + ib has condition number above 1e12.
    """
    phi = frame.frame if isinstance(frame, LagrangianFrame) else np.asarray(frame)
    L = phi.shape[1]
    a, b = phi[:L], phi[L:]
    m = a + 1j * b
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise FrameError(f"a + ib is ill-conditioned (cond={cond:.3g}); frame not Lagrangian")
    u = np.linalg.solve(m.T, (a - 1j * b).T).T
    return EdgeUnitary(u, getattr(frame, "E", np.nan), getattr(frame, "k1", np.nan))


def edge_unitary(model, E, k1, unit_circle_tol=UNIT_CIRCLE_TOL):
    """U^E(k1): stereographic image of the contracting frame of the transfer matrix."""
    return stereographic(contracting_frame(transfer_matrix(model, E, k1), unit_circle_tol))
