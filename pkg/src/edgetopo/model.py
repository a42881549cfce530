"""Periodic tight-binding Hamiltonians on Z^2 with matrix-valued hoppings.

A model is

    H = sum_{i=1,2,3} (T_i^* S_i + T_i S_i^*) + V,      S_3 = S_1^* S_2,

acting on l^2(Z^2, C^L).  Periodicity ``p > 1`` is allowed along the transfer
direction 2 only; cell ``c`` then carries its own on-site term ``V_cells[c]``
and a phase offset ``cell_phases[c]`` on the direction-1 hopping (a Landau
gauge magnetic flux, as in the Harper model).
"""

from dataclasses import dataclass, field
from math import gcd
import json
import warnings

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .errors import ModelError, ModelWarning

__all__ = [
    "TightBindingModel",
    "ModelDiagnostics",
    "spin_matrices",
    "time_reversal_matrix",
    "build_square_laplacian",
    "build_spin_orbit_square",
    "build_harper",
    "build_triangular",
    "build_honeycomb",
    "build_kane_mele",
    "fiber_blocks",
    "diagnose",
    "spin_sectors",
    "spin_homotopy",
    "model_from_dict",
    "model_to_dict",
    "load_model",
    "BUILDERS",
]

HERMITIAN_TOL = 1e-12


def spin_matrices(s):
    """Spin matrices (s^x, s^y, s^z) for spin ``s`` in the basis m = s, ..., -s.

    s^x and s^z are real, s^y is purely imaginary.
    """
    two_s = int(round(2 * s))
    if two_s < 0 or abs(two_s - 2 * s) > 1e-12:
        raise ModelError(f"spin must be a non-negative half-integer, got {s}")
    m = s - np.arange(two_s + 1)
    # <m+1| s^+ |m> = sqrt(s(s+1) - m(m+1))
    sp = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def time_reversal_matrix(s):
    """Real matrix I = exp(i pi s^y), global sign fixed so that I[1, 0] > 0."""
    _, sy, _ = spin_matrices(s)
    tri = expm(1j * np.pi * sy)
    tri = np.real_if_close(tri, tol=1e6).real
    tri[np.abs(tri) < 1e-14] = 0.0
    if tri.shape[0] > 1 and tri[1, 0] < 0:
        tri = -tri
    return tri


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TightBindingModel:
    """Immutable description of a periodic Hamiltonian.

    Parameters
    ----------
    T1, T2, T3 : (L, L) array_like
        Hopping matrices in directions 1, 2 and along S_1^* S_2.
    V_cells : sequence of (L, L) array_like
        On-site terms, one per cell of the period ``p`` in direction 2.
    R, r : int
        Orbital count and spin dimension, ``L = R * r``.
    spin_z : (L, L) array_like, optional
        The operator 1_R (x) s^z.
    tri_matrix : (L, L) array_like, optional
        Real matrix I implementing time reversal as I^* conj(.) I.
    cell_phases : sequence of float, optional
        Phase offset added to k1 in the direction-1 hopping of each cell.
    """

    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    V_cells: tuple
    R: int = 1
    r: int = 1
    spin_z: np.ndarray = None
    tri_matrix: np.ndarray = None
    cell_phases: tuple = None
    name: str = field(default="raw", compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        if self.R < 1 or self.r < 1:
            raise ModelError("R and r must be positive")
        L = self.R * self.r
        for key in ("T1", "T2", "T3"):
            m = _frozen(getattr(self, key))
            if m.shape != (L, L):
                raise ModelError(f"{key} has shape {m.shape}, expected {(L, L)}")
            set_(key, m)
        cells = self.V_cells
        if isinstance(cells, np.ndarray) and cells.ndim == 2:
            cells = [cells]
        cells = tuple(_frozen(v) for v in cells)
        if not cells:
            raise ModelError("V_cells must contain at least one matrix")
        for c, v in enumerate(cells):
            if v.shape != (L, L):
                raise ModelError(f"V_cells[{c}] has shape {v.shape}, expected {(L, L)}")
            if np.abs(v - v.conj().T).max() > HERMITIAN_TOL:
                raise ModelError(f"V_cells[{c}] is not Hermitian")
        set_("V_cells", cells)
        phases = self.cell_phases
        if phases is None:
            phases = (0.0,) * len(cells)
        phases = tuple(float(x) for x in phases)
        if len(phases) != len(cells):
            raise ModelError("cell_phases must have one entry per cell")
        set_("cell_phases", phases)
        if self.spin_z is not None:
            sz = _frozen(self.spin_z)
            if sz.shape != (L, L) or np.abs(sz - sz.conj().T).max() > HERMITIAN_TOL:
                raise ModelError("spin_z must be a Hermitian L x L matrix")
            want = np.repeat(np.arange(self.r) - self.spin, self.R)
            if not np.allclose(np.sort(np.linalg.eigvalsh(sz)), want, atol=1e-10):
                raise ModelError("spin_z eigenvalues must be -s..s, each with multiplicity R")
            set_("spin_z", sz)
        if self.tri_matrix is not None:
            tri = np.asarray(self.tri_matrix)
            if np.iscomplexobj(tri):
                if np.abs(tri.imag).max() > HERMITIAN_TOL:
                    raise ModelError("tri_matrix must be real")
                tri = tri.real
            tri = _frozen(tri, float)
            sign = (-1) ** (self.r - 1)
            if tri.shape != (L, L) or np.abs(tri @ tri - sign * np.eye(L)).max() > 1e-10:
                raise ModelError("tri_matrix must satisfy I I = (-1)^{2s}")
            set_("tri_matrix", tri)
        set_("params", dict(self.params))

    @property
    def L(self):
        return self.R * self.r

    @property
    def p(self):
        return len(self.V_cells)

    @property
    def spin(self):
        return (self.r - 1) / 2

    @property
    def V(self):
        """On-site term of a unit-period model."""
        if self.p != 1:
            raise ModelError("model has several cells; use V_cells")
        return self.V_cells[0]

    @property
    def odd_tri(self):
        """True when the model declares odd (I I = -1) time reversal."""
        return self.tri_matrix is not None and self.r % 2 == 0

    def conserves_spin(self, tol=1e-12):
        """Whether every coefficient matrix commutes with ``spin_z``."""
        if self.spin_z is None:
            return False
        mats = (self.T1, self.T2, self.T3) + self.V_cells
        return all(np.abs(m @ self.spin_z - self.spin_z @ m).max() <= tol for m in mats)

    def replace(self, **changes):
        """Copy with some fields replaced."""
        kw = {k: getattr(self, k) for k in (
            "T1", "T2", "T3", "V_cells", "R", "r", "spin_z", "tri_matrix",
            "cell_phases", "name", "params")}
        kw.update(changes)
        return TightBindingModel(**kw)


@dataclass(frozen=True)
class ModelDiagnostics:
    a2_invertible_everywhere: bool
    a2_singular_points: tuple
    flat_band_energies: tuple


def fiber_blocks(model, k1, cell_index=0):
    """Fiber blocks A2(k1) = T2 + e^{ik1} T3 and B2(k1) of one cell.

    B2(k1) = e^{i(k1+phi_c)} T1^* + e^{-i(k1+phi_c)} T1 + V_c with the cell
    phase phi_c (zero unless the model carries a magnetic flux).
    """
    if not 0 <= cell_index < model.p:
        raise IndexError(f"cell_index {cell_index} outside [0, {model.p})")
    a = model.T2 + np.exp(1j * k1) * model.T3
    z = np.exp(1j * (k1 + model.cell_phases[cell_index]))
    b = z * model.T1.conj().T + model.T1 / z + model.V_cells[cell_index]
    b = (b + b.conj().T) / 2
    return a, b


# ---------------------------------------------------------------- builders

def build_square_laplacian(t):
    """Discrete Laplacian on Z^2 with hopping ``t``: T1 = T2 = t."""
    if t == 0:
        raise ModelError("t = 0 makes A2 singular")
    one = np.array([[t]], dtype=complex)
    zero = np.zeros((1, 1), complex)
    return TightBindingModel(one, one, zero, (zero,), name="square_laplacian",
                             params={"t": t})


def build_spin_orbit_square(t, lambda_so):
    """Square-lattice Laplacian with spin-1/2 orbit coupling.

    T1 = t - 2i lambda_so s^x and T2 = t - 2i lambda_so s^y, so that
    H(k) = 2t(cos k1 + cos k2) + 4 lambda_so (sin k1 s^x + sin k2 s^y).
    """
    sx, sy, sz = spin_matrices(0.5)
    one = np.eye(2)
    T1 = t * one - 2j * lambda_so * sx
    T2 = t * one - 2j * lambda_so * sy
    if abs(np.linalg.det(T2)) < 1e-12:
        raise ModelError(f"A2 = T2 is singular for t={t}, lambda_so={lambda_so}")
    zero = np.zeros((2, 2), complex)
    return TightBindingModel(T1, T2, zero, (zero,), R=1, r=2, spin_z=sz,
                             tri_matrix=time_reversal_matrix(0.5),
                             name="spin_orbit_square",
                             params={"t": t, "lambda_so": lambda_so})


def build_harper(q, p, t=1.0):
    """Harper model with flux phi = 2 pi q / p per plaquette (Landau gauge).

    The flux is reduced to lowest terms; cell ``n`` of the period gets
    B_{2,n}(k1) = 2t cos(k1 + n phi) and T2 = t.
    """
    if p == 0:
        raise ModelError("p must be a positive integer")
    if p < 0:
        q, p = -q, -p
    g = gcd(int(q), int(p)) or 1
    q, p = int(q) // g, int(p) // g
    if t == 0:
        raise ModelError("t = 0 makes A2 singular")
    phi = 2 * np.pi * q / p
    one = np.array([[t]], dtype=complex)
    zero = np.zeros((1, 1), complex)
    return TightBindingModel(one, one, zero, (zero,) * p,
                             cell_phases=tuple(n * phi for n in range(p)),
                             name="harper", params={"q": q, "p": p, "t": t})


def build_triangular(t1, t2, t3):
    """Triangular lattice deformed onto Z^2: T_i = t_i, V = 0."""
    if t2 == 0 and t3 == 0:
        raise ModelError("t2 = t3 = 0 makes A2 vanish identically")
    if abs(abs(t2) - abs(t3)) < 1e-14:
        warnings.warn("|t2| = |t3|: A2(k1) = t2 + e^{ik1} t3 vanishes at one k1",
                      ModelWarning, stacklevel=2)
    m = lambda x: np.array([[x]], dtype=complex)
    return TightBindingModel(m(t1), m(t2), m(t3), (m(0),), name="triangular",
                             params={"t1": t1, "t2": t2, "t3": t3})


def build_honeycomb(t1, t2, t3):
    """Honeycomb lattice as a decorated square lattice (zig-zag direction 1).

    A2 = T2 has rank one, so no transfer matrices exist; this is reported by
    :func:`diagnose`, not raised.
    """
    T1 = np.array([[0, t1], [0, 0]], complex)
    T2 = np.array([[0, t2], [0, 0]], complex)
    V = np.array([[0, t3], [t3, 0]], complex)
    return TightBindingModel(T1, T2, np.zeros((2, 2)), (V,), R=2, r=1,
                             name="honeycomb", params={"t1": t1, "t2": t2, "t3": t3})


def build_kane_mele(t, tp=(1.0, 1.0, 1.0), tpp=(1.0, 1.0, 1.0), lambda_so=1.0,
                    lambda_r=0.0, lambda_st=0.0):
    """Kane-Mele model on the honeycomb lattice, basis sublattice (x) spin.

    Nearest-neighbour hopping ``t`` on all three bonds, next-nearest spin-orbit
    coupling ``lambda_so`` with bond weights ``tp``, staggered potential
    ``lambda_st`` and Rashba coupling ``lambda_r`` with bond weights ``tpp``.
    """
    if lambda_so == 0:
        raise ModelError("lambda_so = 0 makes A2 singular for every k1")
    tp = tuple(float(x) for x in tp)
    tpp = tuple(float(x) for x in tpp)
    if len(tp) != 3 or len(tpp) != 3:
        raise ModelError("tp and tpp must be triples")
    sx, sy, sz = spin_matrices(0.5)
    one = np.eye(2)
    zero = np.zeros((2, 2))
    so = lambda j: 2j * lambda_so * tp[j] * sz
    rashba = (1j * lambda_r * tpp[0] * (sx - np.sqrt(3) * sy),
              1j * lambda_r * tpp[1] * (sx + np.sqrt(3) * sy))
    T1 = np.block([[so(0), t * one + rashba[0]], [zero, -so(0)]])
    T2 = np.block([[so(1), t * one + rashba[1]], [zero, -so(1)]])
    T3 = np.block([[so(2), zero], [zero, -so(2)]])
    vab = t * one - 2j * lambda_r * tpp[2] * sx
    V = np.block([[lambda_st * one, vab], [vab.conj().T, -lambda_st * one]])
    params = {"t": t, "tp": list(tp), "tpp": list(tpp), "lambda_so": lambda_so,
              "lambda_r": lambda_r, "lambda_st": lambda_st}
    return TightBindingModel(T1, T2, T3, (V,), R=2, r=2,
                             spin_z=np.kron(one, sz),
                             tri_matrix=np.kron(one, time_reversal_matrix(0.5)),
                             name="kane_mele", params=params)


BUILDERS = {
    "square_laplacian": build_square_laplacian,
    "spin_orbit_square": build_spin_orbit_square,
    "harper": build_harper,
    "triangular": build_triangular,
    "honeycomb": build_honeycomb,
    "kane_mele": build_kane_mele,
}


# ------------------------------------------------------------- diagnostics

def _det_a2(model, k1):
    return np.linalg.det(model.T2 + np.exp(1j * k1) * model.T3)


def diagnose(model, k1_grid_size=256, tol=1e-10):
    """Check invertibility of A2 along the Brillouin circle and look for flat bands.

    Zeros of |det A2| are located from grid minima refined by a bounded scalar
    minimisation.  Flat bands are energies that are eigenvalues of H(k) at
    every grid node and for which det(H(k1, z) - E) vanishes at more points
    z of the unit circle than its Laurent degree allows.
    """
    if k1_grid_size < 16:
        raise ValueError("k1_grid_size must be at least 16")
    n = k1_grid_size
    ks = -np.pi + 2 * np.pi * np.arange(n) / n
    dets = np.abs([_det_a2(model, k) for k in ks])
    scale = max(1.0, np.linalg.norm(model.T2, 2) + np.linalg.norm(model.T3, 2)) ** model.L
    thresh = tol * scale
    singular = []
    if np.all(dets <= thresh):
        singular = [float(k) for k in ks]
    else:
        h = 2 * np.pi / n
        for i in range(n):
            if dets[i] <= dets[i - 1] and dets[i] <= dets[(i + 1) % n]:
                res = minimize_scalar(lambda k: abs(_det_a2(model, k)),
                                      bounds=(ks[i] - h, ks[i] + h), method="bounded",
                                      options={"xatol": 1e-13})
                if res.fun <= 1e-8 * scale:
                    k = float(np.angle(np.exp(1j * res.x)))
                    if not any(abs(np.angle(np.exp(1j * (k - s)))) < 1e-6 for s in singular):
                        singular.append(k)
        singular.sort()
    return ModelDiagnostics(a2_invertible_everywhere=not singular,
                            a2_singular_points=tuple(singular),
                            flat_band_energies=tuple(_flat_bands(model)))


def _flat_bands(model, n_k=12, tol=1e-10):
    from .bloch import bloch_hamiltonian
    ks = -np.pi + 2 * np.pi * (np.arange(n_k) + 0.37) / n_k
    bands = np.array([[np.linalg.eigvalsh(bloch_hamiltonian(model, (a, b)))
                       for b in ks] for a in ks])
    dim = bands.shape[-1]
    flat = bands.reshape(-1, dim)
    candidates = []
    for j in range(dim):
        col = flat[:, j]
        if col.max() - col.min() < tol:
            E = float(col.mean())
            if not any(abs(E - c) < 1e-8 for c in candidates):
                candidates.append(E)
    out = []
    zs = np.exp(2j * np.pi * (np.arange(2 * dim + 1) + 0.21) / (2 * dim + 1))
    for E in candidates:
        ok = True
        for k1 in ks[::3]:
            for z in zs:
                h = bloch_hamiltonian(model, (k1, np.angle(z)))
                if abs(np.linalg.det(h - E * np.eye(dim))) > 1e-8:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(E)
    return out


def spin_sectors(model, tol=1e-12):
    """Split an s^z-conserving model into its spin sectors.

    Returns a list of ``(l, sub_model)`` ordered l = -s, ..., s, where each
    sub-model acts on the R-dimensional eigenspace of spin_z with eigenvalue l.
    """
    if not model.conserves_spin(tol):
        raise ModelError("model does not commute with spin_z; use the Z2 crossing route")
    w, v = np.linalg.eigh(model.spin_z)
    out = []
    for j in range(model.r):
        l = j - model.spin
        q = v[:, np.abs(w - l) < 1e-8]
        proj = lambda m: q.conj().T @ m @ q
        sub = TightBindingModel(proj(model.T1), proj(model.T2), proj(model.T3),
                                tuple(proj(v_) for v_ in model.V_cells), R=model.R, r=1,
                                cell_phases=model.cell_phases,
                                name=f"{model.name}[s_z={l:+g}]", params=model.params)
        out.append((l, sub))
    return out



def spin_homotopy(model, lam):
    """H(lam) = H + (lam/2)(sigma H sigma - H) with sigma = s^z / s, spin 1/2 only.

    At lam = 1 only the s^z-diagonal part of every hopping and potential term
    survives, so the result conserves spin.
    """
    if model.spin_z is None or model.r != 2:
        raise ModelError("spin homotopy needs a spin-1/2 model with spin_z")
    sig = 2 * model.spin_z
    f = lambda m: m + 0.5 * lam * (sig @ m @ sig - m)
    return model.replace(T1=f(model.T1), T2=f(model.T2), T3=f(model.T3),
                         V_cells=tuple(f(v) for v in model.V_cells),
                         params=dict(model.params, homotopy=float(lam)))

# -------------------------------------------------------------------- JSON

def _mat_to_json(m):
    m = np.asarray(m, complex)
    return [[float(x.real), float(x.imag)] for x in m.ravel()]


def _mat_from_json(data, L):
    arr = np.asarray(data, float)
    if arr.shape[-1] != 2:
        raise ModelError("matrix entries must be [re, im] pairs")
    arr = arr[..., 0] + 1j * arr[..., 1]
    if arr.size != L * L:
        raise ModelError(f"matrix has {arr.size} entries, expected {L * L}")
    return arr.reshape(L, L)


def model_from_dict(doc):
    """Build a model from a builder spec or from raw matrices."""
    if "builder" in doc:
        name = doc["builder"]
        if name not in BUILDERS:
            raise ModelError(f"unknown builder {name!r}; choose from {sorted(BUILDERS)}")
        params = dict(doc.get("params", {}))
        try:
            return BUILDERS[name](**params)
        except TypeError as exc:
            raise ModelError(f"bad parameters for {name}: {exc}") from None
    try:
        L = int(doc["L"])
        R = int(doc.get("R", L // int(doc.get("r", 1))))
        r = int(doc.get("r", 1))
        if R * r != L:
            raise ModelError("L must equal R * r")
        mats = {k: _mat_from_json(doc[k], L) if k in doc else np.zeros((L, L))
                for k in ("T1", "T2", "T3")}
        if "V_cells" in doc:
            cells = [_mat_from_json(v, L) for v in doc["V_cells"]]
        else:
            cells = [_mat_from_json(doc["V"], L) if "V" in doc else np.zeros((L, L))]
        opt = lambda k: _mat_from_json(doc[k], L) if doc.get(k) is not None else None
        return TightBindingModel(mats["T1"], mats["T2"], mats["T3"], tuple(cells), R=R, r=r,
                                 spin_z=opt("spin_z"), tri_matrix=opt("tri_matrix"),
                                 cell_phases=doc.get("cell_phases"),
                                 name=doc.get("name", "raw"))
    except KeyError as exc:
        raise ModelError(f"raw model is missing field {exc}") from None


def model_to_dict(model):
    """Raw-matrix JSON form of a model (round-trips through model_from_dict)."""
    doc = {"name": model.name, "L": model.L, "R": model.R, "r": model.r,
           "T1": _mat_to_json(model.T1), "T2": _mat_to_json(model.T2),
           "T3": _mat_to_json(model.T3),
           "V_cells": [_mat_to_json(v) for v in model.V_cells],
           "cell_phases": list(model.cell_phases)}
    if model.spin_z is not None:
        doc["spin_z"] = _mat_to_json(model.spin_z)
    if model.tri_matrix is not None:
        doc["tri_matrix"] = _mat_to_json(model.tri_matrix)
    return doc


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
