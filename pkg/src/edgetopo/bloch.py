"""Bloch bands, band projections and bulk invariants of the full-plane model.

Chern numbers use the gauge-invariant link-variable (lattice field strength)
construction.  With the Fourier convention of :func:`bloch_hamiltonian` the
orientation is fixed so that

    Ch(P) = (i / 2 pi) * int d^2k tr(P [d_1 P, d_2 P]),

which is the normalisation under which Ch(P) = Ei(E+) - Ei(E-) holds for the
edge index computed by :mod:`edgetopo.edge`.
"""

from dataclasses import dataclass
import csv

import numpy as np

from . import kernels
from ._util import parallel_map, periodic_grid
from .errors import ConvergenceError, GapClosedError, ModelError
from .model import fiber_blocks

__all__ = [
    "bloch_hamiltonian",
    "BlochField",
    "bloch_field",
    "BandProjection",
    "band_projection",
    "chern_number",
    "spin_spectrum_clusters",
    "spin_chern_numbers",
    "chern_z2",
    "lifted_spin_z",
    "lifted_tri_matrix",
    "write_bands_csv",
]

GAP_TOL = 1e-8


def bloch_hamiltonian(model, k):
    """Bloch matrix H(k1, k2) of the (magnetic) unit cell.

    For a unit-period model this is sum_i (e^{ik_i} T_i^* + e^{-ik_i} T_i) + V
    with k3 = k2 - k1.  With ``p`` cells in direction 2 it is the pL x pL
    block-tridiagonal supercell matrix with diagonal blocks B2 of each cell,
    couplings A2 between consecutive cells and the wrap-around block
    A2 e^{-ik2} from the last cell to the first.
    """
    k1, k2 = float(k[0]), float(k[1])
    p, L = model.p, model.L
    a = model.T2 + np.exp(1j * k1) * model.T3
    h = np.zeros((p * L, p * L), complex)
    for c in range(p):
        _, b = fiber_blocks(model, k1, c)
        h[c * L:(c + 1) * L, c * L:(c + 1) * L] += b
        if c + 1 < p:
            h[c * L:(c + 1) * L, (c + 1) * L:(c + 2) * L] += a
            h[(c + 1) * L:(c + 2) * L, c * L:(c + 1) * L] += a.conj().T
    h[(p - 1) * L:, :L] += a * np.exp(-1j * k2)
    h[:L, (p - 1) * L:] += a.conj().T * np.exp(1j * k2)
    return (h + h.conj().T) / 2


def lifted_spin_z(model):
    """spin_z acting on the p-cell Bloch space."""
    if model.spin_z is None:
        raise ModelError("model has no spin_z")
    return np.kron(np.eye(model.p), model.spin_z)


def lifted_tri_matrix(model):
    if model.tri_matrix is None:
        raise ModelError("model has no time-reversal structure")
    return np.kron(np.eye(model.p), model.tri_matrix)


@dataclass(frozen=True, eq=False)
class BlochField:
    """Bloch matrices, bands and eigenvectors on a uniform N1 x N2 grid."""

    model: object
    k1: np.ndarray
    k2: np.ndarray
    h_of_k: np.ndarray      # (N1, N2, D, D)
    bands: np.ndarray       # (N1, N2, D), ascending
    vectors: np.ndarray     # (N1, N2, D, D), columns match bands

    @property
    def shape(self):
        return self.bands.shape[:2]


def bloch_field(model, n1, n2=None, workers=None):
    """Diagonalise H(k) on the grid k_i in (-pi, pi] with n1 x n2 nodes."""
    n2 = n1 if n2 is None else n2
    k1s, k2s = periodic_grid(n1), periodic_grid(n2)

    def row(k1):
        hs = np.array([bloch_hamiltonian(model, (k1, k2)) for k2 in k2s])
        w, v = np.linalg.eigh(hs)
        return hs, w, v

    rows = parallel_map(row, k1s, workers)
    hs = np.array([r[0] for r in rows])
    w = np.array([r[1] for r in rows])
    v = np.array([r[2] for r in rows])
    return BlochField(model, k1s, k2s, hs, w, v)


@dataclass(frozen=True, eq=False)
class BandProjection:
    """Frames of a smooth family of projections P(k) on a Bloch grid.

    ``frames[i, j]`` is a D x N matrix with orthonormal columns spanning the
    range of P(k_ij).  ``band_window`` is either a pair of energies or a tuple
    of band indices.
    """

    field: BlochField
    frames: np.ndarray
    band_window: tuple
    min_gap: float
    label: object = None

    @property
    def rank(self):
        return self.frames.shape[-1]

    @property
    def model(self):
        return self.field.model

    def p_of_k(self, i, j):
        f = self.frames[i, j]
        return f @ f.conj().T


def band_projection(field, bands=None, window=None, gap_tol=GAP_TOL):
    """Projection onto selected bands, by index or by an energy window.

    Raises
    ------
    GapClosedError
        If the selected bands come closer than ``gap_tol`` to the others at
        some node, or an energy window contains a varying number of bands.
    """
    if (bands is None) == (window is None):
        raise ValueError("give exactly one of bands or window")
    w = field.bands
    dim = w.shape[-1]
    if window is not None:
        lo, hi = window
        inside = (w > lo) & (w < hi)
        counts = inside.sum(axis=-1)
        if counts.min() != counts.max() or counts.min() == 0:
            i, j = np.unravel_index(np.argmin(counts) if counts.min() == 0
                                    else np.argmax(counts != counts.flat[0]), counts.shape)
            raise GapClosedError(f"window {window} holds a varying number of bands "
                                 f"(node {(i, j)}, k={(field.k1[i], field.k2[j])})",
                                 node=(int(i), int(j)))
        idx = np.flatnonzero(inside[0, 0])
        edge = np.minimum(np.abs(w - lo), np.abs(w - hi)).min()
        if edge < gap_tol:
            raise GapClosedError(f"a band touches the window edge (distance {edge:.3g})",
                                 gap=float(edge))
        sel = tuple(int(x) for x in idx)
        if not np.all(inside[..., list(sel)]):
            raise GapClosedError("window cuts a band on the grid")
        label = (float(lo), float(hi))
    else:
        sel = tuple(sorted(int(b) for b in bands))
        if not sel or sel[0] < 0 or sel[-1] >= dim:
            raise ValueError(f"band indices {bands} out of range for {dim} bands")
        label = sel
    rest = [b for b in range(dim) if b not in sel]
    gap = np.inf
    if rest:
        diff = np.abs(w[..., list(sel)][..., :, None] - w[..., rest][..., None, :])
        per_node = diff.min(axis=(-1, -2))
        gap = float(per_node.min())
        if gap < gap_tol:
            i, j = np.unravel_index(np.argmin(per_node), per_node.shape)
            raise GapClosedError(
                f"gap closes at node {(int(i), int(j))}, k=({field.k1[i]:.6g}, "
                f"{field.k2[j]:.6g}), gap={gap:.3g}", node=(int(i), int(j)), gap=gap)
    frames = np.ascontiguousarray(field.vectors[..., list(sel)])
    return BandProjection(field, frames, label, gap)


def _field_strength(frames):
    return kernels.link_phases(np.ascontiguousarray(frames, dtype=complex))


def chern_number(proj, return_raw=False):
    """Chern number of a band projection by the link-variable method.

    Returns an int (or ``(int, raw_sum)`` when ``return_raw``).  The raw sum is
    an integer up to rounding for any grid on which the gap stays open.
    """
    flux = _field_strength(proj.frames)
    raw = -float(flux.sum()) / (2 * np.pi)
    ch = int(round(raw))
    if abs(raw - ch) > 1e-6:
        raise ConvergenceError(f"lattice Chern sum {raw} is not an integer")
    return (ch, raw) if return_raw else ch


def spin_spectrum_clusters(proj, spin_z=None, delta=0.05):
    """Split P into sub-projections on the 2s+1 spectral clusters of P s^z P.

    Returns a list of BandProjection ordered by cluster (lowest spin first);
    each carries ``label = l`` and ``min_gap`` = smallest inter-cluster gap
    seen on the grid.
    """
    model = proj.model
    if spin_z is None:
        spin_z = lifted_spin_z(model)
    nclust = model.r
    n = proj.rank
    if n < nclust:
        raise GapClosedError(f"rank {n} projection cannot hold {nclust} spin clusters")
    f = proj.frames
    m = np.einsum("ijda,de,ijeb->ijab", f.conj(), spin_z, f)
    w, v = np.linalg.eigh((m + np.swapaxes(m, -1, -2).conj()) / 2)
    gaps = np.diff(w, axis=-1)                       # (N1, N2, n-1)
    if nclust == 1:
        cuts = np.zeros(gaps.shape[:2] + (0,), int)
    else:
        cuts = np.sort(np.argsort(gaps, axis=-1)[..., -(nclust - 1):], axis=-1)
    ref = cuts[0, 0]
    if np.any(cuts != ref):
        i, j = np.argwhere(np.any(cuts != ref, axis=-1))[0]
        raise GapClosedError(f"spin clusters change size at node {(int(i), int(j))}",
                             node=(int(i), int(j)))
    if nclust > 1:
        sel_gaps = np.take_along_axis(gaps, cuts, axis=-1)
    else:
        sel_gaps = np.full(gaps.shape[:2] + (1,), np.inf)
    min_gap = float(sel_gaps.min())
    if min_gap < delta:
        i, j = np.unravel_index(np.argmin(sel_gaps.min(axis=-1)), sel_gaps.shape[:2])
        raise GapClosedError(f"spin clusters merge at node {(int(i), int(j))} "
                             f"(gap {min_gap:.4g} < {delta})", node=(int(i), int(j)),
                             gap=min_gap)
    bounds = [0] + [int(c) + 1 for c in ref] + [n]
    out = []
    for c in range(nclust):
        sub = np.einsum("ijda,ijab->ijdb", f, v[..., bounds[c]:bounds[c + 1]])
        out.append(BandProjection(proj.field, np.ascontiguousarray(sub), proj.band_window,
                                  min_gap, label=c - model.spin))
    return out


def spin_chern_numbers(proj, spin_z=None, delta=0.05):
    """Spin Chern numbers SCh_l = Ch(P_l), l = -s..s, checked to add up to Ch(P)."""
    clusters = spin_spectrum_clusters(proj, spin_z, delta)
    sch = [chern_number(c) for c in clusters]
    total = chern_number(proj)
    if sum(sch) != total:
        raise ConvergenceError(f"spin Chern numbers {sch} do not add up to Ch={total}; "
                               "refine the grid")
    return sch


def chern_z2(proj, flip=False, delta=0.05):
    """Chern Z2 invariant Ch(P_+) mod 2 for an odd time-reversal invariant model.

    ``P_+`` collects the clusters with positive spin; ``flip=True`` swaps the
    lowest positive cluster with its negative partner (another admissible
    splitting, which must give the same answer).
    """
    if not proj.model.odd_tri:
        raise ModelError("Chern Z2 index needs odd time-reversal symmetry")
    clusters = spin_spectrum_clusters(proj, delta=delta)
    chosen = [c for c in clusters if c.label > 0]
    if flip:
        lo = min(c.label for c in chosen)
        chosen = [c for c in chosen if c.label != lo] + \
                 [c for c in clusters if abs(c.label + lo) < 1e-12]
    frames = np.concatenate([c.frames for c in chosen], axis=-1)
    plus = BandProjection(proj.field, frames, proj.band_window, proj.min_gap, label="+")
    return chern_number(plus) % 2


def write_bands_csv(field, path):
    """Write columns k1, k2, E_1..E_D."""
    dim = field.bands.shape[-1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k1", "k2"] + [f"E_{n + 1}" for n in range(dim)])
        for i, k1 in enumerate(field.k1):
            for j, k2 in enumerate(field.k2):
                w.writerow([repr(float(k1)), repr(float(k2))] +
                           [repr(float(e)) for e in field.bands[i, j]])
