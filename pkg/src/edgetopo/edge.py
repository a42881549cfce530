"""Edge spectrum and edge invariants from the edge unitary U^E(k1).

Edge states of the Dirichlet half-space at (k1, E) correspond to the
eigenvalue 1 of U^E(k1).  The edge index is the winding number of det U^E
over the Brillouin circle; equivalently the signed count of eigenphase
crossings through 0.  With the stereographic convention of
:mod:`edgetopo.transfer` the eigenphases decrease strictly with E, and a
crossing signature equals the sign of the edge-band slope.
"""

from dataclasses import dataclass, field
import csv
import math
import warnings

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, minimize

from ._util import wrap_phase
from .bloch import bloch_hamiltonian
from .errors import (ConvergenceError, GapClosedError, KramersError, ModelError,
                     NonHyperbolicError, SingularFiberError)
from .model import spin_sectors
from .transfer import edge_unitary, unitary_phases

__all__ = [
    "GapDescriptor",
    "Crossing",
    "EdgeBand",
    "InvariantReport",
    "CurrentReport",
    "bulk_gap",
    "make_gap",
    "validate_gap",
    "edge_bands",
    "edge_energies",
    "edge_index",
    "winding_samples",
    "maslov_crossings",
    "spin_edge_indices",
    "edge_z2_index",
    "edge_current",
    "spin_edge_currents",
    "crossing_slopes",
    "invariant_report",
    "bulk_edge_check",
    "write_edge_bands_csv",
]

MAX_STEP_WINDING = np.pi / 2
MAX_STEP_BRANCH = np.pi / 4
MAX_DOUBLINGS = 12
PHASE_TOL = 1e-7
TANGENT_TOL = 1e-9


@dataclass(frozen=True)
class GapDescriptor:
    """Energy interval [E_minus, E_plus] inside a bulk gap, with a reference energy."""

    E_minus: float
    E_plus: float
    E_ref: float = None
    k1_grid: int = 256

    def __post_init__(self):
        if not self.E_minus < self.E_plus:
            raise ValueError("need E_minus < E_plus")
        if self.E_ref is None:
            object.__setattr__(self, "E_ref", 0.5 * (self.E_minus + self.E_plus))
        if not self.E_minus <= self.E_ref <= self.E_plus:
            raise ValueError("E_ref must lie in [E_minus, E_plus]")
        if self.k1_grid < 4:
            raise ValueError("k1_grid too small")

    @property
    def width(self):
        return self.E_plus - self.E_minus

    def at(self, E):
        """Same gap with another reference energy."""
        return GapDescriptor(self.E_minus, self.E_plus, E, self.k1_grid)


@dataclass(frozen=True)
class Crossing:
    """An eigenphase of U crossing 0 at k1 with signature nu and multiplicity."""

    k1: float
    nu: int
    mult: int = 1


@dataclass(frozen=True)
class EdgeBand:
    band_id: int
    samples: tuple          # ((k1, E), ...)
    degeneracy: tuple       # one entry per sample


@dataclass
class InvariantReport:
    """Edge invariants with the data that produced them."""

    Ei: int
    SEi: list = None
    Ei2: int = None
    winding_data: list = field(default_factory=list)
    crossings: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        total = sum(c.nu * c.mult for c in self.crossings)
        if self.crossings and total != self.Ei:
            raise ConvergenceError(f"winding {self.Ei} != Maslov sum {total}")


@dataclass(frozen=True)
class CurrentReport:
    current: float
    width: float
    ei: int
    deviation: float
    nodes: int


# ------------------------------------------------------------------ gaps

def _band_ranges(model, k1s, n2):
    k2s = -np.pi + 2 * np.pi * (np.arange(n2) + 0.5) / n2
    ranges = []
    for k1 in k1s:
        w = np.linalg.eigvalsh(np.array([bloch_hamiltonian(model, (k1, k2)) for k2 in k2s]))
        ranges.append((w.min(axis=0), w.max(axis=0)))
    lo = np.array([r[0] for r in ranges])
    hi = np.array([r[1] for r in ranges])
    return lo, hi


def bulk_gap(model, E, n1=128, n2=64):
    """Bulk gap (lo, hi) of the full-plane model that contains E.

    Band edges are located on an n1 x n2 grid and refined by local
    optimisation.  ``lo`` is -inf (``hi`` is +inf) when E lies below (above)
    the whole spectrum.

    Raises
    ------
    GapClosedError
        If E lies inside a band.
    """
    k1s = -np.pi + 2 * np.pi * (np.arange(n1) + 0.5) / n1
    lo_b, hi_b = _band_ranges(model, k1s, n2)
    inside = (lo_b <= E) & (hi_b >= E)
    if inside.any():
        i = int(np.argwhere(inside)[0][0])
        raise GapClosedError(f"E={E} lies in the bulk spectrum (k1={k1s[i]:.6g})")
    below = hi_b < E
    above = lo_b > E

    def refine(sign, n):
        # extremum of band n (max if sign=+1)
        f = lambda k: -sign * np.linalg.eigvalsh(bloch_hamiltonian(model, k))[n]
        k2s = -np.pi + 2 * np.pi * (np.arange(n2) + 0.5) / n2
        grid = [(f((a, b)), (a, b)) for a in k1s[:: max(1, n1 // 32)]
                for b in k2s[:: max(1, n2 // 16)]]
        best = min(grid)[1]
        res = minimize(f, best, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        return -sign * min(res.fun, min(grid)[0])

    lo = -np.inf
    if below.any():
        n = int(np.argwhere(below.any(axis=0)).max())
        lo = max(float(hi_b[:, n].max()), refine(+1, n))
    hi = np.inf
    if above.any():
        n = int(np.argwhere(above.any(axis=0)).min())
        hi = min(float(lo_b[:, n].min()), refine(-1, n))
    if not lo < E < hi:
        raise GapClosedError(f"E={E} is at a band edge", gap=0.0)
    return float(lo), float(hi)


def make_gap(model, E_ref, k1_grid=256, margin=0.02, window=None):
    """GapDescriptor around E_ref spanning most of the bulk gap containing it."""
    if window is not None:
        return GapDescriptor(float(window[0]), float(window[1]), float(E_ref), k1_grid)
    lo, hi = bulk_gap(model, E_ref)
    if not np.isfinite(lo):
        lo = E_ref - max(1.0, hi - E_ref if np.isfinite(hi) else 1.0)
    if not np.isfinite(hi):
        hi = E_ref + max(1.0, E_ref - lo)
    w = hi - lo
    lo_, hi_ = lo + margin * w, hi - margin * w
    return GapDescriptor(float(min(lo_, E_ref)), float(max(hi_, E_ref)), float(E_ref), k1_grid)


def validate_gap(model, gap, n2=64):
    """Raise GapClosedError if sampled bulk bands enter [E_minus, E_plus]."""
    k1s = -np.pi + 2 * np.pi * np.arange(gap.k1_grid) / gap.k1_grid
    lo_b, hi_b = _band_ranges(model, k1s, n2)
    hit = (hi_b >= gap.E_minus) & (lo_b <= gap.E_plus)
    if hit.any():
        i = int(np.argwhere(hit)[0][0])
        raise GapClosedError(f"gap descriptor invalid: bulk band meets "
                             f"[{gap.E_minus}, {gap.E_plus}] at k1={k1s[i]:.6g}")


# ------------------------------------------------------ sampling helpers

def _unitary(model, E, k1, eps):
    """U^E(k1), nudging k1 by eps if A2(k1) is singular there."""
    try:
        return edge_unitary(model, E, k1).u
    except SingularFiberError:
        return edge_unitary(model, E, k1 + eps).u


class _Node:
    __slots__ = ("x", "th", "vec")

    def __init__(self, x, u):
        self.x = x
        self.th, self.vec = unitary_phases(u)


def _match(na, nb):
    ov = np.abs(na.vec.conj().T @ nb.vec) ** 2
    _, perm = linear_sum_assignment(-ov)
    return perm, wrap_phase(nb.th[perm] - na.th)


def _trace(f, xs, max_step=MAX_STEP_BRANCH, max_doublings=MAX_DOUBLINGS):
    """Follow eigenphase branches of x -> f(x) (unitary) over the sorted nodes xs.

    Returns a list of (node_a, node_b, delta) where delta[j] is the phase step
    of branch j (indexed at node_a).  Intervals are bisected until every step
    is below ``max_step``.
    """
    nodes = [_Node(x, f(x)) for x in xs]
    out = []
    for na, nb in zip(nodes[:-1], nodes[1:]):
        stack = [(na, nb, 0)]
        while stack:
            a, b, depth = stack.pop()
            _, delta = _match(a, b)
            if np.abs(delta).max() >= max_step:
                if depth >= max_doublings:
                    raise ConvergenceError(
                        f"eigenphase step {np.abs(delta).max():.3g} at x={a.x:.12g} "
                        f"after {max_doublings} doublings")
                m = _Node(0.5 * (a.x + b.x), f(0.5 * (a.x + b.x)))
                stack.append((m, b, depth + 1))
                stack.append((a, m, depth + 1))
                continue
            out.append((a, b, delta))
    return out


def _branch_value(f, xa, xb, ta, tb):
    """Continuous phase of the branch running from ta at xa to tb at xb."""
    def g(x):
        if x == xa:
            return ta
        if x == xb:
            return tb
        tl = ta + (tb - ta) * (x - xa) / (xb - xa)
        d = wrap_phase(unitary_phases(f(x))[0] - tl)
        return tl + d[np.argmin(np.abs(d))]
    return g


def _zero_crossings(f, intervals, xtol=1e-14):
    """Roots of branch phases within traced intervals: list of (x, sign, slope)."""
    found = []
    for a, b, delta in intervals:
        for j in range(len(delta)):
            ta = a.th[j]
            tb = ta + delta[j]
            if ta < 0 <= tb:
                sign = 1
            elif tb < 0 <= ta:
                sign = -1
            else:
                continue
            g = _branch_value(f, a.x, b.x, ta, tb)
            if tb == 0:
                x0 = b.x
            else:
                x0 = brentq(g, a.x, b.x, xtol=xtol, rtol=8.9e-16)
            h = min(1e-6, 0.25 * (b.x - a.x))
            lo, hi = max(a.x, x0 - h), min(b.x, x0 + h)
            slope = (g(hi) - g(lo)) / (hi - lo) if hi > lo else np.nan
            found.append((x0, sign, slope))
    found.sort(key=lambda t: t[0])
    return found


def _group(found, tol=1e-7):
    """Merge coincident crossings of equal sign into multiplicities."""
    out = []
    for x, s, _ in found:
        if out and abs(x - out[-1][0]) < tol and out[-1][1] == s:
            out[-1][2] += 1
        else:
            out.append([x, s, 1])
    return [Crossing(float(x), int(s), int(m)) for x, s, m in out]


def _nodes(window, n_per_circle):
    w0, w1 = window
    n = max(8, int(math.ceil(n_per_circle * (w1 - w0) / (2 * np.pi))))
    return np.linspace(w0, w1, n + 1), (w1 - w0) / n


# ------------------------------------------------------------ invariants

def winding_samples(model, E, n=256):
    """Adaptively refined samples (k1, det U^E(k1)) over [-pi, pi] and the winding.

    Every phase increment between consecutive samples is below pi/2.
    """
    ks, h = _nodes((-np.pi, np.pi), n)
    eps = 0.5 * h * 1e-3
    det = lambda k: np.linalg.det(_unitary(model, E, k, eps))
    pts = [(float(k), det(k)) for k in ks]
    out = [pts[0]]
    total = 0.0
    for (ka, da), (kb, db) in zip(pts[:-1], pts[1:]):
        stack = [(ka, da, kb, db, 0)]
        while stack:
            xa, ya, xb, yb, depth = stack.pop()
            inc = np.angle(yb / ya)
            if abs(inc) >= MAX_STEP_WINDING:
                if depth >= MAX_DOUBLINGS:
                    raise ConvergenceError(f"det U winding does not resolve near k1={xa:.12g}")
                xm = 0.5 * (xa + xb)
                ym = det(xm)
                stack.append((xm, ym, xb, yb, depth + 1))
                stack.append((xa, ya, xm, ym, depth + 1))
                continue
            total += inc
            out.append((xb, yb))
    return out, total / (2 * np.pi)


def edge_index(model, gap, E=None, return_samples=False):
    """Winding number of k1 -> det U^E(k1) at E = gap.E_ref (or ``E``)."""
    E = gap.E_ref if E is None else E
    samples, w = winding_samples(model, E, gap.k1_grid)
    ei = int(round(w))
    if abs(w - ei) > 1e-6:
        raise ConvergenceError(f"winding {w} is not an integer")
    if return_samples:
        return ei, [(k, float(np.angle(d))) for k, d in samples]
    return ei


def _crossings_raw(model, E, window, n):
    ks, h = _nodes(window, n)
    eps = 0.5 * h * 1e-3
    f = lambda k: _unitary(model, E, k, eps)
    return _zero_crossings(f, _trace(f, ks))


def maslov_crossings(model, gap, k1_window=(-np.pi, np.pi), E=None, _perturb=0):
    """Signed crossings of eigenphases of U^E(k1) through 0 for k1 in the window.

    A tangential crossing (|d theta / d k1| < 1e-9) triggers a retry with the
    reference energy moved by 1e-6 of the gap width.
    """
    E = gap.E_ref if E is None else E
    found = _crossings_raw(model, E, k1_window, gap.k1_grid)
    if any(abs(s) < TANGENT_TOL for _, _, s in found):
        if _perturb >= 3:
            raise ConvergenceError(f"tangential crossing persists near E={E}")
        shift = 1e-6 * gap.width * (1 if _perturb % 2 == 0 else -1) * (_perturb + 1)
        return maslov_crossings(model, gap, k1_window, E + shift, _perturb + 1)
    return _group(found)


def crossing_slopes(model, gap, E=None, h=1e-6):
    """At each crossing: (k1, d theta/d k1, d E_edge/d k1, d theta/d E).

    d E_edge / d k1 is obtained independently by locating the edge energy at
    k1 +- h; the other two are finite differences of the branch phase.
    """
    E = gap.E_ref if E is None else E
    eps = 1e-9
    out = []
    for c in maslov_crossings(model, gap, E=E):
        if c.mult != 1:
            continue
        k = c.k1

        def theta(kk, EE):
            th = unitary_phases(_unitary(model, EE, kk, eps))[0]
            return th[np.argmin(np.abs(th))]

        dth_dk = (theta(k + h, E) - theta(k - h, E)) / (2 * h)
        dth_dE = (theta(k, E + h) - theta(k, E - h)) / (2 * h)
        span = 0.25 * min(E - gap.E_minus, gap.E_plus - E) if gap.E_minus < E < gap.E_plus else 0.01
        e_edge = lambda kk: brentq(lambda EE: theta(kk, EE), E - span, E + span, xtol=1e-15)
        try:
            dE_dk = (e_edge(k + h) - e_edge(k - h)) / (2 * h)
        except ValueError:
            dE_dk = np.nan
        out.append((k, dth_dk, dE_dk, dth_dE))
    return out


def spin_edge_indices(model, gap):
    """Edge indices SEi_l of the spin sectors, ordered l = -s..s.

    Raises
    ------
    ModelError
        If the model does not commute with spin_z.
    """
    return [edge_index(sub, gap) for _, sub in spin_sectors(model)]


def _endpoint_multiplicity(model, E, k1, eps):
    th = unitary_phases(_unitary(model, E, k1, eps))[0]
    return int(np.sum(np.abs(th) < PHASE_TOL))


def edge_z2_index(model, gap, E=None, return_report=False):
    """Edge Z2 index: crossings of eigenphases with 0 over k1 in [0, pi], mod 2.

    Interior crossings count with multiplicity, the time-reversal invariant
    endpoints with half their (even) multiplicity.  For s^z-conserving models
    the result is checked against the winding of det U of the spin-up sector.
    """
    if not model.odd_tri:
        raise ModelError("edge Z2 index needs odd time-reversal symmetry")
    E = gap.E_ref if E is None else E
    for attempt in range(4):
        found = _crossings_raw(model, E, (0.0, np.pi), gap.k1_grid)
        if not any(abs(s) < TANGENT_TOL for x, _, s in found if 1e-9 < x < np.pi - 1e-9):
            break
        E += 1e-6 * gap.width * (attempt + 1) * (-1) ** attempt
    else:
        raise ConvergenceError("tangential crossing persists")
    interior = [t for t in found if 1e-9 < t[0] < np.pi - 1e-9]
    ends = []
    for k in (0.0, np.pi):
        m = _endpoint_multiplicity(model, E, k, 1e-9)
        if m % 2:
            raise KramersError(f"odd multiplicity {m} of eigenvalue 1 at k1={k}")
        ends.append(m)
    total = len(interior) + sum(ends) // 2
    z2 = total % 2
    if model.conserves_spin():
        sectors = spin_sectors(model)
        up = [sub for l, sub in sectors if l > 0]
        w = sum(edge_index(sub, gap, E=E) for sub in up) % 2
        if w != z2:
            raise ConvergenceError(f"Z2 crossing count {z2} disagrees with spin winding {w}")
    if return_report:
        crossings = _group(interior)
        return z2, {"crossings": crossings, "endpoint_multiplicity": ends, "E": E}
    return z2


# ------------------------------------------------------------ edge bands

def edge_energies(model, k1, E_lo, E_hi, n_E=16, xtol=1e-13):
    """Energies in [E_lo, E_hi] where U^E(k1) has eigenvalue 1, with degeneracy.

    Eigenphase branches are followed in E and each zero is bracketed and
    refined with Brent's method.

    Raises
    ------
    GapClosedError
        If the window reaches the bulk spectrum at this k1.
    """
    def f(E):
        try:
            return _unitary(model, E, k1, 1e-9)
        except NonHyperbolicError as exc:
            raise GapClosedError(f"gap descriptor invalid: E={E} in spectrum at k1={k1}") from exc

    Es = np.linspace(E_lo, E_hi, n_E + 1)
    found = _zero_crossings(f, _trace(f, Es), xtol=xtol)
    out = []
    for E, _, _ in found:
        if out and abs(E - out[-1][0]) < 1e-9:
            continue
        th = unitary_phases(f(E))[0]
        deg = max(1, int(np.sum(np.abs(th) < PHASE_TOL)))
        twins = sum(1 for e, _, _ in found if abs(e - E) < 1e-9)
        out.append((float(E), max(deg, twins)))
    return out


def _link(points_a, points_b, max_jump):
    if not points_a or not points_b:
        return {}
    cost = np.abs(np.subtract.outer([p[0] for p in points_a], [p[0] for p in points_b]))
    rows, cols = linear_sum_assignment(cost)
    return {int(r): int(c) for r, c in zip(rows, cols) if cost[r, c] <= max_jump}


def edge_bands(model, gap, E_resolution=1e-12, workers=None):
    """Edge bands E_n(k1) inside the gap window, sampled on the k1 grid.

    Samples at consecutive k1 nodes are connected by nearest-energy matching.
    """
    from ._util import parallel_map

    ks = -np.pi + 2 * np.pi * np.arange(gap.k1_grid) / gap.k1_grid
    per_k = parallel_map(lambda k: edge_energies(model, k, gap.E_minus, gap.E_plus,
                                                 xtol=E_resolution), ks, workers)
    max_jump = 0.25 * gap.width
    bands = []          # list of [samples, degeneracies]
    current = {}        # index in per_k[i] -> band index
    for i, pts in enumerate(per_k):
        link = _link(per_k[i - 1], pts, max_jump) if i else {}
        nxt = {}
        for j, (E, deg) in enumerate(pts):
            prev = [a for a, b in link.items() if b == j]
            if prev and prev[0] in current:
                bid = current[prev[0]]
            else:
                bid = len(bands)
                bands.append([[], []])
            bands[bid][0].append((float(ks[i]), E))
            bands[bid][1].append(deg)
            nxt[j] = bid
        current = nxt
    return [EdgeBand(n, tuple(s), tuple(d)) for n, (s, d) in enumerate(bands)]


def write_edge_bands_csv(bands, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k1", "E", "band_id", "degeneracy"])
        rows = sorted((k, E, b.band_id, d) for b in bands
                      for (k, E), d in zip(b.samples, b.degeneracy))
        for k, E, bid, d in rows:
            w.writerow([repr(float(k)), repr(float(E)), bid, d])


# --------------------------------------------------------------- current

def _clip(E, a, b):
    return min(max(E, a), b)


def _interval_current(ea, eb, a, b):
    """Contribution sum_n [clip(E_n(k_b)) - clip(E_n(k_a))] between two nodes.

    Returns None when a sample strictly inside [a, b] has no partner (the
    interval must then be refined).
    """
    mid = 0.5 * (a + b)
    la = [e for e, d in ea for _ in range(d)]
    lb = [e for e, d in eb for _ in range(d)]
    total = 0.0
    if la and lb:
        cost = np.abs(np.subtract.outer(la, lb))
        rows, cols = linear_sum_assignment(cost)
    else:
        rows, cols = np.array([], int), np.array([], int)
    used_a, used_b = set(rows.tolist()), set(cols.tolist())
    for r, c in zip(rows, cols):
        total += _clip(lb[c], a, b) - _clip(la[r], a, b)
    for i, e in enumerate(la):
        if i not in used_a:
            if a < e < b:
                return None
            total += (b if e > mid else a) - _clip(e, a, b)
    for j, e in enumerate(lb):
        if j not in used_b:
            if a < e < b:
                return None
            total += _clip(e, a, b) - (b if e > mid else a)
    return total


def edge_current(model, interval, n_k1=256, ei=None, max_doublings=10):
    """Edge current sum_n int dk1 chi_[a,b](E_n(k1)) dE_n/dk1 from traced edge bands.

    Edge energies are located in a window widened by a margin inside the bulk
    gap; between consecutive k1 nodes the contribution is the change of the
    clipped energies, which is exact for monotone pieces.

    Returns a CurrentReport with the deviation |current/(b-a) - Ei|.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("need a < b")
    lo, hi = bulk_gap(model, 0.5 * (a + b))
    if not (lo < a and b < hi):
        raise GapClosedError(f"[{a}, {b}] is not inside the bulk gap ({lo}, {hi})")
    m = 0.5 * (b - a)
    if np.isfinite(lo):
        m = min(m, 0.45 * (a - lo))
    if np.isfinite(hi):
        m = min(m, 0.45 * (hi - b))
    wlo, whi = a - m, b + m
    ks = -np.pi + 2 * np.pi * np.arange(n_k1 + 1) / n_k1
    energies = {}

    def at(k):
        key = float(k)
        if key not in energies:
            energies[key] = edge_energies(model, k, wlo, whi)
        return energies[key]

    total = 0.0
    clipped = False
    for ka, kb in zip(ks[:-1], ks[1:]):
        stack = [(ka, kb, 0)]
        while stack:
            xa, xb, depth = stack.pop()
            c = _interval_current(at(xa), at(xb), a, b)
            if c is None:
                if depth < max_doublings:
                    xm = 0.5 * (xa + xb)
                    stack.append((xm, xb, depth + 1))
                    stack.append((xa, xm, depth + 1))
                    continue
                clipped = True
                c = 0.0
            total += c
    if clipped:
        warnings.warn("an edge band left the integration window between nodes; "
                      "its contribution was clipped", RuntimeWarning, stacklevel=2)
    if ei is None:
        ei = edge_index(model, GapDescriptor(a, b, 0.5 * (a + b), n_k1))
    width = b - a
    return CurrentReport(float(total), width, int(ei), abs(total / width - ei), len(energies))


def spin_edge_currents(model, interval, n_k1=256):
    """Spin-resolved edge currents (one CurrentReport per s^z sector, l = -s..s)."""
    return [edge_current(sub, interval, n_k1) for _, sub in spin_sectors(model)]


# ------------------------------------------------------------- reports

def invariant_report(model, gap, z2=None, spin=None):
    """Edge index with its crossings; Z2 and spin indices when applicable."""
    ei, samples = edge_index(model, gap, return_samples=True)
    crossings = maslov_crossings(model, gap)
    rep = InvariantReport(Ei=ei, winding_data=samples, crossings=crossings,
                          diagnostics={"E_ref": gap.E_ref, "E_window": [gap.E_minus, gap.E_plus],
                                       "k1_grid": gap.k1_grid, "winding_nodes": len(samples)})
    if spin is None:
        spin = model.spin_z is not None and model.conserves_spin()
    if spin:
        rep.SEi = spin_edge_indices(model, gap)
    if z2 is None:
        z2 = model.odd_tri
    if z2:
        rep.Ei2, extra = edge_z2_index(model, gap, return_report=True)
        rep.diagnostics["z2_crossings"] = [(c.k1, c.nu, c.mult) for c in extra["crossings"]]
        rep.diagnostics["z2_endpoint_multiplicity"] = extra["endpoint_multiplicity"]
    return rep


def bulk_edge_check(model, E_minus, E_plus, n_grid=48, k1_grid=256):
    """Compare bulk invariants of the bands between E_minus and E_plus with edge indices."""
    from .bloch import band_projection, bloch_field, chern_number, chern_z2, spin_chern_numbers

    fld = bloch_field(model, n_grid)
    proj = band_projection(fld, window=(E_minus, E_plus))
    ch = chern_number(proj)
    g_lo = make_gap(model, E_minus, k1_grid)
    g_hi = make_gap(model, E_plus, k1_grid)
    ei_lo, ei_hi = edge_index(model, g_lo), edge_index(model, g_hi)
    rep = {"Ch": ch, "Ei_minus": ei_lo, "Ei_plus": ei_hi,
           "chern_ok": ch == ei_hi - ei_lo, "grid": n_grid, "rank": proj.rank}
    if model.odd_tri:
        ch2 = chern_z2(proj)
        z_lo, z_hi = edge_z2_index(model, g_lo), edge_z2_index(model, g_hi)
        rep.update({"Ch2": ch2, "Ei2_minus": z_lo, "Ei2_plus": z_hi,
                    "z2_ok": ch2 == (z_lo + z_hi) % 2})
    if model.spin_z is not None and model.conserves_spin():
        sch = spin_chern_numbers(proj)
        s_lo, s_hi = spin_edge_indices(model, g_lo), spin_edge_indices(model, g_hi)
        rep.update({"SCh": sch, "SEi_minus": s_lo, "SEi_plus": s_hi,
                    "spin_ok": all(c == h - l for c, h, l in zip(sch, s_hi, s_lo))})
    rep["ok"] = all(v for k, v in rep.items() if k.endswith("_ok"))
    return rep
