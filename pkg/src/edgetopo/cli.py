"""Command-line driver: ``edgetopo <task> --config FILE [--threads N] [--out DIR]``.

Exit codes: 0 success, 1 unreadable or invalid configuration, 2 model
diagnostics failure, 3 numerical non-convergence.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from .bloch import (band_projection, bloch_field, chern_number, chern_z2,
                    spin_chern_numbers, write_bands_csv)
from .edge import (GapDescriptor, bulk_edge_check, edge_bands, edge_energies, edge_index,
                   edge_z2_index, invariant_report, make_gap, write_edge_bands_csv)
from .errors import (ConvergenceError, FrameError, GapClosedError, KramersError, ModelError,
                     NonHyperbolicError, SingularFiberError)
from .halfspace import truncated_spectrum
from .model import build_harper, build_kane_mele, load_model, model_from_dict
from .transfer import edge_unitary

__all__ = ["RunConfig", "ConfigError", "run", "reproduce_figure", "main", "TASKS"]

TASKS = ("bands", "edge-bands", "edge-index", "z2", "chern", "spin-chern", "bulk-edge",
         "oracle", "figure")
FIGURES = ("harper-fig", "kane-mele-fig")

HARPER_FIG = {"q": 3, "p": 7, "t": 1.0}
HARPER_EI = {-2.7: 0, -2.4: -2, -1.9: 3}
KM_FIG = {"t": 1.0, "tp": [1.0, 1.0, 0.9], "tpp": [1.0, 1.0, 1.0], "lambda_r": 0.3,
          "lambda_st": 0.45}
KM_EI2 = {0.89: 0, 1.0: 1}


class ConfigError(ValueError):
    """Configuration file missing, unreadable or inconsistent."""


@dataclass
class RunConfig:
    """Everything a run needs; see the README for the JSON schema."""

    task: str
    model: dict = None
    energy: float = None
    E_window: tuple = None
    E_minus: float = None
    E_plus: float = None
    k1_nodes: int = 256
    k_grid: int = 48
    bands: tuple = None
    window: tuple = None
    E_resolution: float = 1e-12
    cluster_gap: float = 0.05
    oracle_N: int = 200
    oracle_k1: tuple = None
    figure: str = None
    out: str = "."
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; choose from {TASKS}")
        need = {
            "bands": ["model"],
            "edge-bands": ["model"],
            "edge-index": ["model", "energy"],
            "z2": ["model", "energy"],
            "chern": ["model"],
            "spin-chern": ["model"],
            "bulk-edge": ["model", "E_minus", "E_plus"],
            "oracle": ["model"],
            "figure": ["figure"],
        }[self.task]
        for key in need:
            if getattr(self, key) is None:
                raise ConfigError(f"task {self.task} needs field {key!r}")
        if self.task in ("chern", "spin-chern") and self.bands is None and self.window is None:
            raise ConfigError(f"task {self.task} needs 'bands' or 'window'")
        if self.task in ("edge-bands", "oracle") and self.E_window is None and self.energy is None:
            raise ConfigError(f"task {self.task} needs 'E_window' or 'energy'")
        if self.figure is not None and self.figure not in FIGURES:
            raise ConfigError(f"unknown figure {self.figure!r}; choose from {FIGURES}")
        for key in ("E_resolution", "cluster_gap"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"tolerance {key} must be positive")
        for key in ("k1_nodes", "k_grid", "oracle_N", "threads"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"{key} must be positive")
        return self

    @classmethod
    def from_dict(cls, doc, task=None, out=None, threads=None):
        doc = dict(doc)
        known = set(cls.__dataclass_fields__) - {"extra"}
        tol = doc.pop("tolerances", {}) or {}
        kw = {k: doc.pop(k) for k in list(doc) if k in known}
        for k in ("E_resolution", "cluster_gap"):
            if k in tol:
                kw[k] = tol[k]
        if "model_file" in doc:
            kw["model"] = {"file": doc.pop("model_file")}
        if task is not None:
            kw["task"] = task
        if "task" not in kw:
            raise ConfigError("no task given")
        if out is not None:
            kw["out"] = out
        if threads is not None:
            kw["threads"] = threads
        for k in ("E_window", "bands", "window", "oracle_k1"):
            if kw.get(k) is not None:
                kw[k] = tuple(kw[k])
        return cls(extra=doc, **kw).validate()


# ----------------------------------------------------------- JSON output

def _fmt(x):
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        items = sorted((str(k), v) for k, v in x.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_fmt(v)}" for k, v in items) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj):
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    return _fmt(obj) + "\n"


# ------------------------------------------------------------- helpers

def _model(cfg):
    spec = cfg.model
    if isinstance(spec, dict) and "file" in spec:
        return load_model(spec["file"])
    return model_from_dict(spec)


def _gap(model, cfg):
    if cfg.E_window is not None:
        e_ref = cfg.energy if cfg.energy is not None else 0.5 * sum(cfg.E_window)
        return GapDescriptor(float(cfg.E_window[0]), float(cfg.E_window[1]), float(e_ref),
                             cfg.k1_nodes)
    return make_gap(model, float(cfg.energy), cfg.k1_nodes)


def _close(a, b, tol=1e-9):
    return abs(float(a) - float(b)) < tol


def _paper_targets(model, cfg):
    targets = {}
    pr = model.params
    harper = model.name == "harper" and all(_close(pr.get(k, np.nan), v)
                                             for k, v in HARPER_FIG.items())
    if harper and cfg.task == "edge-index":
        for E, ei in HARPER_EI.items():
            if _close(cfg.energy, E):
                targets["Ei"] = ei
    if harper and cfg.task == "chern" and cfg.bands is not None and len(cfg.bands) == 1:
        if cfg.bands[0] in (0, 1):
            targets["Ch"] = (-2, 5)[cfg.bands[0]]
    if model.name == "kane_mele" and cfg.task == "z2" and _close(cfg.energy, 0.0):
        if all(np.allclose(pr.get(k), v) for k, v in KM_FIG.items()):
            for lso, z in KM_EI2.items():
                if _close(pr["lambda_so"], lso):
                    targets["Ei2"] = z
    return targets


def _crossings_json(crossings):
    return [{"k1": c.k1, "nu": c.nu, "mult": c.mult} for c in crossings]


def _write_report(cfg, report, name="report.json"):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w") as fh:
        fh.write(dumps(report))
    return path


# ---------------------------------------------------------------- tasks

def _task_bands(model, cfg):
    fld = bloch_field(model, cfg.k_grid, workers=cfg.threads)
    path = os.path.join(cfg.out, "bands.csv")
    write_bands_csv(fld, path)
    return {"grid": [cfg.k_grid, cfg.k_grid], "files": [os.path.basename(path)],
            "E_min": float(fld.bands.min()), "E_max": float(fld.bands.max())}


def _task_edge_bands(model, cfg):
    gap = _gap(model, cfg)
    bands = edge_bands(model, gap, cfg.E_resolution, workers=cfg.threads)
    path = os.path.join(cfg.out, "edge_bands.csv")
    write_edge_bands_csv(bands, path)
    return {"grid": gap.k1_grid, "E_window": [gap.E_minus, gap.E_plus],
            "n_bands": len(bands), "files": [os.path.basename(path)]}


def _task_edge_index(model, cfg):
    gap = _gap(model, cfg)
    rep = invariant_report(model, gap, z2=False)
    out = {"Ei": rep.Ei, "crossings": _crossings_json(rep.crossings), "grid": gap.k1_grid,
           "E_ref": gap.E_ref, "E_window": [gap.E_minus, gap.E_plus],
           "winding_nodes": rep.diagnostics["winding_nodes"]}
    if rep.SEi is not None:
        out["SEi"] = rep.SEi
    return out


def _task_z2(model, cfg):
    gap = _gap(model, cfg)
    ei2, extra = edge_z2_index(model, gap, return_report=True)
    out = {"Ei2": ei2, "crossings": _crossings_json(extra["crossings"]),
           "endpoint_multiplicity": extra["endpoint_multiplicity"], "grid": gap.k1_grid,
           "E_ref": extra["E"], "Ei": edge_index(model, gap)}
    if model.conserves_spin():
        from .edge import spin_edge_indices
        out["SEi"] = spin_edge_indices(model, gap)
    return out


def _projection(model, cfg):
    fld = bloch_field(model, cfg.k_grid, workers=cfg.threads)
    if cfg.bands is not None:
        return band_projection(fld, bands=cfg.bands)
    return band_projection(fld, window=cfg.window)


def _task_chern(model, cfg):
    proj = _projection(model, cfg)
    out = {"Ch": chern_number(proj), "grid": [cfg.k_grid, cfg.k_grid], "rank": proj.rank,
           "min_gap": proj.min_gap}
    if model.odd_tri:
        out["Ch2"] = chern_z2(proj, delta=cfg.cluster_gap)
    return out


def _task_spin_chern(model, cfg):
    proj = _projection(model, cfg)
    return {"SCh": spin_chern_numbers(proj, delta=cfg.cluster_gap), "Ch": chern_number(proj),
            "grid": [cfg.k_grid, cfg.k_grid]}


def _task_bulk_edge(model, cfg):
    rep = bulk_edge_check(model, float(cfg.E_minus), float(cfg.E_plus), cfg.k_grid,
                          cfg.k1_nodes)
    rep["grid"] = [cfg.k_grid, cfg.k_grid]
    return rep


def _task_oracle(model, cfg):
    gap = _gap(model, cfg)
    ks = cfg.oracle_k1 or tuple(-np.pi + 2 * np.pi * (np.arange(32) + 0.5) / 32)
    rows, worst, mult_ok = [], 0.0, True
    for k in ks:
        ours = edge_energies(model, k, gap.E_minus, gap.E_plus)
        theirs = [s.E for s in truncated_spectrum(model, k, cfg.oracle_N,
                                                  (gap.E_minus, gap.E_plus)) if s.genuine]
        flat = [E for E, d in ours for _ in range(d)]
        ok = len(flat) == len(theirs)
        dev = max((abs(a - b) for a, b in zip(sorted(flat), sorted(theirs))), default=0.0)
        mult_ok &= ok
        worst = max(worst, dev if ok else np.inf)
        rows.append({"k1": float(k), "transfer": flat, "truncated": theirs})
    return {"max_deviation": worst, "multiplicities_agree": bool(mult_ok), "N": cfg.oracle_N,
            "E_window": [gap.E_minus, gap.E_plus], "samples": rows, "grid": len(ks)}


def reproduce_figure(name, out_dir, n=512):
    """Write eigenphase-vs-k1 CSVs (k1, phase_1..phase_L) for a figure parameter set."""
    os.makedirs(out_dir, exist_ok=True)
    if name == "harper-fig":
        model = build_harper(**HARPER_FIG)
        runs = [(f"harper_E{E:+.1f}.csv", model, E) for E in sorted(HARPER_EI)]
    elif name == "kane-mele-fig":
        runs = [(f"kane_mele_lso{lso:.2f}.csv", build_kane_mele(lambda_so=lso, **KM_FIG), 0.0)
                for lso in (0.89, 0.9, 1.0)]
    else:
        raise ConfigError(f"unknown figure {name!r}")
    ks = np.linspace(-np.pi, np.pi, n + 1)
    paths = []
    for fname, model, E in runs:
        path = os.path.join(out_dir, fname)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k1"] + [f"phase_{j + 1}" for j in range(model.L)])
            for k in ks:
                try:
                    ph = edge_unitary(model, E, k).phases()
                except SingularFiberError:
                    ph = edge_unitary(model, E, k + 1e-9).phases()
                w.writerow([format(float(k), ".17g")] + [format(float(x), ".17g") for x in ph])
        paths.append(path)
    return paths


def _task_figure(model, cfg):
    paths = reproduce_figure(cfg.figure, cfg.out)
    return {"figure": cfg.figure, "files": [os.path.basename(p) for p in paths]}


_DISPATCH = {
    "bands": _task_bands, "edge-bands": _task_edge_bands, "edge-index": _task_edge_index,
    "z2": _task_z2, "chern": _task_chern, "spin-chern": _task_spin_chern,
    "bulk-edge": _task_bulk_edge, "oracle": _task_oracle, "figure": _task_figure,
}


def run(cfg):
    """Execute a validated RunConfig; returns (exit_code, report dict)."""
    os.makedirs(cfg.out, exist_ok=True)
    report = {"task": cfg.task,
              "provenance": {"version": __version__, "backend": kernels.BACKEND,
                             "k1_nodes": cfg.k1_nodes, "k_grid": cfg.k_grid,
                             "E_resolution": cfg.E_resolution, "cluster_gap": cfg.cluster_gap}}
    try:
        model = _model(cfg) if cfg.model is not None else None
        if model is not None:
            report["model"] = {"name": model.name, "params": model.params, "L": model.L,
                               "p": model.p}
        report.update(_DISPATCH[cfg.task](model, cfg))
        if model is not None:
            targets = _paper_targets(model, cfg)
            if targets:
                report["paper_targets"] = targets
        code = 0
    except (ModelError, SingularFiberError) as exc:
        report["error"] = {"kind": "model", "message": str(exc)}
        code = 2
    except (ConvergenceError, GapClosedError, NonHyperbolicError, KramersError,
            FrameError) as exc:
        report["error"] = {"kind": "numerical", "message": str(exc)}
        code = 3
    report["exit_code"] = code
    _write_report(cfg, report)
    return code, report


def build_parser():
    ap = argparse.ArgumentParser(prog="edgetopo", description=__doc__.splitlines()[0])
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--threads", type=int, default=None, help="worker threads")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--figure", choices=FIGURES, help="figure name for the figure task")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"edgetopo: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 1
    elif args.task != "figure":
        print("edgetopo: --config is required for this task", file=sys.stderr)
        return 1
    if args.figure:
        doc["figure"] = args.figure
    try:
        cfg = RunConfig.from_dict(doc, task=args.task, out=args.out, threads=args.threads)
    except (ConfigError, TypeError) as exc:
        print(f"edgetopo: invalid config: {exc}", file=sys.stderr)
        return 1
    code, report = run(cfg)
    summary = {k: report[k] for k in ("Ei", "SEi", "Ei2", "Ch", "SCh", "Ch2", "ok",
                                      "max_deviation", "files", "error") if k in report}
    print(dumps(summary), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
