import csv
import json

import pytest

from edgetopo.cli import RunConfig, ConfigError, dumps, main, run

HARPER = {"builder": "harper", "params": {"q": 3, "p": 7, "t": 1.0}}


def _run(tmp_path, task, doc, name="cfg.json"):
    cfg = tmp_path / name
    cfg.write_text(json.dumps(doc))
    out = tmp_path / ("out_" + task)
    code = main([task, "--config", str(cfg), "--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_edge_index_report(tmp_path):
    code, rep, _ = _run(tmp_path, "edge-index", {"model": HARPER, "energy": -1.9})
    assert code == 0
    assert rep["Ei"] == 3 and rep["paper_targets"] == {"Ei": 3}
    assert sum(c["nu"] * c["mult"] for c in rep["crossings"]) == 3
    assert rep["grid"] == 256 and rep["provenance"]["backend"] in ("python", "cython")


def test_report_is_deterministic(tmp_path):
    doc = {"model": HARPER, "energy": -2.4, "k1_nodes": 64}
    _, _, out = _run(tmp_path, "edge-index", doc)
    first = (out / "report.json").read_bytes()
    _run(tmp_path, "edge-index", doc)
    assert (out / "report.json").read_bytes() == first


def test_chern_and_bulk_edge(tmp_path):
    code, rep, _ = _run(tmp_path, "chern", {"model": HARPER, "bands": [1], "k_grid": 24})
    assert code == 0 and rep["Ch"] == 5 and rep["paper_targets"] == {"Ch": 5}
    code, rep, _ = _run(tmp_path, "bulk-edge", {"model": HARPER, "E_minus": -2.4,
                                                "E_plus": -1.9, "k_grid": 24})
    assert code == 0 and rep["ok"] and rep["Ch"] == 5


def test_z2_and_spin_chern(tmp_path):
    km = {"builder": "kane_mele", "params": {"t": 1.0, "lambda_so": 1.0, "lambda_st": 0.45,
                                             "tp": [1, 1, 0.9]}}
    code, rep, _ = _run(tmp_path, "z2", {"model": km, "energy": 0.0, "k1_nodes": 128})
    assert code == 0 and rep["Ei2"] == 1 and rep["SEi"] == [-1, 1]
    code, rep, _ = _run(tmp_path, "spin-chern", {"model": km, "window": [-10, 0], "k_grid": 20})
    assert code == 0 and rep["SCh"] == [-1, 1]


def test_bands_and_edge_bands_csv(tmp_path):
    code, _, out = _run(tmp_path, "bands", {"model": HARPER, "k_grid": 4})
    assert code == 0
    with open(out / "bands.csv") as fh:
        assert next(csv.reader(fh))[:3] == ["k1", "k2", "E_1"]
    code, rep, out = _run(tmp_path, "edge-bands", {"model": HARPER, "energy": -2.4,
                                                   "k1_nodes": 16})
    assert code == 0 and rep["n_bands"] >= 1
    with open(out / "edge_bands.csv") as fh:
        assert next(csv.reader(fh)) == ["k1", "E", "band_id", "degeneracy"]


def test_oracle_task(tmp_path):
    code, rep, _ = _run(tmp_path, "oracle", {"model": HARPER, "energy": -2.4,
                                              "oracle_k1": [0.3, 1.2, -2.0]})
    assert code == 0 and rep["multiplicities_agree"] and rep["max_deviation"] < 1e-6


def test_figure_task(tmp_path):
    out = tmp_path / "fig"
    assert main(["figure", "--figure", "harper-fig", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.glob("*.csv"))
    assert len(files) == 3
    with open(out / files[0]) as fh:
        assert next(csv.reader(fh)) == ["k1", "phase_1"]


def test_exit_code_bad_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["chern", "--config", str(bad)]) == 1
    assert main(["chern", "--config", str(tmp_path / "missing.json")]) == 1
    code, _, _ = _run(tmp_path, "edge-index", {"model": HARPER})
    assert code == 1


def test_exit_code_model_error(tmp_path):
    code, rep, _ = _run(tmp_path, "edge-index", {"model": {"builder": "kane_mele",
                                                           "params": {"t": 1, "lambda_so": 0}},
                                                 "energy": 0.0})
    assert code == 2 and rep["error"]["kind"] == "model"


def test_exit_code_numerical(tmp_path):
    code, rep, _ = _run(tmp_path, "edge-index", {"model": HARPER, "energy": -2.57})
    assert code == 3 and rep["error"]["kind"] == "numerical"


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": HARPER}, task="chern")
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": HARPER, "bands": [0], "tolerances": {"cluster_gap": -1}},
                            task="chern")
    cfg = RunConfig.from_dict({"model": HARPER, "bands": [0], "tolerances": {"cluster_gap": 0.1}},
                              task="chern", threads=3)
    assert cfg.cluster_gap == 0.1 and cfg.threads == 3 and cfg.bands == (0,)


def test_dumps_format():
    assert dumps({"b": 0.1, "a": [1, None, True]}) == '{"a": [1, null, true], "b": 0.10000000000000001}\n'
