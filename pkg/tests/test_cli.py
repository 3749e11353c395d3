import json
import math

import numpy as np
import pytest

from gategraph import cli
from gategraph.graph import is_simple, new_graph, read_graph, write_graph


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("GATEGRAPH_ASSET_DIR", raising=False)
    (tmp_path / "d.json").write_text(json.dumps({"R": 1, "labels": ["1"]}))
    write_graph(new_graph([[0, 1], [1, 0]]), tmp_path / "p2.mtx")
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compile_mini(work, capsys):
    code, out, _ = run(capsys, "compile", "d.json", "--element", "mini", "--out", "g.mtx")
    assert code == 0
    assert read_graph(work / "g.mtx").num_vertices == 8
    assert json.loads(out)["mu"] == pytest.approx(-1.0)
    manifest = json.loads((work / "g.mtx.manifest.json").read_text())
    assert set(manifest["outputs"]) == {"g.mtx", "g.labels.json"}
    assert "d.json" in manifest["inputs"] and len(manifest["inputs"]["d.json"]) == 64
    assert all((work / p).exists() for p in manifest["outputs"])


def test_compile_malformed(work, capsys):
    (work / "bad.json").write_text("{")
    code, _, err = run(capsys, "compile", "bad.json", "--out", "g.mtx")
    assert code == 2
    payload = json.loads(err)
    assert payload["category"] == "input" and "parse" in payload["message"]
    assert json.loads((work / "g.mtx.manifest.json").read_text())["outputs"] == []


def test_compile_g0_missing_asset(work, capsys):
    code, _, err = run(capsys, "compile", "d.json", "--element", "g0", "--out", "g.mtx")
    assert code == 2 and "GATEGRAPH_ASSET_DIR" in json.loads(err)["message"]


def test_spectrum_examples(work, capsys):
    code, out, _ = run(capsys, "spectrum", "p2.mtx", "--sector", "xy", "--N", "1")
    assert code == 0 and json.loads(out)["theta"] == pytest.approx(-1)
    code, out, _ = run(capsys, "spectrum", "p2.mtx", "--sector", "bh", "--N", "2")
    rep = json.loads(out)
    assert rep["lambda1"] == pytest.approx(3 - math.sqrt(5), abs=1e-9)
    assert rep["basis_dim"] == 3 and rep["converged"]


def test_spectrum_k30(work, capsys, rng):
    from _oracles import random_graph
    write_graph(new_graph(random_graph(rng, 30, p=0.2)), work / "k30.mtx")
    code, out, _ = run(capsys, "spectrum", "k30.mtx", "--sector", "bh", "--N", "3")
    assert code == 0 and json.loads(out)["basis_dim"] == 4960


def test_spectrum_bad_n(work, capsys):
    code, _, err = run(capsys, "spectrum", "p2.mtx", "--sector", "xy", "--N", "5")
    assert code == 2 and json.loads(err)["error"] == "InputError"


def test_verify_section4(work, capsys):
    code, _, _ = run(capsys, "verify", "d.json", "--element", "mini", "--N", "1", "--out", "r.json")
    assert code == 0
    assert json.loads((work / "r.json").read_text())["pass"]


def test_verify_precondition_failure_exit(work, capsys):
    (work / "bad.json").write_text(json.dumps({"R": 1, "labels": ["1"],
                                               "self_loops": [[1, 0, 1], [1, 1, 1], [1, 0, 2], [1, 1, 2]]}))
    code, out, _ = run(capsys, "verify", "bad.json")
    assert code == 1 and json.loads(out)["status"] == "precondition_failed"


def test_verify_certificates_deterministic(work, capsys):
    for name in ("a.json", "b.json"):
        code, _, _ = run(capsys, "verify", "--suite", "certificates", "--trials", "200", "--seed", "4",
                         "--out", name)
        assert code == 0
    assert (work / "a.json").read_bytes() == (work / "b.json").read_bytes()
    manifest = json.loads((work / "a.json.manifest.json").read_text())
    assert manifest["seed"] == 4


def test_verify_hardcore(work, capsys):
    code, out, _ = run(capsys, "verify", "d.json", "--suite", "hardcore", "--N", "2")
    assert code == 0
    assert all(row["max_abs_diff"] == 0 for row in json.loads(out)["graphs"].values())


def test_reduce_xy(work, capsys):
    (work / "i.json").write_text(json.dumps({"kind": "ffbh", "graph": "p2.mtx", "N": 1, "T": "16", "alpha": 3}))
    code, _, _ = run(capsys, "reduce", "i.json", "--target", "xy", "--out", "x.json")
    assert code == 0
    x = json.loads((work / "x.json").read_text())
    assert x["T"] == "64" and x["c"] == pytest.approx(-1 + 1 / 64)
    assert (work / x["graph"]).exists()
    code, out, _ = run(capsys, "classify", "x.json")
    assert code == 0 and json.loads(out)["classification"] == "yes"


def test_reduce_alpha_mismatch(work, capsys):
    (work / "i.json").write_text(json.dumps({"kind": "ffbh", "graph": "p2.mtx", "N": 1, "T": "16", "alpha": 2}))
    code, _, err = run(capsys, "reduce", "i.json", "--target", "xy", "--out", "x.json")
    assert code == 2 and json.loads(err)["error"] == "AlphaMismatch"


def test_reduce_simple(work, capsys):
    (work / "di.json").write_text(json.dumps({"diagram": "d.json", "element": "mini", "N": 1, "T": "40"}))
    code, _, _ = run(capsys, "reduce", "di.json", "--target", "simple", "--out", "s.json")
    assert code == 0
    s = json.loads((work / "s.json").read_text())
    assert s["T"] == str(40 ** 7) and s["provenance"]["is_simple"]
    assert is_simple(read_graph(work / s["graph"]))


def test_reduce_simple_needs_diagram(work, capsys):
    (work / "i.json").write_text(json.dumps({"kind": "ffbh", "graph": "p2.mtx", "N": 1, "T": "16", "alpha": 3}))
    code, _, _ = run(capsys, "reduce", "i.json", "--target", "simple", "--out", "s.json")
    assert code == 2


def test_dry_run_writes_nothing_but_manifest(work, capsys):
    code, out, _ = run(capsys, "compile", "d.json", "--out", "g.mtx", "--dry-run")
    assert code == 0 and out == ""
    assert not (work / "g.mtx").exists()
    assert json.loads((work / "g.mtx.manifest.json").read_text())["dry_run"]


def test_solver_failure_exit_code(work, capsys, monkeypatch):
    from gategraph import sectors
    from gategraph.errors import SolverNoConvergence

    def boom(*a, **k):
        raise SolverNoConvergence("no", diagnostics={"iterations": 3})
    monkeypatch.setattr(sectors.SectorOperator, "lowest", boom)
    code, _, err = run(capsys, "spectrum", "p2.mtx", "--sector", "xy", "--N", "1")
    assert code == 3 and json.loads(err)["diagnostics"]["iterations"] == 3


def test_clean_handles_infinities():
    assert json.loads(cli.dumps({"a": math.inf, "b": np.float64(1.5), "c": [np.int64(2)]})) == \
        {"a": None, "b": 1.5, "c": [2]}
