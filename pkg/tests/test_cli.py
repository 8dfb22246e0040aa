import csv
import json

import numpy as np
import pytest

from blolag import cli
from blolag.corpus import line_functions, line_weights, slab_weights
from blolag.grid import SampledLine, save_function


@pytest.fixture
def files(tmp_path):
    save_function(line_functions()["increasing"], tmp_path / "inc.csv")
    save_function(line_functions()["sine"], tmp_path / "sine.csv")
    save_function(line_weights()["sine"], tmp_path / "w.csv")
    save_function(slab_weights((8, 128))["exp-x-plus-t"], tmp_path / "slab.json")
    return tmp_path


def run(argv, tmp_path):
    out = tmp_path / "report.json"
    code = cli.run(argv + ["--output", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_norm_of_increasing_is_zero(files):
    code, rep = run(["norm", "--kind", "blo-plus", "--input", str(files / "inc.csv")], files)
    assert code == 0
    assert rep["result"]["norm"] == 0
    assert rep["version"] == "0.1.0" and rep["family_caps"]["family"] == "anatomy"
    assert rep["config"]["kind"] == "blo-plus"


def test_corrupted_sandwich_constant_exits_one_and_names_inequality(files, capsys):
    code, rep = run(["weight", "--q", "1", "--gapped", "0.5", "--check", "sandwich",
                     "--input", str(files / "w.csv"), "--override-constant", "gapped=1000"], files)
    assert code == 1
    assert rep["result"]["sandwich"]["violated"] == ["gapped <= adjacent/gamma_eff"]
    assert "gapped <= adjacent/gamma_eff" in capsys.readouterr().err


def test_honest_sandwich_upper_bound_holds(files):
    code, rep = run(["weight", "--gapped", "0.5", "--check", "sandwich",
                     "--input", str(files / "w.csv")], files)
    assert rep["result"]["sandwich"]["upper_pass"]


@pytest.mark.parametrize("argv", [
    ["norm", "--kind", "nope", "--input", "x.csv"],
    ["norm", "--kind", "blo-plus", "--input", "missing.csv"],
    ["norm", "--kind", "blo-plus"],
    ["weight", "--input", "x.csv", "--gamma", "1.5"],
    ["frobnicate"],
    ["norm", "--kind", "blo-plus", "--unknown-flag"],
])
def test_input_errors_exit_two(argv, capsys):
    assert cli.run(argv) == 2


def test_slab_norm_requires_gamma(files):
    assert cli.run(["norm", "--kind", "pblo-minus", "--input", str(files / "slab.json")]) == 2


def test_reports_are_byte_identical(files):
    argv = ["epsscan", "--input", str(files / "sine.csv")]
    a, b = files / "a.json", files / "b.json"
    cli.run(argv + ["--output", str(a)])
    cli.run(argv + ["--output", str(b)])
    ta, tb = a.read_text(), b.read_text()
    assert ta.replace("a.json", "") == tb.replace("b.json", "")


def test_curve_outputs(files):
    curve = files / "jn.csv"
    code, rep = run(["jn", "--input", str(files / "sine.csv"), "--curve-output", str(curve)], files)
    assert code == 0
    rows = list(csv.reader(curve.open()))
    assert rows[0] == ["lambda", "tail"]
    assert len(rows) - 1 == len(rep["result"]["lambdas"])
    curve = files / "eps.csv"
    run(["epsscan", "--input", str(files / "sine.csv"), "--curve-output", str(curve)], files)
    assert next(csv.reader(curve.open())) == ["eps", "window", "constant"]


def test_maximal_values_output_round_trips(files):
    out = files / "m.csv"
    code, rep = run(["maximal", "--input", str(files / "sine.csv"), "--values-output", str(out)], files)
    assert code == 0
    from blolag.grid import load_function
    assert np.allclose(load_function(out).values, rep["result"]["values"], rtol=0, atol=0)


@pytest.mark.parametrize("method", ["blo", "bennett", "cr", "power", "distance"])
def test_decompose_methods(files, method):
    src = "w.csv" if method in ("cr", "power") else "sine.csv"
    code, rep = run(["decompose", "--method", method, "--input", str(files / src)], files)
    assert code == 0 and rep["result"]


def test_slab_commands(files):
    slab = str(files / "slab.json")
    code, rep = run(["harnack", "--input", slab, "--gamma", "0.5"], files)
    assert code == 0 and rep["result"]["bridge_pass"]
    assert "heat_residual" in rep["result"]
    code, rep = run(["weight", "--input", slab, "--gamma", "0.5", "--check", "bridge"], files)
    assert code == 0 and rep["result"]["bridge"]["pass"]


def test_dyadic_command(files):
    code, rep = run(["dyadic", "--n", "1", "--p", "2", "--depth", "3"], files)
    assert code == 0
    assert rep["result"]["child_counts"] == [8]
    assert all(rep["result"]["properties"].values())


def test_porosity_commands(files):
    (files / "line_set.json").write_text(json.dumps(
        {"n": 0, "primitives": [{"box": {"tmin": 0, "tmax": 1}}]}))
    code, rep = run(["porosity", "--set", str(files / "line_set.json"),
                     "--window", str(files / "sine.csv")], files)
    assert code == 0 and not rep["result"]["certificate"]["porous"]
    assert rep["result"]["validation"]["ok"]
    from blolag.porosity import window
    save_function(window(2.0, (-1, 1), (-1, 1), (16, 128)), files / "win.json")
    (files / "point.json").write_text(json.dumps({"n": 1, "primitives": [{"points": [[0, 0]]}]}))
    code, rep = run(["porosity", "--set", str(files / "point.json"), "--window",
                     str(files / "win.json"), "--gamma", "0.25"], files)
    assert code == 0 and rep["result"]["certificate"]["porous"]
    code, rep = run(["porosity", "--set", str(files / "point.json"), "--window",
                     str(files / "win.json"), "--gamma", "0.25", "--alpha", "0.3"], files)
    assert code == 0 and rep["result"]["pipeline"]["implication"] == "holds"
    assert cli.run(["porosity", "--set", str(files / "missing.json"), "--window",
                    str(files / "win.json")]) == 2
