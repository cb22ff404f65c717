import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mortar_bddc import harness
from mortar_bddc.cli import main
from mortar_bddc.harness import (ExperimentConfig, StageError, data_path, load_config, run_experiment, run_oracle,
                                 theta_rule)

SHIPPED = ["ex1_conforming", "ex2_channels1", "ex2_channels3", "ex3_random", "ex3_unconforming_fig5"]


def cfg(**kw):
    d = {"partition": {"type": "conforming", "k": 3, "n": 12, "beta": 0.5}, "scaling": "m2"}
    d.update(kw)
    return ExperimentConfig.from_dict(d)


def rows(res):
    text = "\n".join(l for l in res.csv_text().splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(text)))


def test_theta_rule_examples():
    assert math.isclose(theta_rule(12, 0.5), 2.791759469228055, rel_tol=1e-15)
    assert math.isclose(theta_rule(math.e, 1.0), 2.0)
    assert theta_rule(10, 1.0) == 1 + math.log(10)
    assert theta_rule(8, 2.0) == 1 + math.log(8)
    with pytest.raises(ValueError):
        theta_rule(1, 1.0)


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_validate(name):
    c = load_config(data_path(f"{name}.json"))
    assert c.name == name and len(c.cases()) >= 1


def test_schema_violations():
    with pytest.raises(StageError, match=r"^\[config\] partition"):
        ExperimentConfig.from_dict({"partition": {"type": "conforming", "k": 0, "n": 4, "beta": 1}})
    with pytest.raises(StageError, match=r"\[config\]"):
        ExperimentConfig.from_dict({"partition": {"type": "conforming", "k": 2, "n": 4, "beta": 1}, "theta": 0.5})
    with pytest.raises(StageError, match="integer"):
        ExperimentConfig.from_dict({"partition": {"type": "conforming", "k": 2, "n": 5, "beta": 0.5}})
    with pytest.raises(StageError, match="not found"):
        ExperimentConfig.from_dict({"partition": {"type": "file", "path": "nope.json", "beta": 1}})
    with pytest.raises(StageError, match="n >= 2"):
        ExperimentConfig.from_dict({"partition": {"type": "conforming", "k": 2, "n": 1, "beta": 2}})


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(StageError, match=r"^\[config\]"):
        load_config(bad)


def test_stage_label_on_geometry_failure():
    c = ExperimentConfig.from_dict({"partition": {"type": "file", "path": str(data_path("fig5.json")), "beta": 2},
                                    "scaling": "m1"})
    c.partition = {"type": "conforming", "k": 2, "n": 2, "beta": 0.5}
    with pytest.raises(StageError, match=r"^\[discretize\]"):
        run_experiment(c)


def test_example_61_deluxe_row():
    (r,) = run_experiment(cfg()).rows
    assert r["pnum"] == 16 and 4 <= r["Iter"] <= 8
    assert r["ppnum"] == 16 / r["n_multipliers"]
    assert math.isclose(r["C"], r["kappa"] / r["Theta"])


def test_example_63_deluxe_primal_count():
    c = cfg(partition={"type": "conforming", "k": 3, "n": 12, "beta": 1.5},
            coefficient={"type": "random", "seed": 0, "lo": -3, "hi": 3})
    (r,) = run_experiment(c).rows
    assert r["pnum"] / 12 <= 3.0 and r["n_multipliers"] == 276


def test_theta_below_spectrum_makes_everything_primal():
    # every GEVP eigenvalue exceeds 1, so nothing qualifies as dual
    c = cfg(scaling="m1", theta=1.0)
    (r,) = run_experiment(c).rows
    assert r["pnum"] == r["n_multipliers"] and r["converged"] and r["Iter"] <= 2


def test_theta_above_spectrum_gives_empty_coarse_space():
    (r,) = run_experiment(cfg(scaling="m1", theta=1e6)).rows
    assert r["pnum"] == 0 and r["converged"]


def test_sweeps_expand():
    c = cfg(partition={"type": "conforming", "k": 2, "n": [4, 8], "beta": 0.5}, scaling="both",
            coefficient={"type": "random", "seed": 0}, seeds=[1, 2])
    res = run_experiment(c)
    assert [(r["n"], r["seed"], r["scaling"]) for r in res.rows] == [
        (n, s, k) for n in (4, 8) for s in (1, 2) for k in ("M1", "M2")]


def test_oracle_small_case():
    c = cfg(partition={"type": "conforming", "k": 2, "n": 4, "beta": 1.0}, degree=1, scaling="both")
    res = run_oracle(c)
    for r in res.rows:
        assert r["kappa_rel_diff"] <= 0.05
        assert r["oracle_lambda_min"] >= 1 - 1e-8


def test_oracle_size_guard(monkeypatch):
    monkeypatch.setattr(harness, "ORACLE_MAX_DIM", 10)
    with pytest.raises(StageError, match=r"^\[oracle\]"):
        run_oracle(cfg())


def test_pcg_failure_is_labelled():
    with pytest.raises(StageError, match=r"^\[pcg\]"):
        run_experiment(cfg(pcg={"maxit": 1}))


def test_reports_are_repeatable_and_labelled(tmp_path):
    c = cfg(partition={"type": "conforming", "k": 3, "n": 4, "beta": 1.5},
            coefficient={"type": "random", "seed": 3}, scaling="both")
    a, b = run_experiment(c), run_experiment(c)
    assert a.csv_text() == b.csv_text()
    assert json.dumps(a.json_obj(), default=harness._jsonable) == json.dumps(b.json_obj(), default=harness._jsonable)
    out = a.write(tmp_path / "r")
    text = (out / "report.csv").read_text()
    assert "# log: natural log" in text and "PCG64" in text
    assert {"Iter", "lambda_min", "lambda_max", "kappa", "pnum", "ppnum", "Theta", "C"} <= set(rows(a)[0])
    js = json.loads((out / "report.json").read_text())
    assert len(js["runs"]) == 2 and len(js["runs"][0]["edges"]) == 12
    edges = list(csv.DictReader(io.StringIO((out / "edges.csv").read_text())))
    assert sum(int(e["n_primal"]) for e in edges if e["case"] == "1") == a.rows[1]["pnum"]


def test_cli_success(tmp_path, capsys):
    rc = main(["solve", "--config", str(data_path("ex1_conforming.json")), "--scaling", "m2",
               "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "M2" in out and "M1" not in out.split("\n", 5)[-1]
    assert (tmp_path / "report.json").exists()


def test_cli_theta_override(capsys):
    rc = main(["solve", "--config", str(data_path("ex1_conforming.json")), "--scaling", "m1", "--theta", "1e6"])
    assert rc == 0
    body = [l for l in capsys.readouterr().out.splitlines() if l and not l.startswith("#")]
    r = list(csv.DictReader(body))
    assert all(x["pnum"] == "0" and float(x["Theta"]) == 1e6 for x in r)


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"partition": {"type": "conforming", "k": 2, "n": 5, "beta": 0.5}}))
    assert main(["solve", "--config", str(bad)]) == 2
    assert "[config]" in capsys.readouterr().err
    assert main(["solve", "--config", str(data_path("ex1_conforming.json")), "--theta", "0.5"]) == 2


def test_module_entry_point(tmp_path):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"partition": {"type": "conforming", "k": 2, "n": 4, "beta": 0.5}, "degree": 1}))
    p = subprocess.run([sys.executable, "-m", "mortar_bddc", "solve", "--config", str(c), "--oracle"],
                       capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert "oracle_kappa" in p.stdout
