import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from minsupport.cli import main
from minsupport.core_model import Interval, make_grid
from minsupport.verify import KINDS

EL = {
    "name": "el",
    "kind": "main",
    "construction": {"name": "euler_lagrange_pair", "params": {"domain": {"type": "interval", "half_length": 0.5, "center": 0.5}, "q": 2.0}},
}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return str(p)


def zero_potential_scenario():
    g = make_grid(Interval(0.5, 0.5), 64)
    u = np.sin(math.pi * g.nodes)
    u[0] = u[-1] = 0.0
    return {
        "name": "zero",
        "kind": "main",
        "exponent": {"q": 1},
        "table": {"domain": {"type": "interval", "half_length": 0.5, "center": 0.5}, "cells": 64, "u": u.tolist(), "V": [0.0] * 65},
    }


def test_run_pass(tmp_path):
    out = tmp_path / "report.json"
    assert main(["run", "--scenario", write(tmp_path, "s.json", EL), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["toolkit_version"]
    assert rep["scenario"] == EL
    (cert,) = rep["certificates"]
    assert abs(cert["slack"]) <= 1e-6 and cert["pass"] is True
    assert cert["metadata"]["K_provenance"] == "variational"


def test_run_vacuous_exit_1(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", "--scenario", write(tmp_path, "z.json", zero_potential_scenario()), "--out", str(out)]) == 1
    assert "vacuous-or-trivial" in capsys.readouterr().err
    cert = json.loads(out.read_text())["certificates"][0]
    assert cert["vacuous"] is True and cert["pass"] is False


@pytest.mark.parametrize(
    "scenario,field",
    [
        ({**EL, "construction": {"name": "euler_lagrange_pair", "params": {"domain": {"type": "disk"}}}}, "construction.params.domain.type"),
        ({**EL, "kind": "bogus"}, "kind"),
        ({**EL, "options": {"cells": 4}}, "options.cells"),
        ({"name": "k", "kind": "constant", "domain": {"type": "ball", "radius": 1.0}, "exponent": {"q": 2}}, "domain.n"),
        ({"name": "k", "kind": "constant", "domain": {"type": "interval"}, "exponent": {"p": 2}}, "exponent"),
    ],
)
def test_malformed_exit_2(tmp_path, capsys, scenario, field):
    assert main(["run", "--scenario", write(tmp_path, "b.json", scenario)]) == 2
    assert repr(field) in capsys.readouterr().err


def test_parse_error_names_line(tmp_path, capsys):
    assert main(["run", "--scenario", write(tmp_path, "b.json", '{\n  "name": "x",\n  "kind": \n}')]) == 2
    assert "line 4" in capsys.readouterr().err


def test_determinism(tmp_path):
    path = write(tmp_path, "s.json", EL)
    reps = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        main(["run", "--scenario", path, "--out", str(out)])
        rep = json.loads(out.read_text())
        rep.pop("timing")
        reps.append(json.dumps(rep, sort_keys=True))
    assert reps[0] == reps[1]


def test_report_roundtrip(tmp_path):
    from minsupport.verify import Certificate

    out = tmp_path / "r.json"
    main(["run", "--scenario", write(tmp_path, "s.json", EL), "--out", str(out)])
    d = json.loads(out.read_text())["certificates"][0]
    assert Certificate.from_dict(d).to_dict() == d


def test_sweep_truncated_bubble_csv(tmp_path):
    sc = {"name": "tb", "kind": "critical", "construction": {"name": "truncated_bubble", "params": {"n": 3}}, "sweep": {"parameter": "R", "values": [10, 100, 1000]}}
    out = tmp_path / "t.csv"
    assert main(["sweep", "--scenario", write(tmp_path, "t.json", sc), "--format", "csv", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert list(rows[0])[:5] == ["parameter", "lhs", "rhs", "slack", "pass"]
    col = [float(r["construction_critical_power_integral"]) for r in rows]
    assert col[0] > col[1] > col[2] > 1
    assert [r["parameter"] for r in rows] == ["10", "100", "1000"]


def test_sweep_counterexample_norm_decreasing(tmp_path):
    sc = {"name": "ce", "kind": "main", "construction": {"name": "small_support_counterexample", "params": {"n": 3, "r": 1.4}}}
    out = tmp_path / "c.csv"
    main(["sweep", "--scenario", write(tmp_path, "c.json", sc), "--sweep", "eps=0.1,0.01,0.001,0.0001", "--format", "csv", "--out", str(out)])
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    norms = [float(r["construction_norm"]) for r in rows]
    assert all(a > b for a, b in zip(norms, norms[1:]))


def test_single_point_sweep_matches_run(tmp_path):
    path = write(tmp_path, "s.json", EL)
    run_out, sweep_out = tmp_path / "run.csv", tmp_path / "sweep.csv"
    main(["run", "--scenario", path, "--format", "csv", "--out", str(run_out)])
    main(["sweep", "--scenario", path, "--sweep", "q=2.0", "--format", "csv", "--out", str(sweep_out)])
    a = list(csv.DictReader(io.StringIO(run_out.read_text())))[0]
    b = list(csv.DictReader(io.StringIO(sweep_out.read_text())))[0]
    a.pop("parameter"), b.pop("parameter")
    assert a == b


def test_sweep_rejects_two_parameters(tmp_path, capsys):
    sc = {**EL, "sweep": [{"parameter": "q", "values": [2]}, {"parameter": "cells", "values": [64]}]}
    assert main(["sweep", "--scenario", write(tmp_path, "s.json", sc)]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_catalog_listing(tmp_path, capsys):
    assert main(["catalog"]) == 0
    first = capsys.readouterr().out
    assert main(["catalog"]) == 0
    assert capsys.readouterr().out == first
    listing = json.loads(first)["catalog"]
    names = [e["name"] for e in listing]
    assert names == sorted(names)
    assert {"talenti_bubble", "hat_1d", "truncated_bubble"} <= set(names)
    for e in listing:
        assert set(e["claims"]) <= set(KINDS)


def test_constant_kind(tmp_path):
    sc = {"name": "k", "kind": "constant", "domain": {"type": "interval", "half_length": 1}, "exponent": {"q": "inf"}}
    out = tmp_path / "k.json"
    assert main(["run", "--scenario", write(tmp_path, "k.json", sc), "--out", str(out)]) == 0
    entry = json.loads(out.read_text())["constants"][0]
    assert abs(entry["K"] - math.sqrt(0.5)) < 1e-3
    assert entry["q"] == "inf"


def test_hardy_trial_scenario_uses_seed(tmp_path):
    sc = {"name": "h", "kind": "hardy", "trial": {"domain": {"type": "ball", "n": 3}, "hardy_weight": "origin"}}
    path = write(tmp_path, "h.json", sc)
    outs = []
    for seed in (1, 2):
        out = tmp_path / f"h{seed}.json"
        assert main(["run", "--scenario", path, "--seed", str(seed), "--out", str(out)]) == 0
        outs.append(json.loads(out.read_text())["certificates"][0]["lhs"])
    assert outs[0] != outs[1]


def test_grid_and_tol_flags(tmp_path):
    out = tmp_path / "r.json"
    main(["run", "--scenario", write(tmp_path, "s.json", EL), "--grid", "64", "--tol", "1e-9", "--out", str(out)])
    cert = json.loads(out.read_text())["certificates"][0]
    assert cert["metadata"]["cells"] == 64 and cert["tol"] == 1e-9


def test_module_entry_point(tmp_path):
    path = write(tmp_path, "s.json", EL)
    proc = subprocess.run([sys.executable, "-m", "minsupport", "run", "--scenario", path], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["certificates"][0]["pass"] is True
