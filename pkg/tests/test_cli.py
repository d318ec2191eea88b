import json
import subprocess
import sys

import numpy as np
import pytest

from mellin_lab import cli, merosym
from mellin_lab.report import InconclusiveNumerics

MODES = [-2, -1, 0, 1, 2]


def euler_problem(**extra):
    prob = {
        "operation": "weights",
        "operator": {"mu": 2, "mode_cutoff": 2,
                     "coefficients": [{"diag": [-k * k for k in MODES]}, 0, 1]},
        "gamma_range": [-3, 3],
    }
    prob.update(extra)
    return prob


def write(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_weights_euler_pencil(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["weights", "--problem", write(tmp_path, euler_problem()), "--out", str(out)])
    assert code == cli.EXIT_PASS
    rep = json.loads((out / "weights.json").read_text())
    # per-mode roots of w^2 - k^2 mapped through gamma = 1/2 - Re w
    roots = np.concatenate([np.roots([1, 0, -k * k]) for k in MODES])
    oracle = sorted({round(0.5 - z.real, 12) for z in roots if -3 <= 0.5 - z.real <= 3})
    np.testing.assert_allclose(rep["forbidden_gamma"], oracle, atol=1e-8)
    assert "admissible gamma intervals" in (out / "weights.txt").read_text()
    lines = (out / "weights_lines.csv").read_text().splitlines()
    assert lines[0] == "gamma,min_sigma_on_line" and len(lines) == 201
    assert json.loads(capsys.readouterr().out.splitlines()[0])["passed"] is True


def test_weights_empty_strip(tmp_path):
    out = tmp_path / "out"
    prob = euler_problem(gamma_range=[0.6, 1.4])
    assert cli.main(["weights", "--problem", write(tmp_path, prob), "--out", str(out)]) == 0
    rep = json.loads((out / "weights.json").read_text())
    assert rep["forbidden_gamma"] == []


@pytest.mark.parametrize("mutate", [
    lambda p: p["operator"].update(coefficients=[0, 0, 0]),
    lambda p: p.update(colour="blue"),
    lambda p: p["operator"].update(mu=1.5),
    lambda p: p["operator"].update(coefficients=[1, 0]),
    lambda p: p["operator"].update(coefficients=[{"diag": [1, 2]}, 0, 1]),
    lambda p: p.pop("gamma_range"),
])
def test_weights_input_errors(tmp_path, mutate):
    prob = euler_problem()
    mutate(prob)
    assert cli.main(["weights", "--problem", write(tmp_path, prob)]) == cli.EXIT_INPUT


def test_unreadable_problem(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["weights", "--problem", str(bad)]) == cli.EXIT_INPUT
    assert cli.main(["weights", "--problem", str(tmp_path / "missing.json")]) == cli.EXIT_INPUT


def test_index_agrees(tmp_path):
    out = tmp_path / "out"
    prob = {"operation": "index", "k": -2, "sizes": [128]}
    assert cli.main(["index", "--problem", write(tmp_path, prob), "--out", str(out), "--seed", "7"]) == 0
    rep = json.loads((out / "index.json").read_text())
    assert rep["winding"] == -2 and rep["agree"] and rep["seed"] == 7
    assert (out / "index_line.csv").read_text().startswith("tau,re,im")


def test_index_inconclusive_exit(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise InconclusiveNumerics("forced")
    monkeypatch.setattr(merosym, "winding_number", boom)
    prob = {"operation": "index", "k": 1, "sizes": [128]}
    assert cli.main(["index", "--problem", write(tmp_path, prob)]) == cli.EXIT_INCONCLUSIVE


def test_verify_and_flag_errors(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["verify", "--suite", "pi-bound", "--out", str(out)]) == 0
    recs = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert recs[-1]["suite"] == "pi-bound" and recs[-1]["passed"]
    assert all(r["seed"] == 0 for r in recs[:-1])
    assert (out / "verify_pi-bound.jsonl").exists()
    assert cli.main(["verify", "--suite", "nonsense"]) == cli.EXIT_INPUT
    assert cli.main(["verify", "--suite", "pi-bound", "--grid-scale", "0"]) == cli.EXIT_INPUT
    assert cli.main(["frobnicate"]) == cli.EXIT_INPUT


def test_verify_deterministic_per_seed(capsys):
    runs = []
    for _ in range(2):
        cli.main(["verify", "--suite", "conormal", "--seed", "3"])
        runs.append(capsys.readouterr().out.splitlines()[:-1])
    assert runs[0] == runs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mellin_lab", "verify", "--suite", "pi-bound"],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0
    assert json.loads(res.stdout.splitlines()[-1])["passed"] is True
