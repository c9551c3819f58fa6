import json
import subprocess
import sys

import pytest

from fe_stab.cli import main, to_markdown
from fe_stab.scenarios import SCENARIOS

POLY = {"kind": "poly", "coeffs": [0, 0, 0, 1, 1]}
GRID = {"lo": -2, "hi": 2, "depth": 5}


def run(tmp_path, command, config, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    out = tmp_path / "report.json"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, json.loads(out.read_text())


def test_stabilize_exact_solution_passes(tmp_path):
    code, report = run(tmp_path, "stabilize", {"model": POLY, "grid": GRID, "phi": {"kind": "constant", "epsilon": 1}})
    assert code == 0 and report["status"] == "Pass"
    assert report["results"]["a_quartic"] == "1" and report["results"]["grid_error"] == "0"
    assert set(report) == {"command", "config", "results", "status", "failure", "wall_time"}


def test_stabilize_perturbed_solution_passes(tmp_path):
    model = {"kind": "perturbed", "base": POLY, "delta": 0.001, "seed": 7}
    code, report = run(tmp_path, "stabilize", {"model": model, "grid": GRID, "direction": -1,
                                               "phi": {"kind": "constant", "epsilon": 0.287}})
    assert code == 0
    assert report["results"]["grid_error"] <= 22 / 105 * 0.287


def test_stabilize_non_solution_fails(tmp_path):
    model = {"kind": "poly", "coeffs": [0, 0, 1]}
    code, report = run(tmp_path, "stabilize", {"model": model, "grid": GRID, "phi": {"kind": "constant", "epsilon": 1}})
    assert code == 1 and report["status"] == "Fail" and report["results"]["warnings"]


def test_stabilize_divergence_fails(tmp_path):
    model = {"kind": "poly", "coeffs": [0, 0, 1]}
    code, report = run(tmp_path, "stabilize", {"model": model, "grid": GRID,
                                               "phi": {"kind": "power_sum", "theta": 1, "p": 5}})
    assert code == 1 and report["results"]["error_kind"] == "Diverged"


@pytest.mark.parametrize("p", [3, 3.5, 4])
def test_gap_exponents_are_config_errors(tmp_path, p):
    code, report = run(tmp_path, "stabilize", {"model": POLY, "grid": GRID,
                                               "phi": {"kind": "power_sum", "theta": 1, "p": p}})
    assert code == 2 and report["status"] == "Error"


def test_unanchored_model_fails(tmp_path):
    code, report = run(tmp_path, "stabilize", {"model": {"kind": "poly", "coeffs": [1, 0, 0, 0, 1]}, "grid": GRID,
                                               "phi": {"kind": "constant", "epsilon": 1}})
    assert code == 1 and report["results"]["error_kind"] == "NotAnchored"


@pytest.mark.parametrize("config", [
    {"model": POLY},
    {"model": POLY, "grid": GRID, "bogus": 1},
    {"model": {"kind": "poly", "coeffs": [0, 1], "x": 1}, "grid": GRID},
    {"model": POLY, "grid": {"lo": 0, "hi": 1, "depth": 2}},
    {"model": POLY, "grid": {"lo": -1, "hi": 1}},
])
def test_config_errors(tmp_path, config):
    code, report = run(tmp_path, "residual", config)
    assert code == 2 and report["status"] == "Error"


def test_invalid_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert main(["residual", "--config", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err
    assert main(["residual", "--config", str(tmp_path / "missing.json")]) == 2


def test_residual_threshold(tmp_path):
    cfg = {"model": {"kind": "poly", "coeffs": [0, 0, 1]}, "grid": {"lo": -1, "hi": 1, "depth": 3}}
    code, report = run(tmp_path, "residual", cfg)
    assert code == 1
    assert report["results"]["residual"]["sup"] == "84"
    assert report["results"]["symbolic_residual"] == "72*x^2 + 12*y^2"
    code, _ = run(tmp_path, "residual", dict(cfg, threshold="84"))
    assert code == 0


def test_identities_command(tmp_path):
    code, report = run(tmp_path, "identities", {"model": {"kind": "poly", "coeffs": [0, 0, 0, "2/3", "-5/7"]}})
    assert code == 0 and report["results"]["count"] == 40
    code, report = run(tmp_path, "identities", {"model": {"kind": "poly", "coeffs": [0, 0, 1]}, "parity": "even"})
    assert code == 1 and "2.6" in report["results"]["failed"]
    code, _ = run(tmp_path, "identities", {"model": {"kind": "perturbed", "base": POLY, "delta": 0.001, "seed": 1}})
    assert code == 2


def test_bounds_command(tmp_path):
    code, report = run(tmp_path, "bounds", {"phi": {"kind": "power_sum", "theta": 1, "p": 5}})
    assert code == 0
    res = report["results"]
    assert res["direction"] == 1 and res["closed_form"] == "5/48"
    assert res["quartic"]["exact_closed_form"] == "1/16" and res["cubic"]["exact_closed_form"] == "1/24"
    code, report = run(tmp_path, "bounds", {"phi": {"kind": "constant", "epsilon": "1"}})
    assert report["results"]["closed_form"] == "22/105"


def test_reproduce_every_scenario():
    for name in SCENARIOS:
        assert main(["reproduce", name, "--out", "/dev/null"]) == 0, name


def test_reproduce_unknown_scenario():
    assert main(["reproduce", "no-such-scenario", "--out", "/dev/null"]) == 2
    assert main(["reproduce", "--out", "/dev/null"]) == 2


def test_reports_are_byte_identical_apart_from_wall_time(tmp_path):
    model = {"kind": "perturbed", "base": POLY, "delta": 0.001, "seed": 3}
    cfg = {"model": model, "grid": GRID, "phi": {"kind": "constant", "epsilon": 0.287}}
    texts = []
    for i in range(2):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / f"r{i}.json"
        main(["stabilize", "--config", str(path), "--out", str(out), "--seed", "5"])
        texts.append([line for line in out.read_text().splitlines() if '"wall_time"' not in line])
    assert texts[0] == texts[1]


def test_thread_env_fallback(tmp_path, monkeypatch):
    cfg = {"model": {"kind": "perturbed", "base": POLY, "delta": 0.001, "seed": 3}, "grid": GRID}
    _, serial = run(tmp_path, "residual", dict(cfg, threshold=1))
    monkeypatch.setenv("FE_STAB_THREADS", "3")
    _, threaded = run(tmp_path, "residual", dict(cfg, threshold=1))
    assert serial["results"] == threaded["results"]


def test_markdown_and_both_formats(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"model": POLY, "grid": GRID, "phi": {"kind": "constant", "epsilon": 1}}))
    assert main(["stabilize", "--config", str(path), "--format", "both", "--out", str(tmp_path / "rep")]) == 0
    report = json.loads((tmp_path / "rep.json").read_text())
    markdown = (tmp_path / "rep.md").read_text()
    assert markdown == to_markdown(report)
    assert "**Status: Pass**" in markdown and "**margin = 22/105**" in markdown


def test_markdown_formatter_is_pure():
    report = {"command": "bounds", "status": "Pass", "failure": None, "results": {"closed_form": "5/48"}}
    assert to_markdown(report) == to_markdown(json.loads(json.dumps(report)))
    assert '"closed_form": "5/48"' in to_markdown(report)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fe_stab", "reproduce", "gap-rejection", "--format", "md"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "**Status: Pass**" in proc.stdout


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
