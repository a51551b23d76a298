import csv
import json

import numpy as np
import pytest

from packages.ptebd.cli import main, resolve_config


def write_config(path, **extra):
    doc = {
        "name": "tiny",
        "model": {"kind": "two_qubit"},
        "baths": [{"site": 2, "alpha": 0.05, "temperature": 0.5, "memory": 2}],
        "evolution": {"delta_t": 0.2, "n_steps": 3},
        "initial_state": {"kind": "bell"},
        "measures": ["concurrence", "fidelity"],
        "methods": ["full"],
    }
    doc.update(extra)
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_run_config_file(tmp_path, capsys):
    cfg = write_config(tmp_path / "tiny.json")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out-dir", str(out)]) == 0
    assert (out / "main_concurrence.csv").exists()
    assert (out / "main_fidelity.csv").exists()
    assert "tiny: 1 panel(s)" in capsys.readouterr().out


def test_invalid_config_exits_with_configuration_code(tmp_path):
    cfg = write_config(tmp_path / "empty.json", measures=[])
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


def test_missing_file_and_unknown_preset(tmp_path):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["run", "no-such-preset"]) == 2
    assert main(["presets", "show", "no-such-preset"]) == 2


def test_run_refuses_sweep_configs(tmp_path):
    cfg = write_config(tmp_path / "sweep.json", sweep=[{"path": "baths.0.temperature", "values": [0.1, 0.5]}])
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "out")]) == 2


def test_sweep_command(tmp_path, capsys):
    cfg = write_config(tmp_path / "sweep.json", sweep=[{"path": "baths.0.temperature", "values": [0.1, 0.5]}])
    assert main(["sweep", str(cfg), "--out-dir", str(tmp_path / "out"), "--workers", "1"]) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "baths.0.temperature,concurrence_full,fidelity_full"
    assert len(lines) == 3
    assert "2 sweep point(s)" in capsys.readouterr().out


def test_presets_list_and_show(capsys):
    assert main(["presets", "list"]) == 0
    listing = capsys.readouterr().out
    assert "memory-vs-redfield-weak" in listing
    assert "chain-closed-n6" in listing
    assert main(["presets", "show", "pair-equilibrium"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "pair-equilibrium"


def test_resolve_config_prefers_files(tmp_path):
    cfg = write_config(tmp_path / "tiny.json")
    assert resolve_config(str(cfg)).name == "tiny"
    assert resolve_config("driven-teleport").model.kind == "driven_qubits"


def test_presets_list_shows_figure_aliases(capsys):
    assert main(["presets", "list"]) == 0
    assert "fig10a" in capsys.readouterr().out
    assert resolve_config("fig11-closed").name == "chain-closed"


@pytest.mark.slow
def test_run_fig10a_reproduces_the_weak_coupling_agreement(tmp_path):
    out = tmp_path / "fig10a"
    assert main(["run", "fig10a", "--out-dir", str(out)]) == 0
    with open(out / "main_concurrence.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 151
    full, markov, redfield = (
        np.array([float(r[f"concurrence_{m}"]) for r in rows]) for m in ("full", "markov", "redfield")
    )
    assert np.max(np.abs(full - markov)) < 0.01
    assert np.max(np.abs(full - redfield)) < 0.05
    summary = json.loads((out / "summary.json").read_text())
    assert summary["name"] == "memory-vs-redfield-weak"
