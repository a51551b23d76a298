import json

import numpy as np
import pytest

from packages.ptebd.config import validate_config
from packages.ptebd.errors import ConfigurationError
from packages.ptebd.export import csv_text
from packages.ptebd.measures import concurrence
from packages.ptebd.presets import preset_document
from packages.ptebd.runner import run_config, run_experiment, run_panel, run_sweep, sweep_points


def small_doc(**extra):
    doc = {
        "name": "small",
        "model": {"kind": "two_qubit"},
        "baths": [{"site": 1, "alpha": 0.1, "temperature": 0.2, "memory": 3}],
        "evolution": {"delta_t": 0.2, "n_steps": 5},
        "initial_state": {"kind": "basis", "bits": "00"},
        "measures": ["concurrence", "coherence"],
        "methods": ["full", "markov"],
    }
    doc.update(extra)
    return doc


def test_run_writes_panel_files(tmp_path):
    result = run_experiment(validate_config(small_doc()), tmp_path)
    names = sorted(p.name for p in result.files)
    assert names == ["diagnostics.csv", "main_coherence.csv", "main_concurrence.csv", "summary.json"]
    header = (tmp_path / "main_concurrence.csv").read_text().splitlines()[0]
    assert header == "t,concurrence_full,concurrence_markov"
    assert len((tmp_path / "main_coherence.csv").read_text().splitlines()) == 7
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["name"] == "small"
    panel = summary["panels"][0]
    assert set(panel["methods"]) == {"full", "markov"}
    assert panel["process_tensors"]["1"]["memory_cutoff"] == 3
    assert len(panel["eta_checksums"]["1"]) == 64


def test_csv_output_is_deterministic(tmp_path):
    cfg = validate_config(small_doc())
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("main_concurrence.csv", "main_coherence.csv", "diagnostics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_quotes_fields_with_commas():
    text = csv_text(["t", "panel,label"], [[0.1, "a,b"], [True, 3]])
    assert text == "t,\"panel,label\"\n0.10000000000000001,\"a,b\"\n1,3\n"


def test_product_state_without_bond_coupling_stays_unentangled():
    doc = small_doc(model={"kind": "two_qubit", "J": 0.0})
    panel = run_panel("main", validate_config(doc))
    assert np.max(panel.series["full"].concurrence) < 1e-6
    assert np.max(panel.series["markov"].concurrence) < 1e-6


def test_panels_share_process_tensors():
    doc = small_doc(panels=[
        {"label": "strong", "overrides": {"model.J": 0.5}},
        {"label": "weak", "overrides": {"model.J": 0.1}},
    ])
    result = run_experiment(validate_config(doc))
    strong, weak = result.panel("strong"), result.panel("weak")
    assert strong.process_tensors[1] is weak.process_tensors[1]
    assert strong.value_at("concurrence", "full", 5) != weak.value_at("concurrence", "full", 5)
    with pytest.raises(KeyError):
        result.panel("missing")


def test_reference_methods_share_the_measure_table():
    doc = small_doc(methods=["full", "redfield", "exact"], measures=["concurrence"])
    panel = run_panel("main", validate_config(doc))
    columns = panel.measure_columns("concurrence")
    assert list(columns) == ["t", "concurrence_full", "concurrence_redfield", "concurrence_exact"]
    assert all(len(v) == 6 for v in columns.values())


def test_verify_against_path_summation():
    doc = small_doc(evolution={"delta_t": 0.2, "n_steps": 3},
                    baths=[{"site": 1, "alpha": 0.1, "temperature": 0.2, "memory": 2}])
    panel = run_panel("main", validate_config(doc), verify=True)
    assert panel.verify_gap < 1e-8


def test_verify_rejects_chains():
    doc = {
        "model": {"kind": "aa_chain", "n_sites": 4},
        "baths": [{"site": 1, "memory": 2}],
        "evolution": {"n_steps": 2},
        "initial_state": {"kind": "neel_bell"},
        "measures": ["imbalance"],
    }
    with pytest.raises(ConfigurationError):
        run_panel("main", validate_config(doc), verify=True)


def test_sweep_point_matches_the_plain_run(tmp_path):
    doc = small_doc(sweep=[{"path": "baths.0.temperature", "values": [0.2], "label": "T"}])
    cfg = validate_config(doc)
    columns = run_sweep(cfg, tmp_path, workers=1)
    assert columns["T"] == [0.2]
    plain = run_panel("main", validate_config(small_doc()))
    assert columns["concurrence_full"][0] == pytest.approx(plain.value_at("concurrence", "full", 5), abs=1e-14)
    assert columns["coherence_markov"][0] == pytest.approx(plain.value_at("coherence", "markov", 5), abs=1e-14)
    assert (tmp_path / "sweep.csv").read_text().splitlines()[0].startswith("T,")


def test_sweep_grid_is_the_cartesian_product():
    doc = small_doc(sweep=[
        {"path": "baths.0.temperature", "values": [0.1, 0.2, 0.3]},
        {"path": "baths.0.memory", "values": [1, 2]},
    ])
    points = sweep_points(validate_config(doc))
    assert [values for values, _ in points] == [(t, m) for t in (0.1, 0.2, 0.3) for m in (1, 2)]
    assert points[-1][1].baths[0].memory == 2
    with pytest.raises(ConfigurationError):
        sweep_points(validate_config(small_doc()))


def test_run_config_dispatches():
    assert hasattr(run_config(validate_config(small_doc(methods=["full"]))), "panels")


def test_sweep_summary_records_provenance_per_point(tmp_path):
    doc = small_doc(sweep=[{"path": "baths.0.temperature", "values": [0.2, 0.5], "label": "T"}])
    run_sweep(validate_config(doc), tmp_path, workers=1)
    summary = json.loads((tmp_path / "summary.json").read_text())
    points = summary["point_diagnostics"]
    assert [p["axes"] for p in points] == [{"T": 0.2}, {"T": 0.5}]
    checksums = [p["eta_checksums"]["1"] for p in points]
    assert len(set(checksums)) == 2 and all(len(c) == 64 for c in checksums)
    for p in points:
        assert p["process_tensors"]["1"]["memory_cutoff"] == 3
        assert set(p["methods"]) == {"full", "markov"}
        assert p["methods"]["full"]["peak_bond"] >= 1
        assert "discarded_weight" in p["methods"]["full"]


def test_bath_substeps_keep_the_output_grid():
    doc = small_doc(evolution={"delta_t": 0.2, "n_steps": 5, "bath_substeps": 2})
    panel = run_panel("main", validate_config(doc))
    assert len(panel.series["full"].concurrence) == 6
    np.testing.assert_allclose(panel.records["full"].times, panel.times)
    assert panel.records["markov"].metadata["bath_substeps"] == 2
    pt = panel.process_tensors[1]
    assert (pt.n_steps, pt.memory_cutoff, pt.delta_t) == (10, 6, pytest.approx(0.1))


def test_markov_only_panels_skip_the_full_process_tensor():
    panel = run_panel("main", validate_config(small_doc(methods=["markov"])))
    assert panel.process_tensors == {}
    assert panel.etas[1].memory_cutoff == 3


def _panels(name, overrides, labels=None):
    doc = preset_document(name)
    base = validate_config(doc).with_overrides(overrides) if overrides else validate_config(doc)
    keep = [p for p in base.panels if labels is None or p.label in labels]
    return run_experiment(base.model_copy(update={"panels": keep}))


def _first_index(values, predicate):
    return next((k for k, v in enumerate(values) if predicate(v)), len(values))


@pytest.mark.slow
def test_strong_coupling_memory_keeps_the_pair_entangled():
    result = _panels("memory-vs-redfield-strong", {"baths.*.memory": 20, "evolution.n_steps": 100})
    panel = result.panel("main")
    model = panel.config.build_model()
    w, v = np.linalg.eigh(model.hamiltonian())
    p = np.exp(-(w - w[0]) / 0.2)
    gibbs = concurrence((v * (p / p.sum())) @ v.conj().T)
    series = {m: panel.series[m].concurrence for m in ("full", "markov", "redfield")}
    # any sudden death of the full-memory run is followed by a revival
    assert series["full"][-1] > 0.01
    # the memoryless methods settle on the thermal state, which is entangled here
    assert gibbs > 0.2
    assert series["redfield"][-1] == pytest.approx(gibbs, abs=0.05)
    assert series["markov"][-1] == pytest.approx(gibbs, abs=0.1)


@pytest.mark.slow
def test_hot_bath_speeds_up_chain_relaxation():
    overrides = {"model.n_sites": 4, "evolution.n_steps": 50, "baths.*.memory": 10}
    imb = _panels("chain-imbalance-edge-bath-n6", overrides, {"mbl-T0.1", "mbl-T10", "al-T0.1", "al-T10"})
    for phase in ("mbl", "al"):
        cold = abs(np.mean(imb.panel(f"{phase}-T0.1").series["full"].imbalance))
        hot = abs(np.mean(imb.panel(f"{phase}-T10").series["full"].imbalance))
        assert hot < cold
    ends = _panels("chain-ends-edge-bath-n6", overrides, {"ergodic-T0.1", "ergodic-T10"})
    dead = {
        label: _first_index(ends.panel(label).series["full"].concurrence, lambda c: c <= 1e-12)
        for label in ("ergodic-T0.1", "ergodic-T10")
    }
    assert dead["ergodic-T10"] < 51
    assert dead["ergodic-T10"] <= dead["ergodic-T0.1"]


@pytest.mark.slow
def test_disordered_buffer_protects_the_pair():
    result = _panels("chain-buffer-n6", {"baths.*.memory": 10}, {"no-buffer", "mbl-buffer", "al-buffer"})
    reach = {
        p.label: _first_index(p.series["full"].concurrence, lambda c: c <= 0.1) for p in result.panels
    }
    assert reach["no-buffer"] < len(result.panel("no-buffer").times)
    assert reach["al-buffer"] >= reach["mbl-buffer"] > reach["no-buffer"]


@pytest.mark.slow
def test_drive_slows_the_loss_of_teleportation_fidelity():
    result = _panels("driven-teleport", {"evolution.n_steps": 40, "baths.*.memory": 10})
    mean = {p.label: float(np.mean(p.series["full"].fidelity)) for p in result.panels}
    assert mean["Omega100"] > mean["Omega0"]
    assert mean["Omega10"] > mean["Omega0"]


def test_resonance_flux_is_largest_in_the_ergodic_phase():
    result = _panels("chain-resonance-n6", {}, {"ergodic-T1", "mbl-T1", "al-T1"})
    flux = {p.label: p.resonance.total_flux for p in result.panels}
    assert flux["ergodic-T1"] > flux["mbl-T1"] > flux["al-T1"]
