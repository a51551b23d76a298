import pytest

from packages.ptebd.errors import ConfigurationError
from packages.ptebd.presets import ALIASES, PRESETS, preset_config, preset_document, preset_names, resolve_name


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_validates(name):
    cfg = preset_config(name)
    assert cfg.name == name
    assert cfg.description
    for label, panel in cfg.expand_panels():
        assert label
        assert panel.evolution.n_steps >= max((b.memory for b in panel.baths), default=1)


def test_chain_presets_come_in_two_sizes():
    names = preset_names()
    for base in ("chain-closed", "chain-buffer", "chain-resonance", "chain-ends-center-bath"):
        assert base in names and f"{base}-n6" in names
        assert preset_config(f"{base}-n6").model.n_sites == 6


def test_documents_are_independent_copies():
    doc = preset_document("pair-equilibrium")
    doc["baths"][0]["alpha"] = 9.0
    assert preset_document("pair-equilibrium")["baths"][0]["alpha"] == 0.1


def test_memory_scan_grid():
    cfg = preset_config("memory-scan")
    assert [axis.name for axis in cfg.sweep] == ["memory", "T2"]
    assert cfg.readout_index() == cfg.evolution.n_steps


def test_unknown_preset():
    with pytest.raises(ConfigurationError, match="unknown preset"):
        preset_config("fig-1")


@pytest.mark.parametrize("name", sorted(n for n in PRESETS if n.startswith(("pair-", "memory-scan"))))
def test_correlation_presets_start_from_the_ground_state(name):
    for _, panel in preset_config(name).expand_panels():
        assert panel.initial_state.kind == "ground"


@pytest.mark.parametrize("name", sorted(n for n in PRESETS if n.startswith("memory-vs-redfield")))
def test_redfield_comparisons_start_from_the_product_state(name):
    state = preset_config(name).initial_state
    assert (state.kind, state.bits) == ("basis", "00")


def test_driven_teleport_samples_the_bath_within_each_step():
    cfg = preset_config("driven-teleport")
    assert cfg.initial_state.kind == "bell"
    assert cfg.evolution.bath_substeps == 4


def test_figure_aliases_resolve_to_presets():
    assert resolve_name("fig10a") == "memory-vs-redfield-weak"
    assert resolve_name("fig11-closed") == "chain-closed"
    assert preset_config("fig16").name == "driven-teleport"
    assert set(ALIASES.values()) <= set(PRESETS)
    assert preset_document("fig5") == preset_document("pair-equilibrium")
