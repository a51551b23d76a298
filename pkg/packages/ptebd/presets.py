# packages/ptebd/presets.py
"""
Built-in experiment catalogue. Each preset is a plain config document; ``preset_config``
validates it into an ExperimentConfig. Chain scenarios ship at N=8 and as ``-n6``
variants small enough to cross-check against dense evolution.
"""
from __future__ import annotations

import copy
from typing import Any, Callable, Dict, List, Optional, Tuple

from .config import ExperimentConfig, validate_config
from .errors import ConfigurationError

Doc = Dict[str, Any]

EQ_TEMPERATURES = (0.1, 0.5, 1.0)
COLD = 0.01
HOT_TEMPERATURES = (0.01, 0.26, 0.51)
CHAIN_TEMPERATURES = (0.1, 1.0, 10.0)
# (label, h, Delta)
PHASES: Tuple[Tuple[str, float, float], ...] = (("ergodic", 0.6, 1.0), ("mbl", 4.0, 1.0), ("al", 4.0, 0.0))


def _bath(site: int, T: float, memory: int, alpha: float = 0.1, zeta: float = 1.0,
          family: str = "exponential", omega_c: float = 4.0) -> Doc:
    return {"site": site, "family": family, "alpha": alpha, "zeta": zeta,
            "omega_c": omega_c, "temperature": T, "memory": memory}


def _label(x: float) -> str:
    return format(x, "g")


# ------------ Two-qubit correlations ------------
def _two_qubit(name: str, description: str, zeta: float, delta_t: float, n_steps: int,
               memory: int, alpha: float = 0.1) -> Doc:
    return {
        "name": name,
        "description": description,
        "model": {"kind": "two_qubit"},
        "baths": [_bath(1, 0.1, memory, alpha, zeta), _bath(2, 0.1, memory, alpha, zeta)],
        "evolution": {"delta_t": delta_t, "n_steps": n_steps, "epsilon": 1e-6, "xi": 1e-5},
        "initial_state": {"kind": "ground"},
        "measures": ["coherence", "concurrence", "discord"],
        "methods": ["full", "markov"],
    }


def _equilibrium_panels() -> List[Doc]:
    return [{"label": f"eq-T{_label(T)}", "overrides": {"baths.*.temperature": T}} for T in EQ_TEMPERATURES]


def _gradient_panels(extra: Optional[Doc] = None) -> List[Doc]:
    panels = []
    for T in HOT_TEMPERATURES:
        overrides = {"baths.0.temperature": COLD, "baths.1.temperature": T}
        overrides.update(extra or {})
        panels.append({"label": f"noneq-dT{_label(round(T - COLD, 6))}", "overrides": overrides})
    return panels


def _pair_equilibrium() -> Doc:
    doc = _two_qubit("pair-equilibrium", "Ohmic baths in equilibrium at three temperatures", 1.0, 0.2, 150, 40)
    doc["panels"] = _equilibrium_panels()
    return doc


def _pair_strong_gradient() -> Doc:
    doc = _two_qubit("pair-strong-gradient", "Ohmic baths with a temperature gradient", 1.0, 0.2, 150, 40, alpha=0.32)
    full = _gradient_panels({"methods": ["full"]})
    markov = _gradient_panels({
        "methods": ["markov"], "evolution.delta_t": 0.05, "evolution.n_steps": 600, "baths.*.memory": 160,
    })
    for p in markov:
        p["label"] += "-markov"
    doc["panels"] = full + markov
    return doc


def _pair_subohmic() -> Doc:
    doc = _two_qubit("pair-subohmic", "sub-Ohmic baths, equilibrium and gradient", 0.6, 0.2, 150, 50)
    doc["panels"] = _equilibrium_panels() + _gradient_panels()
    return doc


def _pair_superohmic() -> Doc:
    doc = _two_qubit("pair-superohmic", "super-Ohmic baths, equilibrium and gradient", 2.0, 0.025, 800, 40)
    doc["panels"] = _equilibrium_panels() + _gradient_panels()
    return doc


def _memory_scan(zeta: float = 1.0, delta_t: float = 0.2, suffix: str = "") -> Doc:
    n_steps = int(round(20.0 / delta_t))
    doc = _two_qubit(f"memory-scan{suffix}", "memory cutoff and temperature gradient at t=20", zeta, delta_t, n_steps, 40)
    doc["baths"][0]["temperature"] = COLD
    doc["methods"] = ["full"]
    doc["output"] = {"readout_time": 20.0}
    doc["sweep"] = [
        {"path": "baths.*.memory", "values": [1, 10, 20, 40], "label": "memory"},
        {"path": "baths.1.temperature", "values": list(HOT_TEMPERATURES), "label": "T2"},
    ]
    return doc


def _memory_vs_redfield(alpha: float, suffix: str) -> Doc:
    doc = _two_qubit(f"memory-vs-redfield-{suffix}", f"PT-TEBD, one-step memory and Bloch-Redfield at alpha={alpha:g}",
                     1.0, 0.2, 150, 40, alpha=alpha)
    for b in doc["baths"]:
        b["temperature"] = 0.2
    doc["initial_state"] = {"kind": "basis", "bits": "00"}
    doc["measures"] = ["concurrence"]
    doc["methods"] = ["full", "markov", "redfield"]
    return doc


# ------------ Aubry-André chain ------------
def _phase_panels(temperatures=None) -> List[Doc]:
    panels = []
    for label, h, delta in PHASES:
        if temperatures is None:
            panels.append({"label": label, "overrides": {"model.h": h, "model.Delta": delta}})
            continue
        for T in temperatures:
            panels.append({
                "label": f"{label}-T{_label(T)}",
                "overrides": {"model.h": h, "model.Delta": delta, "baths.*.temperature": T},
            })
    return panels


def _chain(name: str, description: str, n: int, measures: List[str], methods: List[str],
           n_steps: int, epsilon: float = 1e-5) -> Doc:
    return {
        "name": name,
        "description": description,
        "model": {"kind": "aa_chain", "n_sites": n},
        "baths": [],
        "evolution": {"delta_t": 0.2, "n_steps": n_steps, "epsilon": epsilon, "xi": 1e-5},
        "initial_state": {"kind": "neel_bell"},
        "measures": measures,
        "methods": methods,
    }


def _closed_chain(n: int, suffix: str) -> Doc:
    doc = _chain(f"chain-closed{suffix}", "closed chain imbalance and end-to-end entanglement",
                 n, ["imbalance", "concurrence"], ["closed"], 200, epsilon=1e-6)
    doc["panels"] = _phase_panels()
    return doc


def _open_chain(name: str, description: str, n: int, site: int, measures: List[str]) -> Doc:
    doc = _chain(name, description, n, measures, ["full"], 100)
    doc["baths"] = [_bath(site, 0.1, 40)]
    doc["panels"] = _phase_panels(CHAIN_TEMPERATURES)
    return doc


def _buffer_chain(n: int, suffix: str) -> Doc:
    pair = [n // 2, n // 2 + 1]
    doc = _chain(f"chain-buffer{suffix}", "entanglement of a Bell pair behind a disordered buffer",
                 n, ["concurrence"], ["full"], 100)
    doc["baths"] = [_bath(1, 0.8, 40), _bath(n, 0.2, 40)]
    doc["initial_state"] = {"kind": "buffer", "pair": pair}
    doc["pair"] = pair
    bare = {
        "model.n_sites": 2, "model.origin": pair[0], "model.h": 4.0, "model.Delta": 1.0,
        "baths.1.site": 2, "initial_state.pair": [1, 2], "pair": [1, 2],
    }
    doc["panels"] = [{"label": "no-buffer", "overrides": bare}] + [
        {"label": f"{label}-buffer", "overrides": {"model.h": h, "model.Delta": delta}}
        for label, h, delta in PHASES
    ]
    return doc


def _resonance_chain(n: int, suffix: str) -> Doc:
    doc = _chain(f"chain-resonance{suffix}", "bath-resonant transitions of the chain eigenmodes", n, [], ["resonance"], 40)
    doc["baths"] = [_bath(1, 0.1, 1)]
    doc["panels"] = _phase_panels(CHAIN_TEMPERATURES)
    return doc


# ------------ Driven qubits ------------
def _driven_teleport() -> Doc:
    return {
        "name": "driven-teleport",
        "description": "teleportation fidelity of a driven Bell pair",
        "model": {"kind": "driven_qubits", "n_qubits": 2, "omega": 1.0, "Lambda": 50.0, "Omega": 0.0},
        "baths": [_bath(1, 0.2, 30, omega_c=5.0, family="gaussian"), _bath(2, 0.2, 30, omega_c=5.0, family="gaussian")],
        "evolution": {"delta_t": 0.1, "n_steps": 100, "epsilon": 1e-6, "xi": 1e-5, "bath_substeps": 4},
        "initial_state": {"kind": "bell"},
        "measures": ["concurrence", "fidelity"],
        "methods": ["full"],
        "panels": [{"label": f"Omega{_label(w)}", "overrides": {"model.Omega": w}} for w in (0.0, 10.0, 100.0)],
    }


def _catalogue() -> Dict[str, Callable[[], Doc]]:
    presets: Dict[str, Callable[[], Doc]] = {
        "pair-equilibrium": _pair_equilibrium,
        "pair-strong-gradient": _pair_strong_gradient,
        "pair-subohmic": _pair_subohmic,
        "pair-superohmic": _pair_superohmic,
        "memory-scan": _memory_scan,
        "memory-scan-subohmic": lambda: _memory_scan(0.6, 0.2, "-subohmic"),
        "memory-scan-superohmic": lambda: _memory_scan(2.0, 0.1, "-superohmic"),
        "memory-vs-redfield-weak": lambda: _memory_vs_redfield(0.001, "weak"),
        "memory-vs-redfield-moderate": lambda: _memory_vs_redfield(0.01, "moderate"),
        "memory-vs-redfield-strong": lambda: _memory_vs_redfield(0.1, "strong"),
        "driven-teleport": _driven_teleport,
    }
    for n, suffix in ((8, ""), (6, "-n6")):
        presets[f"chain-closed{suffix}"] = lambda n=n, s=suffix: _closed_chain(n, s)
        presets[f"chain-imbalance-edge-bath{suffix}"] = lambda n=n, s=suffix: _open_chain(
            f"chain-imbalance-edge-bath{s}", "imbalance with a bath on the first site", n, 1, ["imbalance"])
        presets[f"chain-ends-edge-bath{suffix}"] = lambda n=n, s=suffix: _open_chain(
            f"chain-ends-edge-bath{s}", "end-to-end entanglement with a bath on the first site",
            n, 1, ["concurrence"])
        presets[f"chain-ends-center-bath{suffix}"] = lambda n=n, s=suffix: _open_chain(
            f"chain-ends-center-bath{s}", "end-to-end entanglement with a bath on the fourth site",
            n, 4, ["concurrence"])
        presets[f"chain-buffer{suffix}"] = lambda n=n, s=suffix: _buffer_chain(n, s)
        presets[f"chain-resonance{suffix}"] = lambda n=n, s=suffix: _resonance_chain(n, s)
    return presets


PRESETS = _catalogue()

# figure-numbered alternate names
ALIASES: Dict[str, str] = {
    "fig5": "pair-equilibrium",
    "fig6": "pair-strong-gradient",
    "fig7": "pair-subohmic",
    "fig8": "pair-superohmic",
    "fig9": "memory-scan",
    "fig9a": "memory-scan",
    "fig9b": "memory-scan-subohmic",
    "fig9c": "memory-scan-superohmic",
    "fig10a": "memory-vs-redfield-weak",
    "fig10b": "memory-vs-redfield-moderate",
    "fig10c": "memory-vs-redfield-strong",
    "fig11": "chain-closed",
    "fig11-closed": "chain-closed",
    "fig12": "chain-imbalance-edge-bath",
    "fig13": "chain-ends-edge-bath",
    "fig14": "chain-ends-center-bath",
    "fig15": "chain-buffer",
    "fig16": "driven-teleport",
    "fig17": "chain-resonance",
}


def preset_names() -> List[str]:
    return sorted(PRESETS)


def resolve_name(name: str) -> str:
    """Canonical preset name for a preset or one of its aliases."""
    name = ALIASES.get(name, name)
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return name


def preset_document(name: str) -> Doc:
    return copy.deepcopy(PRESETS[resolve_name(name)]())


def preset_config(name: str) -> ExperimentConfig:
    return validate_config(preset_document(name), f"preset {name}")
