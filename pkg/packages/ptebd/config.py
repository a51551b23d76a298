# packages/ptebd/config.py
"""
Experiment configuration. A config is a JSON document validated into
``ExperimentConfig``; panels and sweep axes address fields by dotted path
(``"model.h"``, ``"baths.1.temperature"``, ``"baths.*.memory"``), list indices
0-based, ``*`` meaning every element.
"""
from __future__ import annotations

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .bath import SpectralDensity
from .errors import ConfigurationError
from .measures import MEASURE_NAMES
from .models import (
    INV_GOLDEN,
    AAChainModel,
    DrivenQubitModel,
    SpinBosonModel,
    SystemModel,
    TwoQubitModel,
    UncoupledQubits,
    basis_state,
    bell_state,
    buffer_bell_state,
    ground_state,
    neel_bell_state,
)
from .tensor_core import TruncationPolicy

logger = logging.getLogger(__name__)

ModelKind = Literal["two_qubit", "aa_chain", "driven_qubits", "spin_boson"]
Method = Literal["full", "markov", "redfield", "closed", "exact", "resonance"]
StateKind = Literal["ground", "basis", "bell", "neel_bell", "buffer"]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ------------ Blocks ------------
class ModelBlock(_Block):
    kind: ModelKind = "two_qubit"
    # two qubits
    omega1: float = 1.0
    omega2: float = 1.0
    # coupling between neighbours: 0.375 for two qubits, 1 for the chain when unset
    J: Optional[float] = None
    # chain
    n_sites: int = Field(8, ge=1, le=10)
    Delta: float = 1.0
    h: float = 0.0
    beta: float = INV_GOLDEN
    origin: int = Field(1, ge=1)
    # driven qubits
    omega: float = 1.0
    Lambda: float = 50.0
    Omega: float = 10.0
    n_qubits: int = Field(2, ge=1, le=2)
    # spin-boson
    epsilon: float = 1.0
    delta: float = 1.0

    @property
    def size(self) -> int:
        if self.kind == "two_qubit":
            return 2
        if self.kind == "aa_chain":
            return self.n_sites
        if self.kind == "driven_qubits":
            return self.n_qubits
        return 1

    def build(self, coupled_sites: Tuple[int, ...] = ()) -> SystemModel:
        if self.kind == "two_qubit":
            return TwoQubitModel(self.omega1, self.omega2, 0.375 if self.J is None else self.J)
        if self.kind == "aa_chain":
            return AAChainModel(
                n_sites=self.n_sites, J=1.0 if self.J is None else self.J, Delta=self.Delta, h=self.h,
                beta=self.beta, coupled_sites=tuple(coupled_sites), origin=self.origin,
            )
        if self.kind == "spin_boson":
            return SpinBosonModel(self.epsilon, self.delta)
        qubit = DrivenQubitModel(self.omega, self.Lambda, self.Omega)
        return qubit if self.n_qubits == 1 else UncoupledQubits((qubit,) * self.n_qubits)


class BathBlock(_Block):
    site: int = Field(1, ge=1)
    family: Literal["exponential", "gaussian"] = "exponential"
    alpha: float = Field(0.1, ge=0.0)
    zeta: float = Field(1.0, gt=0.0)
    omega_c: float = Field(4.0, gt=0.0)
    temperature: float = Field(0.2, ge=0.0)
    memory: int = Field(40, ge=1)

    def spectral(self) -> SpectralDensity:
        return SpectralDensity(self.family, self.alpha, self.zeta, self.omega_c)


class EvolutionBlock(_Block):
    delta_t: float = Field(0.2, gt=0.0)
    n_steps: int = Field(100, ge=1)
    epsilon: float = Field(1e-6, gt=0.0, lt=1.0)
    xi: float = Field(1e-5, gt=0.0, lt=1.0)
    max_bond: Optional[int] = Field(None, ge=1)
    # bath influence sampled this many times per step; memory stays in units of delta_t
    bath_substeps: int = Field(1, ge=1)

    def tebd_policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.epsilon, self.max_bond)

    def pt_policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.xi, self.max_bond)


class InitialStateBlock(_Block):
    kind: StateKind = "ground"
    bits: Optional[str] = None
    pair: Optional[Tuple[int, int]] = None

    def vector(self, model: SystemModel) -> np.ndarray:
        """Pure initial state as a vector; every supported kind is pure."""
        n = model.n_sites
        if self.kind == "ground":
            return np.linalg.eigh(ground_state(model))[1][:, -1]
        if self.kind == "basis":
            bits = self.bits or "0" * n
            if len(bits) != n:
                raise ConfigurationError(f"initial_state.bits has {len(bits)} sites, model has {n}")
            psi = np.zeros(2 ** n, dtype=complex)
            psi[int(basis_state(bits).diagonal().real.argmax())] = 1.0
            return psi
        if self.kind == "bell":
            if n != 2:
                raise ConfigurationError(f"bell initial state needs two sites, model has {n}")
            return np.linalg.eigh(bell_state())[1][:, -1]
        if self.kind == "neel_bell":
            return neel_bell_state(n)
        return buffer_bell_state(n, self.pair or (n // 2, n // 2 + 1))


class PanelBlock(_Block):
    label: str
    overrides: Dict[str, Any] = Field(default_factory=dict)


class SweepAxis(_Block):
    path: str
    values: List[Any] = Field(min_length=1)
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label or self.path


class OutputBlock(_Block):
    directory: Optional[str] = None
    readout_time: Optional[float] = None


# ------------ Experiment ------------
class ExperimentConfig(_Block):
    name: str = "experiment"
    description: str = ""
    model: ModelBlock = Field(default_factory=ModelBlock)
    baths: List[BathBlock] = Field(default_factory=list)
    evolution: EvolutionBlock = Field(default_factory=EvolutionBlock)
    initial_state: InitialStateBlock = Field(default_factory=InitialStateBlock)
    measures: List[str] = Field(default_factory=lambda: ["concurrence"])
    methods: List[Method] = Field(default_factory=lambda: ["full"])
    pair: Optional[Tuple[int, int]] = None
    panels: List[PanelBlock] = Field(default_factory=list)
    sweep: List[SweepAxis] = Field(default_factory=list)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if not self.methods:
            raise ValueError("no methods requested")
        if not self.measures and set(self.methods) != {"resonance"}:
            raise ValueError("no observables requested")
        unknown = [m for m in self.measures if m not in MEASURE_NAMES]
        if unknown:
            raise ValueError(f"unknown measures {unknown}; choose from {list(MEASURE_NAMES)}")
        n = self.model.size
        if "imbalance" in self.measures and self.model.kind != "aa_chain":
            raise ValueError("imbalance is defined for aa_chain models only")
        if n == 1 and set(self.measures) - {"coherence"}:
            raise ValueError("a single-site model supports the coherence measure only")
        if self.model.kind == "driven_qubits" and {"exact", "redfield"} & set(self.methods):
            raise ValueError("exact and redfield methods need a time-independent model")
        sites = [b.site for b in self.baths]
        if len(set(sites)) != len(sites):
            raise ValueError(f"two baths attached to the same site: {sites}")
        for s in sites:
            if s > n:
                raise ValueError(f"bath site {s} does not exist in a {n}-site model")
        for b in self.baths:
            if b.memory > self.evolution.n_steps:
                raise ValueError(f"bath memory {b.memory} exceeds n_steps={self.evolution.n_steps}")
        if len(self.sweep) > 2:
            raise ValueError(f"at most two sweep axes, got {len(self.sweep)}")
        if self.sweep and self.panels:
            raise ValueError("sweep axes and panels cannot be combined")
        chain_only = {"closed", "resonance"} & set(self.methods)
        if chain_only and self.model.kind != "aa_chain":
            raise ValueError(f"methods {sorted(chain_only)} need an aa_chain model")
        if "resonance" in self.methods and not self.baths:
            raise ValueError("resonance analysis needs a bath")
        bath_methods = {"full", "markov", "redfield"} & set(self.methods)
        if bath_methods and not self.baths:
            raise ValueError(f"methods {sorted(bath_methods)} need at least one bath")
        pair = self.pair
        if pair is not None and not (1 <= pair[0] < pair[1] <= n):
            raise ValueError(f"pair {pair} must be two distinct sites within 1..{n}")
        if self.output.readout_time is not None:
            last = self.evolution.delta_t * self.evolution.n_steps
            if not 0 <= self.output.readout_time <= last + 1e-9:
                raise ValueError(f"readout_time {self.output.readout_time} outside [0, {last:g}]")
        return self

    # -- derived --
    def coupled_sites(self) -> Tuple[int, ...]:
        return tuple(sorted(b.site for b in self.baths))

    def build_model(self) -> SystemModel:
        return self.model.build(self.coupled_sites())

    def resolved_pair(self) -> Tuple[int, int]:
        """Sites whose two-qubit state the correlation measures read."""
        if self.pair is not None:
            return tuple(self.pair)
        n = self.model.size
        if self.initial_state.kind == "buffer":
            return tuple(self.initial_state.pair or (n // 2, n // 2 + 1))
        return (1, 2) if n <= 2 else (1, n)

    def readout_index(self) -> int:
        ev = self.evolution
        if self.output.readout_time is None:
            return ev.n_steps
        return int(round(self.output.readout_time / ev.delta_t))

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        doc = self.model_dump(mode="json")
        for path, value in overrides.items():
            set_path(doc, path, value)
        return validate_config(doc, f"{self.name} overrides")

    def expand_panels(self) -> List[Tuple[str, "ExperimentConfig"]]:
        if not self.panels:
            return [("main", self)]
        base = self.model_copy(update={"panels": []})
        return [(p.label, base.with_overrides(p.overrides)) for p in self.panels]


# ------------ Dotted paths ------------
def set_path(doc: Dict[str, Any], path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path; ``*`` fans out over a list."""
    parts = path.split(".")
    if not all(parts):
        raise ConfigurationError(f"malformed path {path!r}")
    _assign(doc, parts, copy.deepcopy(value), path)


def _assign(node: Any, parts: List[str], value: Any, path: str) -> None:
    head, rest = parts[0], parts[1:]
    if isinstance(node, list):
        if head == "*":
            targets = range(len(node))
        elif head.isdigit() and int(head) < len(node):
            targets = [int(head)]
        else:
            raise ConfigurationError(f"{path}: list index {head!r} out of range (length {len(node)})")
        for i in targets:
            if rest:
                _assign(node[i], rest, value, path)
            else:
                node[i] = copy.deepcopy(value)
        return
    if not isinstance(node, dict):
        raise ConfigurationError(f"{path}: cannot descend into {type(node).__name__} at {head!r}")
    if not rest:
        node[head] = value
        return
    if head not in node or node[head] is None:
        raise ConfigurationError(f"{path}: no field {head!r}")
    _assign(node[head], rest, value, path)


# ------------ Loading ------------
def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        lines.append(f"{loc}: {err.get('msg')}")
    return "; ".join(lines)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return validate_config(doc, source)


def validate_config(doc: Any, source: str = "<config>") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigurationError(f"{source}: {_format_validation(exc)}") from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} not found")
    logger.info("loading config %s", path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
