# packages/ptebd/runner.py
"""
Experiment runner shared by the CLI and the HTTP service: builds η tables and process
tensors once per run, evolves every panel with the requested methods and writes
per-panel CSVs, ``diagnostics.csv`` and ``summary.json``.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .bath import EtaTable, eta_coefficients
from .config import ExperimentConfig
from .errors import ConfigurationError, NumericError
from .evolution import EvolutionRecord, closed_tebd_evolve, markov_evolve, pt_tebd_evolve
from .export import columns_to_rows, write_csv, write_json
from .liouville import embed, pure_state
from .measures import CorrelationSeries, imbalance
from .models import ResonanceReport, SystemModel, resonance_report, single_particle_ipr
from .process_tensor import ProcessTensor, ProcessTensorCache
from .reference import MAX_PATHS, bloch_redfield_evolve, exact_evolve, path_sum
from .tensor_core import EXACT

logger = logging.getLogger(__name__)

VERIFY_TOL = 1e-8


# ------------ Caches ------------
class BathCache:
    """η tables and process tensors reused across the panels of one run."""

    def __init__(self) -> None:
        self._eta: Dict[tuple, EtaTable] = {}
        self.process_tensors = ProcessTensorCache()

    def eta(self, bath, delta_t: float, n_steps: int, memory: int) -> EtaTable:
        key = (bath.family, bath.alpha, bath.zeta, bath.omega_c, bath.temperature, delta_t, n_steps, memory)
        if key not in self._eta:
            self._eta[key] = eta_coefficients(bath.spectral(), bath.temperature, delta_t, n_steps, memory)
        return self._eta[key]

    def baths_for(
        self, cfg: ExperimentConfig, model: SystemModel, tensors: bool = True,
    ) -> Tuple[Dict[int, EtaTable], Dict[int, ProcessTensor]]:
        """η tables (and process tensors when ``tensors``) on the bath grid of ``cfg``."""
        ev = cfg.evolution
        s = ev.bath_substeps
        etas: Dict[int, EtaTable] = {}
        pts: Dict[int, ProcessTensor] = {}
        for bath in cfg.baths:
            etas[bath.site] = self.eta(bath, ev.delta_t / s, ev.n_steps * s, bath.memory * s)
            if tensors:
                pts[bath.site] = self.process_tensors.get(
                    etas[bath.site], ev.n_steps * s, model.coupling_operator(bath.site), ev.pt_policy()
                )
        return etas, pts


# ------------ Results ------------
@dataclass
class PanelResult:
    label: str
    config: ExperimentConfig
    records: Dict[str, EvolutionRecord] = field(default_factory=dict)
    series: Dict[str, CorrelationSeries] = field(default_factory=dict)
    etas: Dict[int, EtaTable] = field(default_factory=dict)
    process_tensors: Dict[int, ProcessTensor] = field(default_factory=dict)
    resonance: Optional[ResonanceReport] = None
    mean_ipr: Optional[float] = None
    verify_gap: Optional[float] = None

    @property
    def times(self) -> List[float]:
        ev = self.config.evolution
        return [k * ev.delta_t for k in range(ev.n_steps + 1)]

    def measure_columns(self, measure: str) -> Dict[str, List[float]]:
        columns: Dict[str, List[float]] = {"t": self.times}
        for method, series in self.series.items():
            values = getattr(series, measure)
            if values is not None:
                columns[f"{measure}_{method}"] = [float(v) for v in values]
        return columns

    def value_at(self, measure: str, method: str, index: int) -> float:
        values = getattr(self.series[method], measure)
        if values is None:
            return math.nan
        return float(values[index])

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "label": self.label,
            "methods": {m: _record_summary(r) for m, r in self.records.items()},
            "eta_checksums": {str(s): eta.checksum for s, eta in self.etas.items()},
            "process_tensors": {str(s): pt.diagnostics() for s, pt in self.process_tensors.items()},
        }
        if self.resonance is not None:
            out["resonance"] = {"transitions": self.resonance.count, "total_flux": self.resonance.total_flux}
        if self.mean_ipr is not None:
            out["mean_single_particle_ipr"] = self.mean_ipr
        if self.verify_gap is not None:
            out["path_sum_gap"] = self.verify_gap
        return out


@dataclass
class RunResult:
    config: ExperimentConfig
    panels: List[PanelResult]
    wall_time: float = 0.0
    files: List[Path] = field(default_factory=list)

    def panel(self, label: str) -> PanelResult:
        for p in self.panels:
            if p.label == label:
                return p
        raise KeyError(label)

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.config.name,
            "version": __version__,
            "config": self.config.model_dump(mode="json"),
            "panels": [p.summary() for p in self.panels],
            "wall_time": self.wall_time,
            "files": [p.name for p in self.files],
        }


def _record_summary(record: EvolutionRecord) -> Dict[str, Any]:
    out = record.summary()
    out.pop("wall_time", None)
    return out


# ------------ Panels ------------
def _measure_sites(cfg: ExperimentConfig, model: SystemModel) -> Tuple[int, ...]:
    return (1,) if model.n_sites == 1 else tuple(cfg.resolved_pair())


def _series(cfg: ExperimentConfig, record: EvolutionRecord, sites: Tuple[int, ...]) -> CorrelationSeries:
    n = record.n_sites
    names = list(cfg.measures)
    two_site = [m for m in names if m != "imbalance"]
    states = [record.reduced_state(k, sites) for k in range(record.n_steps + 1)] if two_site else []
    imb = None
    if "imbalance" in names:
        imb = record.observables.get("imbalance")
        if imb is None:
            whole = tuple(range(1, n + 1))
            imb = [imbalance(rho, n) for rho in record.states[whole]]
    return CorrelationSeries.from_states(record.times, states, names, imb)


def _evolve(method: str, cfg: ExperimentConfig, model: SystemModel, psi0: np.ndarray,
            result: PanelResult, sites: Tuple[int, ...]) -> EvolutionRecord:
    ev = cfg.evolution
    rho0 = pure_state(psi0)
    times = [k * ev.delta_t for k in range(ev.n_steps + 1)]
    track = "imbalance" in cfg.measures
    if method in ("full", "markov"):
        s = ev.bath_substeps
        if method == "full":
            evolve, baths = pt_tebd_evolve, result.process_tensors
        else:
            evolve, baths = markov_evolve, result.etas
        return evolve(model, baths, rho0, ev.n_steps * s, ev.delta_t / s, ev.tebd_policy(),
                      readout=[sites], track_imbalance=track, stride=s)
    if method == "redfield":
        baths = {b.site: (b.spectral(), b.temperature) for b in cfg.baths}
        return bloch_redfield_evolve(model, baths, rho0, times)
    if method == "exact":
        return exact_evolve(model.hamiltonian(), rho0, times)
    if method == "closed":
        pair = sites if len(sites) == 2 else None
        return closed_tebd_evolve(model, psi0, ev.n_steps, ev.delta_t, ev.tebd_policy(), pair=pair)
    raise ConfigurationError(f"method {method!r} produces no time series")


def verify_panel(cfg: ExperimentConfig, model: SystemModel, psi0: np.ndarray, cache: BathCache) -> float:
    """
    Max-norm gap between PT-TEBD and explicit path summation for the first bath alone,
    over as many steps as the path budget allows.
    """
    if model.n_sites > 2 or not cfg.baths:
        raise ConfigurationError("--verify needs a model with at most two sites and at least one bath")
    if model.time_dependent:
        raise ConfigurationError("--verify needs a time-independent model")
    bath = cfg.baths[0]
    dim = model.local_dim ** model.n_sites
    budget = int(math.log(MAX_PATHS) / math.log(dim * dim))
    n_steps = max(1, min(cfg.evolution.n_steps, budget))
    dt = cfg.evolution.delta_t
    eta = eta_coefficients(bath.spectral(), bath.temperature, dt, n_steps, min(bath.memory, n_steps))
    pt = cache.process_tensors.get(eta, n_steps, model.coupling_operator(bath.site), EXACT)
    rho0 = pure_state(psi0)
    record = pt_tebd_evolve(model, {bath.site: pt}, rho0, n_steps, dt, EXACT,
                            readout=[tuple(range(1, model.n_sites + 1))], track_imbalance=False)
    coupling = embed(model.coupling_operator(bath.site), bath.site, model.n_sites, model.local_dim)
    reference = path_sum(eta, model.hamiltonian(), coupling, rho0, n_steps, grid="window")
    gap = float(np.max(np.abs(record.states[tuple(range(1, model.n_sites + 1))][-1] - reference)))
    logger.info("path-sum check over %d steps: max gap %.3e", n_steps, gap)
    if gap > VERIFY_TOL:
        raise NumericError(f"PT-TEBD disagrees with path summation by {gap:.3e} (> {VERIFY_TOL:g})")
    return gap


def run_panel(label: str, cfg: ExperimentConfig, cache: Optional[BathCache] = None, verify: bool = False) -> PanelResult:
    cache = cache or BathCache()
    model = cfg.build_model()
    psi0 = cfg.initial_state.vector(model)
    sites = _measure_sites(cfg, model)
    result = PanelResult(label=label, config=cfg)

    if {"full", "markov"} & set(cfg.methods):
        result.etas, result.process_tensors = cache.baths_for(cfg, model, tensors="full" in cfg.methods)
    for method in cfg.methods:
        if method == "resonance":
            bath = cfg.baths[0]
            result.resonance = resonance_report(model, bath.spectral(), bath.temperature)
            result.mean_ipr = float(np.mean(single_particle_ipr(model)))
            continue
        logger.info("panel %s: running %s", label, method)
        record = _evolve(method, cfg, model, psi0, result, sites)
        result.records[method] = record
        result.series[method] = _series(cfg, record, sites)
    if verify:
        result.verify_gap = verify_panel(cfg, model, psi0, cache)
    return result


# ------------ Runs ------------
def run_experiment(
    cfg: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    verify: bool = False,
) -> RunResult:
    started = time.perf_counter()
    cache = BathCache()
    panels = [run_panel(label, panel_cfg, cache, verify) for label, panel_cfg in cfg.expand_panels()]
    result = RunResult(config=cfg, panels=panels)
    result.wall_time = time.perf_counter() - started
    if out_dir is not None:
        result.files = write_outputs(result, Path(out_dir))
    logger.info("run %s finished: %d panels in %.2fs", cfg.name, len(panels), result.wall_time)
    return result


def write_outputs(result: RunResult, out_dir: Path) -> List[Path]:
    files: List[Path] = []
    diag_rows: List[List[Any]] = []
    for panel in result.panels:
        for measure in panel.config.measures:
            columns = panel.measure_columns(measure)
            if len(columns) > 1:
                files.append(write_csv(out_dir / f"{panel.label}_{measure}.csv", list(columns), columns_to_rows(columns)))
        if panel.resonance is not None:
            rows = [[tr.omega, tr.weight, tr.matrix_element] for tr in panel.resonance.transitions]
            files.append(write_csv(out_dir / f"{panel.label}_resonance.csv", ["omega", "weight", "matrix_element"], rows))
        for method, record in panel.records.items():
            s = record.summary()
            diag_rows.append([panel.label, method, record.n_steps, s["peak_bond"],
                              s["discarded_weight"], s["max_trace_error"]])
    header = ["panel", "method", "n_steps", "peak_bond", "discarded_weight", "max_trace_error"]
    files.append(write_csv(out_dir / "diagnostics.csv", header, diag_rows))
    files.append(out_dir / "summary.json")
    write_json(out_dir / "summary.json", result.summary())
    logger.info("wrote %d files to %s", len(files), out_dir)
    return files


# ------------ Sweeps ------------
def _sweep_point(doc: Dict[str, Any]) -> Tuple[Dict[str, float], Dict[str, Any]]:
    """Readout values of one grid point and the point's provenance."""
    cfg = ExperimentConfig.model_validate(doc)
    panel = run_panel("point", cfg)
    index = cfg.readout_index()
    values = {
        f"{measure}_{method}": panel.value_at(measure, method, index)
        for method in panel.series for measure in cfg.measures
    }
    provenance = panel.summary()
    provenance.pop("label")
    return values, provenance


def sweep_points(cfg: ExperimentConfig) -> List[Tuple[Tuple[Any, ...], ExperimentConfig]]:
    if not cfg.sweep:
        raise ConfigurationError(f"config {cfg.name!r} declares no sweep axes")
    base = cfg.model_copy(update={"sweep": []})
    points = []
    for values in itertools.product(*(axis.values for axis in cfg.sweep)):
        overrides = {axis.path: v for axis, v in zip(cfg.sweep, values)}
        points.append((values, base.with_overrides(overrides)))
    return points


def run_sweep(
    cfg: ExperimentConfig,
    out_dir: Optional[Union[str, Path]] = None,
    workers: int = 1,
) -> Dict[str, List[Any]]:
    """One independent run per grid point; returns the sweep table as columns."""
    started = time.perf_counter()
    points = sweep_points(cfg)
    logger.info("sweep %s: %d points on %d workers", cfg.name, len(points), workers)
    docs = [p.model_dump(mode="json") for _, p in points]
    results = Parallel(n_jobs=max(1, workers), prefer="processes")(delayed(_sweep_point)(doc) for doc in docs)
    values = [v for v, _ in results]

    columns: Dict[str, List[Any]] = {axis.name: [v[i] for v, _ in points] for i, axis in enumerate(cfg.sweep)}
    for name in values[0]:
        columns[name] = [row[name] for row in values]
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / "sweep.csv", list(columns), columns_to_rows(columns))
        write_json(out_dir / "summary.json", {
            "name": cfg.name,
            "version": __version__,
            "config": cfg.model_dump(mode="json"),
            "points": len(points),
            "point_diagnostics": [
                dict(axes={axis.name: v[i] for i, axis in enumerate(cfg.sweep)}, **provenance)
                for (v, _), (_, provenance) in zip(points, results)
            ],
            "wall_time": time.perf_counter() - started,
        })
    return columns


def run_config(cfg: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None,
                  workers: int = 1, verify: bool = False) -> Union[RunResult, Dict[str, List[Any]]]:
    """Dispatch on whether the config declares sweep axes."""
    if cfg.sweep:
        return run_sweep(cfg, out_dir, workers)
    return run_experiment(cfg, out_dir, verify)
