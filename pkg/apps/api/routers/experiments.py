# apps/api/routers/experiments.py
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from packages.ptebd import settings
from packages.ptebd.bath import SpectralDensity, eta_coefficients
from packages.ptebd.config import validate_config
from packages.ptebd.errors import ConfigurationError, PtebdError
from packages.ptebd.presets import preset_config, preset_document, preset_names
from packages.ptebd.runner import run_experiment, run_sweep

from ..payloads import http_error

router = APIRouter()


# ------------ Models ------------
class RunIn(BaseModel):
    preset: Optional[str] = None
    config: Optional[Dict[str, Any]] = None
    overrides: Dict[str, Any] = Field(default_factory=dict)
    write: bool = True


class EtaIn(BaseModel):
    family: Literal["exponential", "gaussian"] = "exponential"
    alpha: float = Field(0.1, ge=0.0)
    zeta: float = Field(1.0, gt=0.0)
    omega_c: float = Field(4.0, gt=0.0)
    temperature: float = Field(0.2, ge=0.0)
    delta_t: float = Field(0.2, gt=0.0)
    n_steps: int = Field(10, ge=1, le=2000)
    memory: int = Field(10, ge=1)


class EtaOut(BaseModel):
    checksum: str
    spectral: Dict[str, Any]
    temperature: float
    delta_t: float
    n_steps: int
    memory_cutoff: int
    entries: Dict[str, List[List[float]]]


# ------------ Endpoints ------------
@router.get("/presets")
def presets() -> Dict[str, List[Dict[str, str]]]:
    return {"presets": [{"name": n, "description": preset_config(n).description} for n in preset_names()]}


@router.get("/presets/{name}")
def preset(name: str) -> Dict[str, Any]:
    try:
        return preset_document(name)
    except PtebdError as exc:
        raise http_error(exc)


@router.post("/experiments/run")
def run(body: RunIn) -> Dict[str, Any]:
    try:
        if (body.preset is None) == (body.config is None):
            raise ConfigurationError("give exactly one of 'preset' or 'config'")
        cfg = preset_config(body.preset) if body.preset else validate_config(body.config, "request")
        if body.overrides:
            cfg = cfg.with_overrides(body.overrides)
        out = Path(cfg.output.directory or Path(settings.OUT_DIR) / cfg.name) if body.write else None
        if cfg.sweep:
            return {"name": cfg.name, "sweep": run_sweep(cfg, out)}
        return run_experiment(cfg, out).summary()
    except PtebdError as exc:
        raise http_error(exc)


@router.post("/experiments/eta", response_model=EtaOut)
def eta(body: EtaIn) -> EtaOut:
    try:
        J = SpectralDensity(body.family, body.alpha, body.zeta, body.omega_c)
        table = eta_coefficients(J, body.temperature, body.delta_t, body.n_steps, body.memory)
    except PtebdError as exc:
        raise http_error(exc)
    return EtaOut(checksum=table.checksum, **table.to_dict())
