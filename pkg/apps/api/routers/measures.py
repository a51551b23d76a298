# apps/api/routers/measures.py
from __future__ import annotations

import math
from typing import Any, Dict, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel

from packages.ptebd.errors import PtebdError
from packages.ptebd.liouville import check_density_matrix
from packages.ptebd.measures import (
    concurrence,
    geometric_discord,
    imbalance,
    l1_coherence,
    teleport_fidelity,
    useful_for_teleportation,
)

from ..payloads import ensure_matrix, ensure_vector, http_error

router = APIRouter()


class DensityIn(BaseModel):
    rho: Any


class StateIn(BaseModel):
    state: Any
    n_sites: Optional[int] = None


@router.post("")
def measures(body: DensityIn) -> Dict[str, Any]:
    rho = ensure_matrix(body.rho)
    try:
        rho = check_density_matrix(rho)
        return {
            "coherence": l1_coherence(rho),
            "concurrence": concurrence(rho),
            "discord": geometric_discord(rho),
            "fidelity": teleport_fidelity(rho),
            "useful_for_teleportation": useful_for_teleportation(rho),
        }
    except PtebdError as exc:
        raise http_error(exc)


@router.post("/imbalance")
def chain_imbalance(body: StateIn) -> Dict[str, Any]:
    psi = ensure_vector(body.state)
    n = body.n_sites or max(0, int(round(math.log2(psi.size))))
    if n < 1 or 2 ** n != psi.size:
        raise HTTPException(status_code=400, detail=f"state of length {psi.size} is not a qubit chain")
    try:
        return {"n_sites": n, "imbalance": imbalance(psi, n)}
    except PtebdError as exc:
        raise http_error(exc)
