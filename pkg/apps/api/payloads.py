# apps/api/payloads.py
from typing import Any

import numpy as np
from fastapi import HTTPException

from packages.ptebd.errors import (
    ArgumentError,
    CapacityError,
    ConfigurationError,
    PtebdError,
    ShapeError,
    UndefinedValueError,
)


def _entry(x: Any) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    if isinstance(x, dict):
        return complex(x.get("re", 0.0), x.get("im", 0.0))
    if isinstance(x, (int, float)):
        return complex(x)
    raise HTTPException(status_code=400, detail=f"cannot read {x!r} as a number")


def ensure_vector(payload: Any) -> np.ndarray:
    """
    Normalize a JSON state vector to a complex array.
    Accepts [a, b, ...] with real entries, [re, im] pairs or {"re": .., "im": ..} entries,
    or {"re": [...], "im": [...]}.
    """
    if isinstance(payload, dict) and isinstance(payload.get("re"), list):
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload.get("im") or np.zeros_like(re), dtype=float)
        if re.shape != im.shape:
            raise HTTPException(status_code=400, detail="re and im parts differ in shape")
        return re + 1j * im
    if not isinstance(payload, list) or not payload:
        raise HTTPException(status_code=400, detail="state must be a non-empty list")
    return np.array([_entry(x) for x in payload], dtype=complex)


def ensure_matrix(payload: Any) -> np.ndarray:
    """
    Normalize a JSON matrix to a square complex array; rows use the entry forms of
    ensure_vector, or the whole matrix is {"re": [[...]], "im": [[...]]}.
    """
    if isinstance(payload, dict) and isinstance(payload.get("re"), list):
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload.get("im") or np.zeros_like(re), dtype=float)
        if re.shape != im.shape:
            raise HTTPException(status_code=400, detail="re and im parts differ in shape")
        m = re + 1j * im
    else:
        if not isinstance(payload, list) or not all(isinstance(r, list) for r in payload):
            raise HTTPException(status_code=400, detail="matrix must be a list of rows")
        widths = {len(r) for r in payload}
        if len(widths) != 1:
            raise HTTPException(status_code=400, detail="matrix rows differ in length")
        m = np.array([[_entry(x) for x in row] for row in payload], dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise HTTPException(status_code=400, detail=f"matrix must be square, got shape {list(m.shape)}")
    return m


def http_error(exc: PtebdError) -> HTTPException:
    if isinstance(exc, (ConfigurationError, ArgumentError, ShapeError)):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, UndefinedValueError):
        return HTTPException(status_code=422, detail=str(exc))
    if isinstance(exc, CapacityError):
        return HTTPException(status_code=413, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))
