# apps/api/main.py
from __future__ import annotations

import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from packages.ptebd import __version__, settings

from .routers.experiments import router as experiments_router
from .routers.measures import router as measures_router

logging.basicConfig(level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

app = FastAPI(title="PT-TEBD Lab", version=__version__)

# ---------------- CORS ----------------
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins(),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# ---------------- routers ----------------
app.include_router(experiments_router, tags=["experiments"])
app.include_router(measures_router, prefix="/measures", tags=["measures"])


@app.get("/health", include_in_schema=False)
def health():
    return {"ok": True, "version": __version__}
