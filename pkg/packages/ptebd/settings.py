# packages/ptebd/settings.py
from __future__ import annotations

import os
from typing import List

from dotenv import load_dotenv

load_dotenv()

OUT_DIR = os.getenv("PTEBD_OUT_DIR", "runs")
WORKERS = int(os.getenv("PTEBD_WORKERS", "1"))
LOG_LEVEL = os.getenv("PTEBD_LOG_LEVEL", "INFO")


def cors_origins() -> List[str]:
    raw = os.getenv("CORS_ORIGINS", "*")
    return [o.strip() for o in raw.split(",") if o.strip()] or ["*"]
