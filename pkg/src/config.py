"""Configuration loader for the torsion engine."""

from __future__ import annotations

import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

from src.constants import DEFAULT_SEED, MAX_REGULAR_ORDER, SQRT_SEARCH_DPS, TATE_MAX_PRIME

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent
CONFIG_DIR = BASE_DIR / "config"
DATA_DIR = Path(os.getenv("TORSION_DATA_DIR", str(BASE_DIR / "data")))
DATA_DIR.mkdir(parents=True, exist_ok=True)

# --- env overrides ---
SEED = int(os.getenv("TORSION_SEED", str(DEFAULT_SEED)))
WORKERS = int(os.getenv("TORSION_WORKERS", "4"))
LOG_LEVEL = os.getenv("TORSION_LOG_LEVEL", "INFO").upper()
DB_PATH = Path(os.getenv("TORSION_DB_PATH", str(DATA_DIR / "verdicts.db")))

_DEFAULTS: dict = {
    "suite": {
        "acyclic": 100,
        "composition": 50,
        "sum": 50,
        "product": 50,
        "s1_models": 10,
        "composites": 5,
    },
    "random": {
        "max_rank": 4,
        "max_degree": 3,
        "groups": ["trivial", "cyclic 2", "cyclic 5"],
        "ops_per_matrix": 3,
    },
    "units": {
        "max_regular_order": MAX_REGULAR_ORDER,
    },
    "tate": {
        "sqrt_dps": SQRT_SEARCH_DPS,
        "max_prime": TATE_MAX_PRIME,
    },
}


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_engine_config(path: Path | None = None) -> dict:
    """Load engine defaults from YAML, filling gaps with built-in values."""
    path = path or CONFIG_DIR / "engine.yaml"
    if not path.exists():
        return _merge(_DEFAULTS, {})
    with open(path, "r", encoding="utf-8") as f:
        return _merge(_DEFAULTS, yaml.safe_load(f) or {})


ENGINE = load_engine_config()
REGULAR_ORDER_LIMIT = int(ENGINE["units"]["max_regular_order"])
SQRT_DPS = int(ENGINE["tate"]["sqrt_dps"])
TATE_PRIME_LIMIT = int(ENGINE["tate"]["max_prime"])
