"""Service configuration, loadable from a JSON file pointed at by MPV_CONFIG."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .capture import DEFAULT_MIN_TISSUE, DEFAULT_PATCH_SIZE, DEFAULT_STRIDE
from .index import DEFAULT_PROBE, DEFAULT_TOP_N
from .store import DEFAULT_CACHE_BUDGET

ENV_CONFIG = "MPV_CONFIG"
DEFAULT_TRANSFER_CAP = 200_000_000  # bytes per response


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    cache_budget_bytes: int = DEFAULT_CACHE_BUDGET
    transfer_cap_bytes: int = DEFAULT_TRANSFER_CAP
    probe: int = DEFAULT_PROBE
    top_n: int = DEFAULT_TOP_N
    patch_size: int = DEFAULT_PATCH_SIZE
    stride: int = DEFAULT_STRIDE
    min_tissue: float = DEFAULT_MIN_TISSUE
    static_dir: str | None = None
    slides: list[str] = field(default_factory=list)  # ingested at startup
    index_path: str | None = None

    def __post_init__(self):
        if self.transfer_cap_bytes <= 0:
            raise ValueError("transfer_cap_bytes must be positive")


def load_config(path: str | None = None) -> ApiConfig:
    """Read config JSON from `path`, else $MPV_CONFIG, else use defaults."""
    path = path or os.environ.get(ENV_CONFIG)
    if not path:
        return ApiConfig()
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(ApiConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ApiConfig(**raw)
