"""Config defaults and MPV_CONFIG file loading."""
from __future__ import annotations

import json

import pytest

from mpview.config import ApiConfig, load_config


def test_defaults():
    cfg = ApiConfig()
    assert cfg.transfer_cap_bytes == 200_000_000
    assert cfg.probe == 3
    assert cfg.top_n == 5
    assert cfg.cache_budget_bytes == 1 << 30


def test_load_from_env(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"port": 9000, "transfer_cap_bytes": 1234, "slides": ["/a"]}))
    monkeypatch.setenv("MPV_CONFIG", str(path))
    cfg = load_config()
    assert (cfg.port, cfg.transfer_cap_bytes, cfg.slides) == (9000, 1234, ["/a"])


def test_explicit_path_wins_over_defaults(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"host": "0.0.0.0"}))
    assert load_config(str(path)).host == "0.0.0.0"


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"no_such_key": 1}))
    with pytest.raises(ValueError, match="no_such_key"):
        load_config(str(path))


def test_nonpositive_cap_rejected():
    with pytest.raises(ValueError):
        ApiConfig(transfer_cap_bytes=0)
