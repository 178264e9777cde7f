"""Tests for src.config: engine defaults and YAML overrides."""

import tempfile
from pathlib import Path

from src.config import load_engine_config


class TestLoadEngineConfig:
    def test_loads_shipped_config(self):
        config = load_engine_config()
        assert config["suite"]["acyclic"] > 0
        assert "cyclic 5" in config["random"]["groups"]

    def test_sections_exist(self):
        config = load_engine_config()
        for section in ("suite", "random", "units", "tate"):
            assert section in config
        assert config["units"]["max_regular_order"] >= 5

    def test_missing_file_gives_defaults(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            config = load_engine_config(Path(tmpdir) / "absent.yaml")
            assert config["suite"]["composition"] == 50
            assert config["random"]["ops_per_matrix"] == 3

    def test_override_keeps_other_keys(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "engine.yaml"
            path.write_text("suite:\n  acyclic: 3\nrandom:\n  groups: [trivial]\n",
                            encoding="utf-8")
            config = load_engine_config(path)
            assert config["suite"]["acyclic"] == 3
            assert config["suite"]["sum"] == 50
            assert config["random"]["groups"] == ["trivial"]
            assert config["random"]["max_degree"] == 3

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "engine.yaml"
            path.write_text("", encoding="utf-8")
            assert load_engine_config(path)["tate"]["sqrt_dps"] == 60


class TestEngineLimits:
    def test_limits_follow_shipped_config(self):
        from src.config import REGULAR_ORDER_LIMIT, SQRT_DPS, TATE_PRIME_LIMIT

        assert REGULAR_ORDER_LIMIT == 64
        assert SQRT_DPS == 60
        assert TATE_PRIME_LIMIT == 13
